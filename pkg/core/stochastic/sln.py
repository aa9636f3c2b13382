#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Stochastic Liouville–von Neumann ensembles

ρ̇_z = −i[H_s, ρ_z] − i Z_c 𝒮_q ρ_z − i Z_q 𝒮_c ρ_z,
𝒮_q X = (SX − XS)/√2, 𝒮_c X = (SX + XS)/√2.

Each sample is propagated with classical fourth-order Runge–Kutta on the
noise grid; noise at the half-step stages is linearly interpolated. Single
samples are not trace preserving, only the mean is physical.

Author: messkit developers
"""

import logging
from typing import List, Optional, Union

import numpy as np

from core.statespace import SystemModel
from core.stochastic.ensemble import DEFAULT_STDERR_BOUND, TrajectoryEnsemble, run_ensemble
from core.stochastic.noise import NoiseConstruction, NoiseModes, bath_is_zero, generate_sln_noise, uniform_step
from core.utils import SchemaError

# Setup logger
logger = logging.getLogger("core.stochastic")

SQRT2 = np.sqrt(2.0)


def refined_grid(times: np.ndarray, substeps: int) -> np.ndarray:
    """Uniform grid with ``substeps`` cells per output interval."""
    times = np.asarray(times, dtype=float)
    uniform_step(times)
    if substeps < 1:
        raise SchemaError("substeps must be positive", {"substeps": substeps})
    return np.linspace(times[0], times[-1], (times.size - 1) * substeps + 1)


def _sln_rhs(H: np.ndarray, S: np.ndarray, rho: np.ndarray, zc: np.ndarray, zq: np.ndarray) -> np.ndarray:
    """Batched right-hand side; rho has shape (B, d, d), zc and zq shape (B,)."""
    Hr = H @ rho
    rH = rho @ H
    Sr = S @ rho
    rS = rho @ S
    out = -1j * (Hr - rH)
    out -= (1j / SQRT2) * (zc[:, None, None] * (Sr - rS) + zq[:, None, None] * (Sr + rS))
    return out


def integrate_sln(
    model: SystemModel,
    rho0: np.ndarray,
    z_c: np.ndarray,
    z_q: np.ndarray,
    h: float,
    stride: int,
) -> np.ndarray:
    """
    RK4 over noise paths of shape (B, n_fine); returns ρ_z at every
    ``stride``-th node, shape (B, n_out, d, d).
    """
    B, n_fine = z_c.shape
    rho = np.broadcast_to(np.asarray(rho0, dtype=complex), (B,) + rho0.shape).copy()
    n_out = (n_fine - 1) // stride + 1
    out = np.empty((B, n_out) + rho0.shape, dtype=complex)
    out[:, 0] = rho
    H, S = model.H, model.S
    for j in range(n_fine - 1):
        zc0, zc1 = z_c[:, j], z_c[:, j + 1]
        zq0, zq1 = z_q[:, j], z_q[:, j + 1]
        zcm, zqm = 0.5 * (zc0 + zc1), 0.5 * (zq0 + zq1)
        k1 = _sln_rhs(H, S, rho, zc0, zq0)
        k2 = _sln_rhs(H, S, rho + 0.5 * h * k1, zcm, zqm)
        k3 = _sln_rhs(H, S, rho + 0.5 * h * k2, zcm, zqm)
        k4 = _sln_rhs(H, S, rho + h * k3, zc1, zq1)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (j + 1) % stride == 0:
            out[:, (j + 1) // stride] = rho
    return out


def sln_propagate_ensemble(
    model: SystemModel,
    modes: NoiseModes,
    times: np.ndarray,
    count: int,
    seed: int,
    rho0: Optional[np.ndarray] = None,
    construction: Union[NoiseConstruction, str] = NoiseConstruction.OU_UNRAVELING,
    substeps: int = 1,
    white_scale: float = 1.0,
    threads: Optional[int] = None,
    stderr_bound: float = DEFAULT_STDERR_BOUND,
    keep_samples: bool = False,
) -> TrajectoryEnsemble:
    """
    Propagate ``count`` SLN samples and return their mean and standard error.

    Args:
        model: System model
        modes: Bath modes generating the noise
        times: Uniform output grid
        count: Number of trajectories (≥ 2)
        seed: Master seed
        rho0: Initial state (ground state of the computational basis if None)
        construction: Noise construction
        substeps: Noise cells per output interval
        white_scale: Split between white and colored noise parts
        threads: Worker threads (``MESSKIT_THREADS`` if None)
        stderr_bound: Standard error at t_max above which the result is flagged
        keep_samples: Keep every trajectory in the ensemble

    Raises:
        SchemaError: Bad grid, count or initial state
    """
    construction = NoiseConstruction(construction)
    times = np.asarray(times, dtype=float)
    fine = refined_grid(times, substeps)
    h = float(fine[1] - fine[0])
    if rho0 is None:
        rho0 = np.zeros((model.dim, model.dim), dtype=complex)
        rho0[0, 0] = 1.0
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise SchemaError("initial state does not match the system dimension")
    silent = bath_is_zero(modes)
    if silent:
        logger.info("SLN: bath correlation vanishes; samples follow the unitary evolution")

    def task(rngs: List[np.random.Generator]) -> np.ndarray:
        if silent:
            z_c = np.zeros((len(rngs), fine.size), dtype=complex)
            z_q = np.zeros_like(z_c)
        else:
            pairs = [
                generate_sln_noise(modes, fine, construction=construction, rng=rng, white_scale=white_scale)
                for rng in rngs
            ]
            z_c = np.stack([p.z_c for p in pairs])
            z_q = np.stack([p.z_q for p in pairs])
        return integrate_sln(model, rho0, z_c, z_q, h, substeps)

    return run_ensemble(
        task,
        count,
        seed,
        times,
        threads=threads,
        backend="sln",
        stderr_bound=stderr_bound,
        keep_samples=keep_samples,
        metadata={
            "construction": construction.value,
            "substeps": substeps,
            "noise_step": h,
            "white_scale": white_scale,
        },
    )
