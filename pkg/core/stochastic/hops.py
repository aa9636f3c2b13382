#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Linear hierarchy of pure states

∂_t ψ_m = (−iH_s + Z_t* S − Σ_k m_k z_k) ψ_m
          + Σ_k √m_k √d_k S ψ_{m−e_k} − Σ_k √(m_k+1) √d_k S ψ_{m+e_k}

in the rescaled basis, with ⟨Z_t Z_s*⟩ = C(t − s), ψ_m(0) = 0 for m ≠ 0 and
ρ_s(t) = ⟨|ψ_0(t)⟩⟨ψ_0(t)|⟩.

Author: messkit developers
"""

import logging
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from core.modes import ExponentialModes
from core.solvers.heom import enumerate_indices
from core.solvers.results import FLAG_DEPTH
from core.statespace import SystemModel, hierarchy_size
from core.stochastic.ensemble import DEFAULT_STDERR_BOUND, TrajectoryEnsemble, run_ensemble
from core.stochastic.noise import generate_hops_noise
from core.stochastic.sln import refined_grid
from core.utils import DimensionError, SchemaError

# Setup logger
logger = logging.getLogger("core.stochastic")

MAX_HIERARCHY = 200_000


class HopsHierarchy:
    """Index set, damping rates and the S-coupling matrix of the pure-state hierarchy."""

    def __init__(self, modes: ExponentialModes, depth: int):
        if depth < 1:
            raise SchemaError("hierarchy depth must be at least 1", {"depth": depth})
        size = hierarchy_size(modes.count, depth)
        if size > MAX_HIERARCHY:
            raise DimensionError("pure-state hierarchy too large", {"size": size, "limit": MAX_HIERARCHY})
        self.depth = depth
        self.indices = enumerate_indices(modes.count, depth)
        lookup = {m: p for p, m in enumerate(self.indices)}
        self.rates = np.array([np.dot(m, modes.z) for m in self.indices], dtype=complex)
        root_d = np.sqrt(modes.d)
        rows, cols, vals = [], [], []
        for p, m in enumerate(self.indices):
            for k, occ in enumerate(m):
                if occ > 0:
                    lower = m[:k] + (occ - 1,) + m[k + 1:]
                    rows.append(p)
                    cols.append(lookup[lower])
                    vals.append(np.sqrt(occ) * root_d[k])
                upper = m[:k] + (occ + 1,) + m[k + 1:]
                if upper in lookup:
                    rows.append(p)
                    cols.append(lookup[upper])
                    vals.append(-np.sqrt(occ + 1) * root_d[k])
        n = len(self.indices)
        self.coupling = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n, n))

    @property
    def count(self) -> int:
        return len(self.indices)

    def rhs(self, H: np.ndarray, S: np.ndarray, psi: np.ndarray, z_conj: np.ndarray) -> np.ndarray:
        """Batched right-hand side; psi has shape (B, N, d), z_conj shape (B,)."""
        B, N, d = psi.shape
        Spsi = psi @ S.T
        out = psi @ (-1j * H).T + z_conj[:, None, None] * Spsi - self.rates[None, :, None] * psi
        stacked = Spsi.transpose(1, 0, 2).reshape(N, B * d)
        out += (self.coupling @ stacked).reshape(N, B, d).transpose(1, 0, 2)
        return out


def _pure_state(rho0: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(rho0)
    if np.sum(evals > 1e-12) != 1:
        raise SchemaError("HOPS needs a pure initial state")
    return evecs[:, -1] * np.sqrt(evals[-1])


def integrate_hops(
    hierarchy: HopsHierarchy,
    model: SystemModel,
    psi0: np.ndarray,
    noise: np.ndarray,
    h: float,
    stride: int,
) -> np.ndarray:
    """RK4 over noise paths of shape (B, n_fine); returns ρ from ψ_0, shape (B, n_out, d, d)."""
    B, n_fine = noise.shape
    d = psi0.size
    psi = np.zeros((B, hierarchy.count, d), dtype=complex)
    psi[:, 0, :] = psi0
    n_out = (n_fine - 1) // stride + 1
    out = np.empty((B, n_out, d, d), dtype=complex)
    out[:, 0] = np.einsum("bi,bj->bij", psi[:, 0], psi[:, 0].conj())
    zc = noise.conj()
    H, S = model.H, model.S
    for j in range(n_fine - 1):
        z0, z1 = zc[:, j], zc[:, j + 1]
        zm = 0.5 * (z0 + z1)
        k1 = hierarchy.rhs(H, S, psi, z0)
        k2 = hierarchy.rhs(H, S, psi + 0.5 * h * k1, zm)
        k3 = hierarchy.rhs(H, S, psi + 0.5 * h * k2, zm)
        k4 = hierarchy.rhs(H, S, psi + h * k3, z1)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (j + 1) % stride == 0:
            top = psi[:, 0]
            out[:, (j + 1) // stride] = np.einsum("bi,bj->bij", top, top.conj())
    return out


def hops_propagate_ensemble(
    model: SystemModel,
    modes: ExponentialModes,
    depth: int,
    times: np.ndarray,
    count: int,
    seed: int,
    rho0: Optional[np.ndarray] = None,
    substeps: int = 1,
    threads: Optional[int] = None,
    stderr_bound: float = DEFAULT_STDERR_BOUND,
    depth_check: bool = False,
    keep_samples: bool = False,
) -> TrajectoryEnsemble:
    """
    Propagate ``count`` linear HOPS trajectories.

    With ``depth_check`` the ensemble is repeated at depth + 1 on the same
    noise; the deeper ensemble is returned and flagged if the means differ by
    more than three standard errors anywhere.

    Raises:
        SchemaError: Mixed initial state, bad grid or depth
        DimensionError: If the hierarchy is too large
    """
    if not isinstance(modes, ExponentialModes):
        raise SchemaError("HOPS needs exponential modes")
    times = np.asarray(times, dtype=float)
    fine = refined_grid(times, substeps)
    h = float(fine[1] - fine[0])
    if rho0 is None:
        rho0 = np.zeros((model.dim, model.dim), dtype=complex)
        rho0[0, 0] = 1.0
    psi0 = _pure_state(np.asarray(rho0, dtype=complex))

    def run(level: int) -> TrajectoryEnsemble:
        hierarchy = HopsHierarchy(modes, level)

        def task(rngs: List[np.random.Generator]) -> np.ndarray:
            noise = np.stack([generate_hops_noise(modes, fine, rng) for rng in rngs])
            return integrate_hops(hierarchy, model, psi0, noise, h, substeps)

        return run_ensemble(
            task,
            count,
            seed,
            times,
            threads=threads,
            backend="hops",
            stderr_bound=stderr_bound,
            keep_samples=keep_samples,
            metadata={"depth": level, "hierarchy_size": hierarchy.count, "substeps": substeps, "noise_step": h},
        )

    ensemble = run(depth)
    if not depth_check:
        return ensemble
    deeper = run(depth + 1)
    gap = np.abs(deeper.mean - ensemble.mean)
    band = 3.0 * np.abs(deeper.stderr) + 1e-12
    difference = float(gap.max())
    diagnostics = {**deeper.diagnostics, "depth_difference": difference}
    flags = deeper.flags
    if np.any(gap > band):
        logger.warning(f"HOPS depth {depth} not converged: depth {depth + 1} moves the mean by {difference:.3e}")
        flags = flags + (FLAG_DEPTH,)
    return deeper.model_copy(update={"flags": flags, "diagnostics": diagnostics})
