#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Brute-force oracle: system plus a few undamped bath modes

H = H_s + Σ_k ω_k b_k†b_k + S Σ_k g_k (b_k + b_k†), propagated as a pure state.
Thermal mode states and mixed system states are purified with one ancilla
per factor; ancillas do not evolve.

Author: messkit developers
"""

import logging
import math
from typing import List, Sequence, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.baths import BETA_INF, bose_occupation
from core.modes import ExponentialModes
from core.solvers.integrator import expm_propagate
from core.solvers.results import FLAG_RECURRENCE, PropagationResult
from core.statespace import SystemModel, annihilation, embed, thermal_populations
from core.utils import DimensionError, SchemaError, Timer

# Setup logger
logger = logging.getLogger("core.oracles")

MAX_MODES = 6
MAX_DIMENSION = 1_000_000
RECURRENCE_FRACTION = 0.3


class DiscreteBath(BaseModel):
    """Undamped modes with couplings g_k, frequencies ω_k > 0 and inverse temperature β."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g: np.ndarray
    omega: np.ndarray
    beta: float = BETA_INF

    @field_validator("g", "omega", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.atleast_1d(np.asarray(value, dtype=float))

    @model_validator(mode="after")
    def _check(self) -> "DiscreteBath":
        if self.g.shape != self.omega.shape:
            raise ValueError("g and omega must have equal length")
        if self.g.size > MAX_MODES:
            raise ValueError(f"at most {MAX_MODES} discrete modes")
        if np.any(self.omega <= 0):
            raise ValueError("mode frequencies must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        return self

    @property
    def count(self) -> int:
        return int(self.g.size)

    def occupations(self) -> np.ndarray:
        if math.isinf(self.beta):
            return np.zeros(self.count)
        return np.asarray(bose_occupation(self.omega, self.beta), dtype=float)

    def correlation(self, t) -> np.ndarray:
        """C(t) = Σ g_k² [(n_k+1) e^{−iω_k t} + n_k e^{iω_k t}]."""
        times = np.asarray(t, dtype=float)
        n = self.occupations()
        phase = np.exp(-1j * np.multiply.outer(times, self.omega))
        value = (phase * (self.g ** 2 * (n + 1.0)) + phase.conj() * (self.g ** 2 * n)).sum(axis=-1)
        return complex(value) if np.ndim(t) == 0 else value

    evaluate = correlation

    def to_exponential(self, damping: float = 0.0) -> ExponentialModes:
        """Exponential modes of the same bath, optionally with a small damping γ on every term."""
        n = self.occupations()
        d = [self.g ** 2 * (n + 1.0)]
        z = [damping + 1j * self.omega]
        if np.any(n > 0):
            d.append(self.g ** 2 * n)
            z.append(damping - 1j * self.omega)
        return ExponentialModes(d=np.concatenate(d), z=np.concatenate(z))

    def recurrence_time(self) -> float:
        """2π over the smallest positive frequency or frequency difference."""
        freqs = np.unique(self.omega)
        gaps = list(freqs) + [b - a for a, b in zip(freqs[:-1], freqs[1:])]
        gaps = [g for g in gaps if g > 1e-12]
        return 2.0 * math.pi / min(gaps) if gaps else math.inf


def discretized_bath_oracle(
    model: SystemModel,
    bath: DiscreteBath,
    cutoffs: Union[int, Sequence[int]],
    times: Sequence[float],
    rho0: np.ndarray,
    max_dimension: int = MAX_DIMENSION,
    recurrence_fraction: float = RECURRENCE_FRACTION,
) -> PropagationResult:
    """
    Exact unitary propagation of system plus discrete modes, traced down to ρ_s(t).

    Raises:
        SchemaError: Bad cutoffs, grid or initial state
        DimensionError: If the purified Hilbert space exceeds ``max_dimension``
    """
    M = bath.count
    cuts = [int(cutoffs)] * M if isinstance(cutoffs, int) else [int(c) for c in cutoffs]
    if len(cuts) != M or any(c < 1 for c in cuts):
        raise SchemaError("one positive cutoff per mode is required", {"cutoffs": cuts, "modes": M})
    times = np.asarray(times, dtype=float)
    rho0 = np.asarray(rho0, dtype=complex)
    d = model.dim
    if rho0.shape != (d, d):
        raise SchemaError("initial state does not match the system dimension")

    occupations = bath.occupations()
    evals = np.linalg.eigvalsh(rho0)
    system_mixed = int(np.sum(evals > 1e-12)) > 1
    thermal = [n > 0 for n in occupations]

    dims: List[int] = [d] + ([d] if system_mixed else [])
    mode_slots = []
    for k, c in enumerate(cuts):
        mode_slots.append(len(dims))
        dims.append(c + 1)
        if thermal[k]:
            dims.append(c + 1)
    total = int(np.prod(dims))
    if total > max_dimension:
        raise DimensionError("discretized bath space too large", {"dimension": total, "limit": max_dimension})

    with Timer("Discretized bath", log=False) as timer:
        H = embed(model.H, 0, dims)
        S = embed(model.S, 0, dims)
        for k, slot in enumerate(mode_slots):
            a = annihilation(cuts[k])
            number = a.conj().T @ a
            H = H + bath.omega[k] * embed(number, slot, dims)
            H = H + bath.g[k] * (S @ embed(a + a.conj().T, slot, dims))
        H = sp.csr_matrix(H)

        if system_mixed:
            factors = [_purify_state(rho0)]
        else:
            w, v = np.linalg.eigh(rho0)
            factors = [v[:, -1] * np.sqrt(w[-1])]
        for k, c in enumerate(cuts):
            populations = thermal_populations(float(occupations[k]), c)
            if thermal[k]:
                factors.append(np.diag(np.sqrt(populations)).ravel())
            else:
                vacuum = np.zeros(c + 1)
                vacuum[0] = 1.0
                factors.append(vacuum)
        psi0 = factors[0].astype(complex)
        for f in factors[1:]:
            psi0 = np.kron(psi0, f)

        trajectory, _ = expm_propagate(-1j * H, psi0, times)
        rest = total // d
        states = np.empty((times.size, d, d), dtype=complex)
        for i, psi in enumerate(trajectory):
            block = psi.reshape(d, rest)
            states[i] = block @ block.conj().T

    recurrence = bath.recurrence_time()
    result = PropagationResult(
        times=times,
        states=states,
        backend="oracle-discretized",
        diagnostics={"dimension": total, "recurrence_time": recurrence, "wall_time": timer.elapsed()},
        metadata={"cutoffs": cuts, "beta": bath.beta, "modes": M},
    )
    logger.info(f"Discretized bath: dimension {total}, {times.size} points ({timer.elapsed():.3f}s)")
    if times.size and times[-1] > recurrence_fraction * recurrence:
        logger.warning(
            f"Requested t_max {times[-1]:.3g} exceeds {recurrence_fraction}× recurrence time {recurrence:.3g}"
        )
        return result.with_flags(FLAG_RECURRENCE)
    return result


def _purify_state(rho: np.ndarray) -> np.ndarray:
    """Σ_i √λ_i |v_i⟩ ⊗ |v_i*⟩ as a flat vector; tracing the second factor returns ρ."""
    evals, evecs = np.linalg.eigh(rho)
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    return (root @ evecs.T).ravel()
