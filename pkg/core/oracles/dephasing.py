#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Exact reduced dynamics for commuting system and coupling operators

With [H_s, S] = 0 and S|a⟩ = s_a|a⟩ in a common eigenbasis,

    ρ_ab(t) = ρ_ab(0) e^{−i(E_a − E_b)t} exp(−c (s_a − s_b)(s_a Γ(t) − s_b Γ(t)*)),
    Γ(t) = ∫_0^t dτ ∫_0^τ du C(u) = ∫_0^t (t − u) C(u) du,

with the prefactor c fixed against the unitary discretized-bath oracle.

Author: messkit developers
"""

import logging
from typing import Sequence

import numpy as np
from scipy.integrate import quad_vec

from core.solvers.results import PropagationResult
from core.statespace import SystemModel
from core.utils import PreconditionError, SchemaError, Timer

# Setup logger
logger = logging.getLogger("core.oracles")

# calibrated against the one-mode unitary propagation (see tests)
DEPHASING_PREFACTOR = 1.0
COMMUTATOR_TOL = 1e-12
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-11


def _common_eigenbasis(model: SystemModel):
    """Common eigenbasis of the commuting pair from a generic real combination S + xH_s."""
    norm_h = float(np.abs(model.H).max())
    norm_s = float(np.abs(model.S).max())
    mix = 0.6180339887 * norm_s / norm_h if norm_h > 0 else 0.0
    _, basis = np.linalg.eigh(model.S + mix * model.H)
    s_diag = np.real(np.diag(basis.conj().T @ model.S @ basis))
    e_diag = np.real(np.diag(basis.conj().T @ model.H @ basis))
    return basis, s_diag, e_diag


def double_integral(correlation, times: np.ndarray) -> np.ndarray:
    """Γ(t) on the grid by adaptive quadrature of C(u) and u·C(u), interval by interval."""

    def integrand(u: float) -> np.ndarray:
        c = complex(np.asarray(correlation.evaluate(np.array([u])), dtype=complex).ravel()[0])
        return np.array([c.real, c.imag, u * c.real, u * c.imag])

    out = np.zeros(times.size, dtype=complex)
    moments = np.zeros(4)
    previous = 0.0
    for i, t in enumerate(times):
        if t > previous:
            piece, _ = quad_vec(integrand, previous, float(t), epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL)
            moments = moments + piece
            previous = float(t)
        first = moments[0] + 1j * moments[1]
        second = moments[2] + 1j * moments[3]
        out[i] = t * first - second
    return out


def dephasing_oracle(
    model: SystemModel,
    correlation,
    times: Sequence[float],
    rho0: np.ndarray,
) -> PropagationResult:
    """
    Closed-form pure-dephasing dynamics.

    Args:
        model: System whose H_s commutes with S
        correlation: Anything with ``evaluate(t)`` giving C(t) for t ≥ 0
        times: Non-negative increasing grid
        rho0: Initial system state

    Raises:
        PreconditionError: If [H_s, S] ≠ 0
    """
    if not model.commutes(COMMUTATOR_TOL):
        raise PreconditionError("dephasing oracle needs [H_s, S] = 0")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise SchemaError("oracle grid must be non-negative and increasing")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise SchemaError("initial state does not match the system dimension")

    with Timer("Dephasing oracle", log=False) as timer:
        basis, s, energies = _common_eigenbasis(model)
        gamma = double_integral(correlation, times)
        rho_eig = basis.conj().T @ rho0 @ basis
        gap = s[:, None] - s[None, :]
        phase = energies[:, None] - energies[None, :]
        exponent = (
            -DEPHASING_PREFACTOR
            * gap[None, :, :]
            * (s[None, :, None] * gamma[:, None, None] - s[None, None, :] * np.conj(gamma)[:, None, None])
        )
        evolved = rho_eig[None, :, :] * np.exp(exponent - 1j * phase[None, :, :] * times[:, None, None])
        states = np.einsum("ij,tjk,lk->til", basis, evolved, basis.conj())

    logger.info(f"Dephasing oracle on {times.size} points ({timer.elapsed():.3f}s)")
    return PropagationResult(
        times=times,
        states=states,
        backend="oracle-dephasing",
        diagnostics={"wall_time": timer.elapsed(), "max_decay_exponent": float(np.max(-exponent.real))},
        metadata={"prefactor": DEPHASING_PREFACTOR},
    )
