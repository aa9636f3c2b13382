#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Second-order time-nonlocal master equation

ρ̇_s(t) = −i[H_s, ρ_s(t)] − ∫_0^t dτ [S, U(t−τ)(C(t−τ) S ρ_s(τ) − C*(t−τ) ρ_s(τ) S)]

with U(s)X = e^{−iH_s s} X e^{iH_s s}. The memory integral uses the
trapezoidal rule on a uniform internal grid and the time step the implicit
trapezoidal rule; two step sizes are combined by Richardson extrapolation.

Author: messkit developers
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicSpline

from core.solvers.results import FLAG_TRACE_DRIFT, PropagationResult
from core.statespace import SystemModel, commutator, left_superop, right_superop, unvec, vec
from core.utils import AccuracyError, SchemaError, Timer

# Setup logger
logger = logging.getLogger("core.solvers")

DEFAULT_MAX_STEP = 0.01
DEFAULT_ACCURACY_TOL = 1e-4


def memory_kernel(model: SystemModel, correlation, lags: np.ndarray) -> np.ndarray:
    """K(s) = [S, ·] ∘ U(s) ∘ (C(s) S· − C*(s) ·S) as d²×d² matrices, one per lag."""
    evals, evecs = np.linalg.eigh(model.H)
    values = np.asarray(correlation.evaluate(lags), dtype=complex)
    comm = commutator(model.S).toarray()
    left = left_superop(model.S).toarray()
    right = right_superop(model.S).toarray()
    kernels = np.empty((lags.size, model.dim ** 2, model.dim ** 2), dtype=complex)
    for i, (s, c) in enumerate(zip(lags, values)):
        V = (evecs * np.exp(-1j * evals * s)) @ evecs.conj().T
        # vec(V X V†) = (V̄ ⊗ V) vec(X)
        U = np.kron(V.conj(), V)
        kernels[i] = comm @ U @ (c * left - np.conj(c) * right)
    return kernels


def _march(
    L0: np.ndarray,
    kernels: np.ndarray,
    rho0: np.ndarray,
    steps: int,
    h: float,
    stride: int = 1,
) -> np.ndarray:
    """
    Implicit trapezoidal march over the last ``len(kernels) − 1`` steps of history.

    The history lives in a ring buffer of ``len(kernels)`` states; every
    ``stride``-th state is recorded. Returns vec(ρ) at steps // stride + 1 nodes.
    """
    window = kernels.shape[0] - 1
    n_sys = rho0.size
    ring = np.zeros((window + 1, n_sys), dtype=complex)
    ring[0] = rho0
    record = np.zeros((steps // stride + 1, n_sys), dtype=complex)
    record[0] = rho0
    identity = np.eye(n_sys, dtype=complex)
    implicit = L0 - 0.5 * h * kernels[0]
    lu = scipy.linalg.lu_factor(identity - 0.5 * h * implicit)
    slots = window + 1

    def memory(n: int, include_last: bool) -> np.ndarray:
        # h[½K_{n−s} ρ_s + Σ_{j=s+1}^{n−1} K_{n−j} ρ_j (+ ½K_0 ρ_n)], s = max(0, n − window)
        start = max(0, n - window)
        acc = 0.5 * kernels[n - start] @ ring[start % slots]
        if n - 1 >= start + 1:
            js = np.arange(start + 1, n)
            acc = acc + np.einsum("jab,jb->a", kernels[n - js], ring[js % slots])
        if include_last:
            acc = acc + 0.5 * kernels[0] @ ring[n % slots]
        return h * acc

    force = L0 @ rho0
    current = rho0
    for n in range(steps):
        partial = memory(n + 1, include_last=False)
        rhs = current + 0.5 * h * (force - partial)
        current = scipy.linalg.lu_solve(lu, rhs)
        ring[(n + 1) % slots] = current
        if (n + 1) % stride == 0:
            record[(n + 1) // stride] = current
        force = L0 @ current - memory(n + 1, include_last=True)
    return record


def tcl2_propagate(
    model: SystemModel,
    correlation,
    times: Sequence[float],
    rho0: np.ndarray,
    max_step: float = DEFAULT_MAX_STEP,
    memory_time: Optional[float] = None,
    extrapolate: bool = True,
    accuracy_tol: float = DEFAULT_ACCURACY_TOL,
) -> PropagationResult:
    """
    Propagate the second-order time-nonlocal equation.

    Args:
        model: System model
        correlation: Anything with ``evaluate(t)`` giving C(t) for t ≥ 0
        times: Output grid starting at 0
        rho0: Initial system state
        max_step: Largest internal step
        memory_time: History window (full history if None)
        extrapolate: Combine steps h and h/2 by Richardson extrapolation
        accuracy_tol: Bound on the step-halving error estimate

    Raises:
        AccuracyError: If halving the step changes ρ_s by more than ``accuracy_tol``
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise SchemaError("tcl2 needs an increasing grid starting at t = 0")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise SchemaError("initial state does not match the system dimension")

    t_max = float(times[-1])
    steps = max(1, int(math.ceil(t_max / max_step)))
    L0 = model.liouvillian().toarray()

    with Timer("TCL2", log=False) as timer:
        fine_steps = 2 * steps
        h_fine = t_max / fine_steps
        # kernels and history only span the memory window, kept even so the coarse march shares it
        window = fine_steps
        if memory_time is not None:
            window = min(fine_steps, 2 * int(math.ceil(memory_time / (2.0 * h_fine))))
        kernels = memory_kernel(model, correlation, h_fine * np.arange(window + 1))
        fine = _march(L0, kernels, vec(rho0), fine_steps, h_fine, stride=2)
        coarse = _march(L0, kernels[::2], vec(rho0), steps, 2.0 * h_fine)

    nodes = np.linspace(0.0, t_max, steps + 1)
    estimate = float(np.max(np.abs(fine - coarse)))
    if estimate > accuracy_tol:
        raise AccuracyError(
            "tcl2 step-halving estimate exceeds tolerance; lower max_step",
            {"estimate": estimate, "tolerance": accuracy_tol},
        )
    values = (4.0 * fine - coarse) / 3.0 if extrapolate else fine
    spline = CubicSpline(nodes, values, axis=0)
    sampled = spline(times)
    states = np.array([unvec(v, model.dim) for v in sampled])

    logger.info(f"TCL2: {fine_steps} steps of {h_fine:.3e}, halving estimate {estimate:.2e} ({timer.elapsed():.3f}s)")
    result = PropagationResult(
        times=times,
        states=states,
        backend="tcl2",
        diagnostics={
            "steps": fine_steps,
            "step": h_fine,
            "history_length": window + 1,
            "error_estimate": estimate,
            "wall_time": timer.elapsed(),
        },
        metadata={"max_step": max_step, "memory_time": memory_time, "extrapolate": extrapolate},
    )
    if result.trace_drift() > 1e-8:
        result = result.with_flags(FLAG_TRACE_DRIFT)
    return result
