#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Adaptive Dormand–Prince 5(4) integrator and exponential propagation

Steps are clipped to land on every output time, so outputs are exact step
endpoints. A post-step hook may modify the state (filtering) or raise
(watchdogs).

Author: messkit developers
"""

import logging
import math
from typing import Callable, Dict, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.linalg import expm_multiply

from core.utils import ConvergenceError, SchemaError

# Setup logger
logger = logging.getLogger("core.solvers")

RHS = Callable[[float, np.ndarray], np.ndarray]
PostStep = Callable[[float, np.ndarray], np.ndarray]

# Dormand–Prince tableau
_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
_A = [
    [],
    [1.0 / 5.0],
    [3.0 / 40.0, 9.0 / 40.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
]
_B = np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0])
_E = np.array(
    [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ]
)


class IntegratorOptions(BaseModel):
    """
    Integrator settings.

    Attributes:
        method: "dopri5" (adaptive) or "expm" (exact exponential of a
            constant linear generator)
        rtol: Relative tolerance
        atol: Absolute tolerance
        first_step: Initial step (estimated if None)
        max_step: Step ceiling (unbounded if None)
        max_steps: Accepted-plus-rejected step budget
    """

    model_config = ConfigDict(frozen=True)

    method: Literal["dopri5", "expm"] = "dopri5"
    rtol: float = Field(default=1e-8, gt=0.0)
    atol: float = Field(default=1e-10, gt=0.0)
    first_step: Optional[float] = Field(default=None, gt=0.0)
    max_step: Optional[float] = Field(default=None, gt=0.0)
    max_steps: int = Field(default=2_000_000, ge=1)
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(x) ** 2))) if x.size else 0.0


def _initial_step(rhs: RHS, t0: float, y0: np.ndarray, f0: np.ndarray, opts: IntegratorOptions) -> float:
    scale = opts.atol + np.abs(y0) * opts.rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    d2 = _rms((rhs(t0 + h0, y1) - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1)


def _check_grid(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float).ravel()
    if times.size < 1 or not np.all(np.isfinite(times)):
        raise SchemaError("time grid must be finite and non-empty")
    if np.any(np.diff(times) <= 0):
        raise SchemaError("time grid must be strictly increasing")
    return times


def dopri5(
    rhs: RHS,
    y0: np.ndarray,
    times: np.ndarray,
    options: Optional[IntegratorOptions] = None,
    post_step: Optional[PostStep] = None,
) -> Tuple[np.ndarray, Dict[str, float]]:
    """
    Integrate y′ = rhs(t, y) and return y at every grid time.

    Args:
        rhs: Right-hand side
        y0: Initial state at ``times[0]``
        times: Strictly increasing output grid
        options: Tolerances and step limits
        post_step: Hook called after every accepted step

    Returns:
        (states of shape (n_t, n), step statistics)

    Raises:
        ConvergenceError: If the step budget is exhausted or the step underflows
    """
    opts = options or IntegratorOptions()
    times = _check_grid(times)
    y = np.array(y0, dtype=complex)
    out = np.empty((times.size, y.size), dtype=complex)
    out[0] = y
    t = float(times[0])
    f = rhs(t, y)
    h = opts.first_step or _initial_step(rhs, t, y, f, opts)
    stats = {"accepted": 0, "rejected": 0, "min_step": math.inf, "max_step": 0.0}
    k = np.empty((7, y.size), dtype=complex)

    for i in range(1, times.size):
        target = float(times[i])
        while t < target:
            if stats["accepted"] + stats["rejected"] >= opts.max_steps:
                raise ConvergenceError("integrator step budget exhausted", {"t": t, "steps": opts.max_steps})
            if opts.max_step is not None:
                h = min(h, opts.max_step)
            landing = target - t <= h * (1.0 + 1e-12)
            step = target - t if landing else h
            if step < 1e-14 * max(1.0, abs(t)):
                raise ConvergenceError("integrator step size underflow", {"t": t, "step": step})

            k[0] = f
            for s in range(1, 7):
                k[s] = rhs(t + _C[s] * step, y + step * (np.asarray(_A[s]) @ k[:s]))
            y_new = y + step * (_B @ k)
            err = step * (_E @ k)
            scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
            norm = _rms(err / scale)

            if norm <= 1.0:
                t = target if landing else t + step
                y = y_new
                if post_step is not None:
                    y = post_step(t, y)
                    f = rhs(t, y)
                else:
                    f = k[6]
                stats["accepted"] += 1
                stats["min_step"] = min(stats["min_step"], step)
                stats["max_step"] = max(stats["max_step"], step)
                factor = opts.max_factor if norm == 0.0 else opts.safety * norm ** -0.2
                grown = step * min(opts.max_factor, max(1.0, factor))
                # a clipped landing step must not shrink the next regular step
                h = max(h, grown) if landing else grown
            else:
                stats["rejected"] += 1
                h = step * max(opts.min_factor, opts.safety * norm ** -0.2)
        out[i] = y

    if stats["accepted"] == 0:
        stats["min_step"] = 0.0
    return out, stats


def expm_propagate(
    matrix: sp.spmatrix,
    y0: np.ndarray,
    times: np.ndarray,
    post_step: Optional[PostStep] = None,
) -> Tuple[np.ndarray, Dict[str, float]]:
    """y(t) = exp(M(t − t_0)) y_0 on the grid, interval by interval."""
    times = _check_grid(times)
    y = np.array(y0, dtype=complex)
    out = np.empty((times.size, y.size), dtype=complex)
    out[0] = y
    matrix = sp.csr_matrix(matrix)
    for i in range(1, times.size):
        y = expm_multiply(matrix * (times[i] - times[i - 1]), y)
        if post_step is not None:
            y = post_step(float(times[i]), y)
        out[i] = y
    return out, {"accepted": times.size - 1, "rejected": 0}


def propagate_linear(
    matrix: sp.spmatrix,
    y0: np.ndarray,
    times: np.ndarray,
    options: Optional[IntegratorOptions] = None,
    post_step: Optional[PostStep] = None,
) -> Tuple[np.ndarray, Dict[str, float]]:
    """Propagate y′ = M y with the configured method."""
    opts = options or IntegratorOptions()
    if opts.method == "expm":
        return expm_propagate(matrix, y0, times, post_step)
    matrix = sp.csr_matrix(matrix)
    return dopri5(lambda t, y: matrix @ y, y0, times, opts, post_step)
