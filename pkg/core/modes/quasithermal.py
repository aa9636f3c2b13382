#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Quasi-thermal decomposition of a bath correlation function

C(t ≥ 0) = Σ_k g_k² [(n_k + 1)e^{−iω_k t} + n_k e^{iω_k t}] e^{−γ_k t}

Author: messkit developers
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.optimize import least_squares

from core.baths import CorrelationFunction
from core.modes.exponential import ExponentialModes
from core.utils import SchemaError

# Setup logger
logger = logging.getLogger("core.modes")

DEFAULT_MULTI_STARTS = 16
FLAG_RESIDUAL = "quasi-thermal-residual-above-tol"


class QuasiThermalModes(BaseModel):
    """
    Damped modes with thermal occupation weights.

    Attributes:
        g: Couplings g_k ≥ 0
        n: Occupations n_k ≥ 0
        omega: Mode frequencies ω_k
        gamma: Damping rates γ_k ≥ 0
        residual: Achieved sup-norm residual of the fit
        flags: Non-empty if the fit missed its tolerance
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g: np.ndarray
    n: np.ndarray
    omega: np.ndarray
    gamma: np.ndarray
    residual: float = 0.0
    flags: Tuple[str, ...] = ()

    @field_validator("g", "n", "omega", "gamma", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "QuasiThermalModes":
        for name in ("g", "n", "omega", "gamma"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        k = self.g.size
        if not (self.n.size == self.omega.size == self.gamma.size == k):
            raise ValueError("quasi-thermal parameters must have equal length")
        if np.any(self.g < 0) or np.any(self.n < 0) or np.any(self.gamma < 0):
            raise ValueError("g, n and gamma must be non-negative")
        return self

    @classmethod
    def single(cls, g: float, n: float, omega: float, gamma: float) -> "QuasiThermalModes":
        return cls(g=[g], n=[n], omega=[omega], gamma=[gamma])

    @property
    def count(self) -> int:
        return int(self.g.size)

    def correlation(self, t) -> np.ndarray:
        times = np.asarray(t, dtype=float)
        flat = np.abs(times).ravel()[:, None]
        g2 = self.g ** 2
        phase = np.exp(-1j * flat * self.omega)
        value = (g2 * ((self.n + 1.0) * phase + self.n * phase.conj()) * np.exp(-flat * self.gamma)).sum(
            axis=1
        )
        value = np.where(times.ravel() < 0, np.conj(value), value).reshape(times.shape)
        return complex(value) if np.ndim(t) == 0 else value

    evaluate = correlation

    def spectrum(self, omega) -> np.ndarray:
        """S(ω) = Σ 2γ_k g_k²[(n_k+1)L(ω−ω_k) + n_k L(ω+ω_k)], L(x) = 1/(x² + γ_k²)."""
        w = np.atleast_1d(np.asarray(omega, dtype=float))[:, None]
        g2 = self.g ** 2
        gam2 = self.gamma ** 2
        with np.errstate(divide="ignore"):
            value = (
                2.0
                * self.gamma
                * g2
                * ((self.n + 1.0) / ((w - self.omega) ** 2 + gam2) + self.n / ((w + self.omega) ** 2 + gam2))
            ).sum(axis=1)
        return float(value[0]) if np.ndim(omega) == 0 else value.reshape(np.shape(omega))

    def to_exponential(self) -> ExponentialModes:
        """Two exponential modes per quasi-thermal mode (n_k = 0 modes keep one)."""
        d = []
        z = []
        for g, n, w, gam in zip(self.g, self.n, self.omega, self.gamma):
            d.append(g * g * (n + 1.0))
            z.append(complex(gam, w))
            if n > 0.0:
                d.append(g * g * n)
                z.append(complex(gam, -w))
        return ExponentialModes(d=np.array(d), z=np.array(z), residual_bound=self.residual)


def _unpack(params: np.ndarray, K: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    u = params.reshape(4, K)
    return u[0] ** 2, u[1] ** 2, u[2], u[3] ** 2


def _model(params: np.ndarray, K: int, t: np.ndarray) -> np.ndarray:
    g, n, w, gam = _unpack(params, K)
    col = t[:, None]
    phase = np.exp(-1j * col * w)
    return ((g ** 2) * ((n + 1.0) * phase + n * phase.conj()) * np.exp(-col * gam)).sum(axis=1)


def _initial_frequencies(t: np.ndarray, target: np.ndarray, K: int) -> np.ndarray:
    """Strongest spectral lines of the sampled C(t), positive frequencies first."""
    dt = t[1] - t[0]
    spectrum = np.abs(np.fft.fft(target, n=4 * t.size))
    freqs = -2.0 * math.pi * np.fft.fftfreq(4 * t.size, d=dt)
    order = np.argsort(spectrum)[::-1]
    picked = []
    for idx in order:
        w = abs(float(freqs[idx]))
        if all(abs(w - p) > 2.0 * math.pi / (t[-1] - t[0]) for p in picked):
            picked.append(w)
        if len(picked) == K:
            break
    while len(picked) < K:
        picked.append((len(picked) + 1) * 2.0 * math.pi / (t[-1] - t[0]))
    return np.array(picked)


def quasi_thermal_fit(
    correlation: CorrelationFunction,
    K: int,
    tol: float = 1e-3,
    t_max: Optional[float] = None,
    n_times: int = 400,
    multi_starts: int = DEFAULT_MULTI_STARTS,
    seed: int = 0,
) -> QuasiThermalModes:
    """
    Multi-start least-squares fit of the quasi-thermal form to C(t).

    Non-negativity of g, n and γ is enforced by squaring the fit variables.
    Starts are jittered around FFT peak frequencies with a seeded generator.

    Args:
        correlation: Target correlation function (anything with ``evaluate(t)``)
        K: Number of quasi-thermal modes
        tol: Sup-norm tolerance relative to |C(0)|
        t_max: Fit window (default 10 decay times)
        n_times: Number of time samples
        multi_starts: Number of starts
        seed: Jitter seed

    Returns:
        Best fit; flagged when the residual exceeds ``tol``·|C(0)|
    """
    if K < 1:
        raise SchemaError("quasi-thermal fit needs K >= 1", {"K": K})
    if tol <= 0:
        raise SchemaError("tolerance must be positive", {"tol": tol})
    if t_max is None:
        if not hasattr(correlation, "decay_time"):
            raise SchemaError("t_max is required for targets without a decay time")
        t_max = 10.0 * correlation.decay_time()
    if not math.isfinite(t_max) or t_max <= 0:
        raise SchemaError("fit window must be finite and positive", {"t_max": t_max})

    t = np.linspace(0.0, t_max, n_times)
    target = np.asarray(correlation.evaluate(t), dtype=complex)
    c0 = max(abs(target[0]), 1e-300)

    def residual(params: np.ndarray) -> np.ndarray:
        diff = (_model(params, K, t) - target) / c0
        return np.concatenate([diff.real, diff.imag])

    rng = np.random.default_rng(seed)
    w0 = _initial_frequencies(t, target, K)
    g_start = math.sqrt(c0 / K)
    gamma_start = 2.0 / t_max

    best = None
    for start in range(multi_starts):
        jitter = 1.0 if start == 0 else rng.uniform(0.5, 1.5, size=(4, K))
        guess = np.vstack(
            [
                np.full(K, math.sqrt(g_start)),
                np.full(K, math.sqrt(0.5)),
                w0,
                np.full(K, math.sqrt(gamma_start)),
            ]
        ) * jitter
        fit = least_squares(residual, guess.ravel(), method="trf", xtol=1e-14, ftol=1e-14, gtol=1e-14)
        err = float(np.max(np.abs(_model(fit.x, K, t) - target)))
        if best is None or err < best[0]:
            best = (err, fit.x)
        logger.debug(f"Quasi-thermal start {start}: sup residual {err / c0:.3e}")

    err, params = best
    g, n, w, gam = _unpack(params, K)
    flags: Tuple[str, ...] = ()
    if err > tol * c0:
        flags = (FLAG_RESIDUAL,)
        logger.warning(f"Quasi-thermal fit with K={K}: residual {err / c0:.3e} exceeds {tol:.1e}")
    else:
        logger.info(f"Quasi-thermal fit with K={K}: residual {err / c0:.3e}")
    return QuasiThermalModes(g=g, n=n, omega=w, gamma=gam, residual=err, flags=flags)
