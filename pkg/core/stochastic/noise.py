#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Classical noise for stochastic unravelings

SLN pair (Z_c, Z_q) with the non-conjugated correlators
    ⟨Z_c(τ)Z_c(u)⟩ = 2 Re C(τ − u)
    ⟨Z_c(τ)Z_q(u)⟩ = 2i θ(τ − u) Im C(τ − u)
    ⟨Z_q(τ)Z_q(u)⟩ = 0
and the single complex HOPS noise with ⟨Z_t Z_s*⟩ = C(t − s).

Author: messkit developers
"""

import logging
from enum import Enum
from typing import Optional, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict

from core.modes import EffectiveModeSet, ExponentialModes, QuasiThermalModes, build_star_modeset
from core.utils import ConstructionError, SchemaError

# Setup logger
logger = logging.getLogger("core.stochastic")

EMBEDDING_FACTOR = 4
GRID_TOL = 1e-9

NoiseModes = Union[ExponentialModes, EffectiveModeSet, QuasiThermalModes]


class NoiseConstruction(str, Enum):
    OU_UNRAVELING = "ou-unraveling"
    FFT_FILTER = "fft-filter"


class SLNNoisePair(BaseModel):
    """One realization of (Z_c, Z_q) on a uniform grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    z_c: np.ndarray
    z_q: np.ndarray
    construction: NoiseConstruction
    seed: Optional[int] = None

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])


def uniform_step(times: np.ndarray) -> float:
    """Grid spacing; raises SchemaError unless the grid is uniform."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise SchemaError("noise grid needs at least two points")
    steps = np.diff(times)
    h = float(steps.mean())
    if h <= 0 or np.max(np.abs(steps - h)) > GRID_TOL * max(1.0, abs(h)):
        raise SchemaError("noise grid must be uniform and increasing")
    return h


def as_exponential(modes: NoiseModes) -> ExponentialModes:
    if isinstance(modes, QuasiThermalModes):
        return modes.to_exponential()
    if isinstance(modes, ExponentialModes):
        return modes
    raise SchemaError(f"expected exponential modes, got {type(modes).__name__}")


def as_modeset(modes: NoiseModes) -> EffectiveModeSet:
    if isinstance(modes, EffectiveModeSet):
        return modes
    return build_star_modeset(as_exponential(modes))


def bath_is_zero(modes: NoiseModes) -> bool:
    if isinstance(modes, EffectiveModeSet):
        return modes.count == 0 or not np.any(modes.kappa) or not np.any(modes.eta)
    exp = as_exponential(modes)
    return exp.count == 0 or not np.any(exp.d)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular complex Gaussian with E|ξ|² = 1 and E ξ² = 0."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _stationary_sample(A: np.ndarray, Q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample of dy = A y dt + noise with diffusion Q, drawn from its stationary law."""
    K = A.shape[0]
    if np.max(np.linalg.eigvals(A).real) >= 0:
        logger.debug("OU drift has undamped modes; starting from zero")
        return np.zeros(K, dtype=complex)
    P = scipy.linalg.solve_continuous_lyapunov(A, -Q)
    P = 0.5 * (P + P.conj().T)
    evals, evecs = np.linalg.eigh(P)
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    return root @ complex_normal(rng, K)


def _exact_step(A: np.ndarray, h: float):
    """(e^{Ah}, ∫_0^h e^{As} ds) from one augmented exponential."""
    K = A.shape[0]
    block = np.zeros((2 * K, 2 * K), dtype=complex)
    block[:K, :K] = A * h
    block[:K, K:] = np.eye(K) * h
    full = scipy.linalg.expm(block)
    return full[:K, :K], full[:K, K:]


def _ou_unraveling(modeset: EffectiveModeSet, n_t: int, h: float, rng, white_scale: float):
    """
    Z_c = κ†y + y⋄κ + w_c*,  Z_q = w_q*
    with ẏ = η(w_c + w_q) − iEy and ẏ⋄ = η†(w_c − w_q) + i y⋄E†.

    White noise is piecewise constant on grid cells; the OU states are
    advanced with exact one-step updates for that forcing.
    """
    K = modeset.count
    scale = white_scale
    w_c = scale * complex_normal(rng, n_t) / np.sqrt(h)
    w_q = scale * complex_normal(rng, n_t) / np.sqrt(h)
    if K == 0:
        return np.conj(w_c), np.conj(w_q)
    E = modeset.E
    eta = modeset.eta / scale
    # column form of the row vector y⋄: d(y⋄ᵀ)/dt = iĒ y⋄ᵀ + η̄(w_c − w_q)
    A_y = -1j * E
    A_d = 1j * E.conj()
    phi_y, int_y = _exact_step(A_y, h)
    phi_d, int_d = _exact_step(A_d, h)
    drive_y = int_y @ eta
    drive_d = int_d @ eta.conj()
    y = _stationary_sample(A_y, 2.0 * np.outer(eta, eta.conj()), rng)
    yd = _stationary_sample(A_d, 2.0 * np.outer(eta.conj(), eta), rng)

    z_c = np.empty(n_t, dtype=complex)
    kappa_dag = modeset.kappa.conj()
    for j in range(n_t):
        z_c[j] = kappa_dag @ y + yd @ modeset.kappa + np.conj(w_c[j])
        y = phi_y @ y + drive_y * (w_c[j] + w_q[j])
        yd = phi_d @ yd + drive_d * (w_c[j] - w_q[j])
    return z_c, np.conj(w_q)


def _causal_convolution(kernel: np.ndarray, signal: np.ndarray) -> np.ndarray:
    """out_k = Σ_{j<k} kernel_{k−j} signal_j through a zero-padded FFT."""
    n_t = signal.size
    length = EMBEDDING_FACTOR * n_t
    k = np.zeros(length, dtype=complex)
    k[1:n_t] = kernel[1:n_t]
    s = np.zeros(length, dtype=complex)
    s[:n_t] = signal
    return np.fft.ifft(np.fft.fft(k) * np.fft.fft(s))[:n_t]


def _fft_filter(correlation, n_t: int, h: float, rng, white_scale: float):
    """
    Causal filter choice
        Z_c = w_c* + ∫_0^t C(t−s)(w_c + w_q) ds + ∫_0^t C*(t−s)(w_c − w_q) ds,  Z_q = w_q*
    discretized with left-point weights, so target correlators are exact at grid lags.
    """
    lags = h * np.arange(n_t)
    values = np.asarray(correlation(lags), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ConstructionError(
            "correlation samples are not finite; use the ou-unraveling construction",
            {"construction": NoiseConstruction.FFT_FILTER.value},
        )
    scale = white_scale
    w_c = scale * complex_normal(rng, n_t) / np.sqrt(h)
    w_q = scale * complex_normal(rng, n_t) / np.sqrt(h)
    kernel = h * values / scale
    z_c = (
        np.conj(w_c)
        + _causal_convolution(kernel, w_c + w_q)
        + _causal_convolution(np.conj(kernel), w_c - w_q)
    )
    return z_c, np.conj(w_q)


def generate_sln_noise(
    modes: NoiseModes,
    times: np.ndarray,
    seed: Optional[int] = None,
    construction: Union[NoiseConstruction, str] = NoiseConstruction.OU_UNRAVELING,
    rng: Optional[np.random.Generator] = None,
    white_scale: float = 1.0,
) -> SLNNoisePair:
    """
    Draw one (Z_c, Z_q) realization.

    ``white_scale`` multiplies the white parts and divides the colored
    parts; the target correlators do not depend on it, only the variance does.
    An ``rng`` overrides ``seed``.

    Raises:
        SchemaError: Non-uniform grid or non-positive white scale
        ConstructionError: If the fft-filter kernel cannot be built
    """
    construction = NoiseConstruction(construction)
    times = np.asarray(times, dtype=float)
    h = uniform_step(times)
    if white_scale <= 0:
        raise SchemaError("white noise scale must be positive", {"white_scale": white_scale})
    generator = rng if rng is not None else np.random.default_rng(seed)

    if construction == NoiseConstruction.OU_UNRAVELING:
        z_c, z_q = _ou_unraveling(as_modeset(modes), times.size, h, generator, white_scale)
    else:
        if isinstance(modes, EffectiveModeSet):
            correlation = modes.correlation
        else:
            correlation = as_exponential(modes).correlation
        z_c, z_q = _fft_filter(correlation, times.size, h, generator, white_scale)
    return SLNNoisePair(times=times, z_c=z_c, z_q=z_q, construction=construction, seed=seed)


def generate_hops_noise(
    modes: NoiseModes,
    times: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Complex Gaussian Z_t with ⟨Z_t Z_s*⟩ = C(t − s) and ⟨Z_t Z_s⟩ = 0.

    When every residue is real and positive, Z is a sum of exact complex OU
    processes; otherwise a circulant embedding of C over 4× the grid is used
    and negative eigenvalues are clipped.
    """
    exp = as_exponential(modes)
    times = np.asarray(times, dtype=float)
    h = uniform_step(times)
    n_t = times.size
    if exp.count == 0 or not np.any(exp.d):
        return np.zeros(n_t, dtype=complex)

    if np.all(np.abs(exp.d.imag) <= 1e-14 * np.abs(exp.d)) and np.all(exp.d.real > 0):
        d = exp.d.real
        decay = np.exp(-exp.z * h)
        spread = np.sqrt(d * (1.0 - np.exp(-2.0 * exp.z.real * h)))
        x = np.sqrt(d) * complex_normal(rng, exp.count)
        kicks = complex_normal(rng, (n_t, exp.count))
        z = np.empty(n_t, dtype=complex)
        for j in range(n_t):
            z[j] = x.sum()
            x = decay * x + spread * kicks[j]
        return z

    length = EMBEDDING_FACTOR * n_t
    half = length // 2
    row = np.empty(length, dtype=complex)
    row[: half + 1] = exp.correlation(h * np.arange(half + 1))
    row[half + 1:] = np.conj(row[1:half][::-1])
    lam = np.fft.fft(row).real
    clipped = float(-lam[lam < 0].sum() / max(np.abs(lam).sum(), 1e-300))
    if clipped > 1e-6:
        logger.warning(f"Circulant embedding clipped {clipped:.2e} of the spectral weight")
    lam = np.clip(lam, 0.0, None)
    values = np.fft.ifft(np.sqrt(lam * length) * complex_normal(rng, length))
    return values[:n_t]
