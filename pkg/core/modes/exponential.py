#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Multi-exponential decompositions C(t ≥ 0) = Σ_k d_k e^{−z_k t}

Also holds the real/imaginary (Ikeda) split used by the Ikeda hierarchy and
closed-form Brownian-oscillator fixtures.

Author: messkit developers
"""

import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.baths import CorrelationFunction, NoisePower
from core.modes.aaa import DEFAULT_M_MAX, DEFAULT_TOL, BarycentricRational, aaa_fit
from core.utils import ConditioningError, DecompositionError, SchemaError

# Setup logger
logger = logging.getLogger("core.modes")

REAL_AXIS_THRESHOLD = 1e-10
DECAY_THRESHOLD = 1e-3


class ExponentialModes(BaseModel):
    """
    Residues d_k and exponents z_k = γ_k + iω_k of C(t ≥ 0).

    Attributes:
        d: Complex residues
        z: Complex exponents with Re z_k ≥ 0
        residual_bound: Sup-norm estimate of the decomposition error on [0, t_max]
        t_max: Time window of ``residual_bound``
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    d: np.ndarray
    z: np.ndarray
    residual_bound: float = 0.0
    t_max: float = 0.0
    flags: Tuple[str, ...] = ()

    @field_validator("d", "z", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self) -> "ExponentialModes":
        object.__setattr__(self, "d", np.asarray(self.d, dtype=complex).ravel())
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex).ravel())
        if self.d.shape != self.z.shape:
            raise ValueError("d and z must have equal length")
        if np.any(self.z.real < 0):
            raise ValueError("exponents must have non-negative real part")
        if not math.isfinite(self.residual_bound):
            raise ValueError("residual bound must be finite")
        return self

    @classmethod
    def single(cls, d: complex, z: complex) -> "ExponentialModes":
        return cls(d=np.array([d]), z=np.array([z]))

    @property
    def count(self) -> int:
        return int(self.d.size)

    @property
    def frequencies(self) -> np.ndarray:
        return self.z.imag

    @property
    def rates(self) -> np.ndarray:
        return self.z.real

    def correlation(self, t) -> np.ndarray:
        """Σ d_k e^{−z_k|t|}, conjugated for t < 0."""
        times = np.asarray(t, dtype=float)
        flat = np.abs(times).ravel()
        value = np.exp(-np.outer(flat, self.z)) @ self.d
        value = value.reshape(times.shape)
        value = np.where(times < 0, np.conj(value), value)
        return complex(value) if np.ndim(t) == 0 else value

    evaluate = correlation

    def spectrum(self, omega) -> np.ndarray:
        """S(ω) = Σ 2 Re[d_k/(z_k − iω)]."""
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        value = 2.0 * np.real(self.d[None, :] / (self.z[None, :] - 1j * w[:, None])).sum(axis=1)
        return float(value[0]) if np.ndim(omega) == 0 else value.reshape(np.shape(omega))

    def decay_time(self, threshold: float = DECAY_THRESHOLD) -> float:
        """Time after which the envelope Σ|d_k|e^{−γ_k t} stays below threshold·|C(0)|."""
        c0 = abs(complex(np.sum(self.d)))
        envelope0 = float(np.sum(np.abs(self.d)))
        if envelope0 == 0.0:
            return 0.0
        target = threshold * max(c0, 1e-300)
        slowest = float(np.min(self.z.real))
        if slowest <= 0.0:
            return math.inf
        # envelope ≤ envelope0 e^{−γ_min t}
        return max(math.log(envelope0 / target) / slowest, 0.0)


def candidate_grid(noise: NoisePower, n: int = 2000, tol: float = 1e-8) -> np.ndarray:
    """
    Composite sampling grid for AAA: logarithmic around ω = 0 on both sides
    out to the support limit of the density.
    """
    density = noise.density
    scale = density.frequency_scale()
    upper = density.support_limit(tol)
    half = n // 2
    if density.table_omega is not None:
        lo = max(float(density.table_omega[0]), float(density.table_omega[-1]) * 1e-12)
        positive = np.geomspace(lo, upper, half)
        if density.table_omega[0] > 0:
            positive = positive[positive >= density.table_omega[0]]
    else:
        positive = np.geomspace(scale * 1e-6, upper, half)
    if not noise.two_sided:
        negative = -np.geomspace(scale * 1e-6, upper, max(n - half, 8) // 4)
    else:
        negative = -positive[::-1]
    return np.unique(np.concatenate([negative, positive]))


def extract_exponential_modes(
    rational: BarycentricRational,
    t_max: Optional[float] = None,
    reference: Optional[CorrelationFunction] = None,
    n_times: int = 512,
) -> ExponentialModes:
    """
    Turn a rational fit of S_β into exponential modes of C(t ≥ 0).

    Poles p_k = ω_k − iγ_k in the lower half plane are kept; the residue r_k
    of R at p_k gives d_k = −i r_k from closing the Fourier contour below.

    Args:
        rational: AAA fit of S_β(ω)
        t_max: Certification window; default 10 decay times
        reference: Correlation function used for the residual bound
        n_times: Points of the certification grid

    Raises:
        ConditioningError: If a pole with non-negligible residue lies on the real axis
        DecompositionError: If no lower-half-plane pole is found
    """
    poles = rational.poles()
    residues = rational.residues(poles)
    bandwidth = max(rational.sample_range[1] - rational.sample_range[0], 1e-300)
    value_scale = max(float(np.max(np.abs(rational.values))), 1e-300)
    negligible = 1e-14 * value_scale * bandwidth

    keep = np.abs(residues) > negligible
    near_real = keep & (np.abs(poles.imag) < REAL_AXIS_THRESHOLD)
    if np.any(near_real):
        p = poles[near_real][0]
        raise ConditioningError(
            "rational fit has a pole on the real axis", {"pole": complex(p)}
        )
    lower = keep & (poles.imag < 0)
    if not np.any(lower):
        raise DecompositionError("no poles in the lower half plane")

    d = -1j * residues[lower]
    z = 1j * poles[lower]
    order = np.argsort(z.imag)
    modes = ExponentialModes(d=d[order], z=z[order])

    if t_max is None:
        if reference is not None:
            t_max = 10.0 * reference.decay_time(DECAY_THRESHOLD)
        else:
            t_max = 10.0 * modes.decay_time(DECAY_THRESHOLD)
        if not math.isfinite(t_max):
            t_max = 100.0 / max(float(np.max(np.abs(z))), 1e-300)

    if reference is not None:
        grid = np.linspace(0.0, t_max, n_times)
        bound = float(np.max(np.abs(reference.evaluate(grid) - modes.correlation(grid))))
    else:
        bound = rational.max_error * bandwidth / (2.0 * math.pi)

    logger.info(f"Extracted {modes.count} exponential modes, residual bound {bound:.3e}")
    return ExponentialModes(
        d=modes.d, z=modes.z, residual_bound=bound, t_max=float(t_max), flags=rational.flags
    )


def fit_exponential_modes(
    correlation: CorrelationFunction,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
    n_samples: int = 2000,
    t_max: Optional[float] = None,
    certify: bool = True,
) -> Tuple[BarycentricRational, ExponentialModes]:
    """AAA fit of S_β on the candidate grid followed by mode extraction."""
    grid = candidate_grid(correlation.source, n_samples, correlation.tail_tol)
    values = correlation.source.evaluate(grid)
    rational = aaa_fit(grid, values, tol=tol, m_max=m_max)
    modes = extract_exponential_modes(
        rational, t_max=t_max, reference=correlation if certify else None
    )
    return rational, modes


class IkedaModes(BaseModel):
    """
    Mode set with split couplings η = η′ + η″.

    Re C(t) = κ†e^{−iEt}η′ and i·Im C(t) = κ†e^{−iEt}η″ for t ≥ 0.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    E: np.ndarray
    kappa: np.ndarray
    eta_re: np.ndarray
    eta_im: np.ndarray

    @field_validator("E", "kappa", "eta_re", "eta_im", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self) -> "IkedaModes":
        for name in ("E", "kappa", "eta_re", "eta_im"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        k = self.kappa.size
        if self.E.shape != (k, k) or self.eta_re.size != k or self.eta_im.size != k:
            raise ValueError("inconsistent Ikeda mode dimensions")
        if np.any(np.linalg.eigvals(self.E).imag > 1e-12 * max(1.0, np.abs(self.E).max())):
            raise ValueError("E has eigenvalues with positive imaginary part")
        return self

    @property
    def count(self) -> int:
        return int(self.kappa.size)

    def _propagate(self, t: np.ndarray, vector: np.ndarray) -> np.ndarray:
        evals, evecs = np.linalg.eig(self.E)
        left = self.kappa.conj() @ evecs
        right = np.linalg.solve(evecs, vector)
        return np.exp(-1j * np.outer(t, evals)) @ (left * right)

    def real_part(self, t) -> np.ndarray:
        return np.real(self._propagate(np.atleast_1d(np.asarray(t, dtype=float)), self.eta_re))

    def imag_part(self, t) -> np.ndarray:
        return np.real(
            -1j * self._propagate(np.atleast_1d(np.asarray(t, dtype=float)), self.eta_im)
        )

    def correlation(self, t) -> np.ndarray:
        """C(t ≥ 0) = κ†e^{−iEt}(η′ + η″)."""
        return self._propagate(
            np.atleast_1d(np.asarray(t, dtype=float)), self.eta_re + self.eta_im
        )


def ikeda_split(modes: ExponentialModes, merge_tol: float = 1e-12) -> IkedaModes:
    """
    Split exponential modes into real and imaginary parts of C.

    Each z_k yields the exponents z_k and z_k*; a purely real z_k yields one.
    Couplings are balanced, κ_j* = √|a_j|.
    """
    exps = []
    a_coef = []
    c_coef = []
    for d, z in zip(modes.d, modes.z):
        if abs(z.imag) <= merge_tol * max(1.0, abs(z)):
            exps.append(complex(z.real, 0.0))
            a_coef.append(complex(d.real, 0.0))
            c_coef.append(complex(0.0, d.imag))
        else:
            exps.extend([z, np.conj(z)])
            a_coef.extend([d / 2.0, np.conj(d) / 2.0])
            c_coef.extend([d / 2.0, -np.conj(d) / 2.0])
    exps_arr = np.array(exps, dtype=complex)
    a_arr = np.array(a_coef, dtype=complex)
    c_arr = np.array(c_coef, dtype=complex)

    magnitude = np.sqrt(np.maximum(np.abs(a_arr), np.abs(c_arr)))
    magnitude = np.where(magnitude == 0.0, 1.0, magnitude)
    kappa_conj = magnitude.astype(complex)
    return IkedaModes(
        E=np.diag(-1j * exps_arr),
        kappa=kappa_conj.conj(),
        eta_re=a_arr / kappa_conj,
        eta_im=c_arr / kappa_conj,
    )


class BrownianRegime(str, Enum):
    """Closed-form regimes of the Brownian-oscillator bath."""

    KRAMERS = "kramers"
    UNDERDAMPED = "underdamped"
    SMOLUCHOWSKI = "smoluchowski"


def brownian_ikeda_modes(
    c0: float, omega0: float, gamma0: float, beta: float, regime: BrownianRegime
) -> IkedaModes:
    """
    Two- or one-mode Ikeda sets for the Brownian density
    J(ω) = 2c0²γ0ω/((ω² − ω0²)² + 4γ0²ω²).

    kramers: classical (high-temperature) position correlation with the exact
        imaginary part; E = i[[0, ω0], [−ω0, −2γ0]].
    underdamped: ω0 > γ0, narrow-line real part with coth(βζ/2) weight and the
        exact imaginary part, ζ = √(ω0² − γ0²).
    smoluchowski: overdamped high-temperature limit, one mode of rate ω0²/2γ0.

    Raises:
        SchemaError: If the regime's parameter conditions do not hold
    """
    regime = BrownianRegime(regime)
    if regime == BrownianRegime.KRAMERS:
        if math.isinf(beta):
            raise SchemaError("kramers regime needs finite beta")
        e = 1j * np.array([[0.0, omega0], [-omega0, -2.0 * gamma0]])
        k1 = c0 / (omega0 * math.sqrt(2.0 * beta))
        return IkedaModes(
            E=e,
            kappa=np.array([k1, 0.0]),
            eta_re=np.array([k1, 0.0]),
            eta_im=np.array([0.0, -1j * c0 ** 2 / (4.0 * omega0 * k1)]),
        )
    if regime == BrownianRegime.UNDERDAMPED:
        if omega0 <= gamma0:
            raise SchemaError("underdamped regime needs omega0 > gamma0")
        zeta = math.sqrt(omega0 ** 2 - gamma0 ** 2)
        g2 = c0 ** 2 / (4.0 * zeta)
        weight = 1.0 if math.isinf(beta) else 1.0 / math.tanh(beta * zeta / 2.0)
        k1 = math.sqrt(g2 * weight)
        e = np.array([[-1j * gamma0, 1j * zeta], [-1j * zeta, -1j * gamma0]])
        return IkedaModes(
            E=e,
            kappa=np.array([k1, 0.0]),
            eta_re=np.array([k1, 0.0]),
            eta_im=np.array([0.0, -1j * g2 / k1]),
        )
    if math.isinf(beta):
        raise SchemaError("smoluchowski regime needs finite beta")
    if gamma0 <= omega0:
        raise SchemaError("smoluchowski regime needs gamma0 > omega0")
    rate = omega0 ** 2 / (2.0 * gamma0)
    k1 = c0 / (omega0 * math.sqrt(2.0 * beta))
    return IkedaModes(
        E=np.array([[-1j * rate]]),
        kappa=np.array([k1]),
        eta_re=np.array([k1]),
        eta_im=np.array([-1j * c0 ** 2 / (8.0 * gamma0 * k1)]),
    )
