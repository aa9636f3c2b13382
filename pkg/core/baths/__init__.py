#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Bath Models Module

Spectral densities J(ω), thermal noise power S_β(ω) = J(ω)/(1 − e^{−βω}) and
bath correlation functions C(t) = (1/2π) ∫ S_β(ω) e^{−iωt} dω.

The lorentzian-sum kind is the exception: its S_β is the narrow-line sum
Σ 2γg²[(n + 1)L(ω − ω_k) + n L(ω + ω_k)], L(x) = 1/(x² + γ²), n = n_β(ω_k),
and J is its odd part S_β(ω) − S_β(−ω).

Zero temperature is represented by ``beta = math.inf``.

Author: messkit developers
"""

import logging
import math
import threading
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy.interpolate import PchipInterpolator
from scipy.special import exp1

from core.utils import AccuracyError, DomainError, SchemaError

# Setup logger
logger = logging.getLogger("core.baths")

BETA_INF = math.inf

# |βω| below which the Bose factor is evaluated by its series
BOSE_SERIES_THRESHOLD = 1e-4

ArrayLike = Union[float, np.ndarray]


class DensityKind(str, Enum):
    """Builtin spectral density families."""

    OHMIC = "ohmic-exponential"
    SUBOHMIC = "subohmic-powerlaw"
    BROWNIAN = "brownian"
    LORENTZIAN = "lorentzian-sum"
    TABULATED = "tabulated"


class Evaluation(str, Enum):
    """How a correlation function is evaluated."""

    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"


class LorentzianTerm(BaseModel):
    """One line of a Lorentzian-sum density."""

    model_config = ConfigDict(frozen=True)

    g: float
    omega: float
    gamma: float = Field(gt=0.0)


def bose_occupation(omega: ArrayLike, beta: float) -> ArrayLike:
    """Bose-Einstein occupation 1/(e^{βω} − 1); zero at β = ∞."""
    if math.isinf(beta):
        return np.zeros_like(np.asarray(omega, dtype=float)) if np.ndim(omega) else 0.0
    return 1.0 / np.expm1(beta * np.asarray(omega, dtype=float))


class SpectralDensity(BaseModel):
    """
    Antisymmetric spectral density J(ω).

    The positive-frequency branch is evaluated on |ω| and the sign is applied
    afterwards, so J(−ω) = −J(ω) holds exactly.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: DensityKind
    alpha: float = 0.0
    s: float = 1.0
    omega_c: float = 1.0
    c0: float = 0.0
    omega0: float = 0.0
    gamma0: float = 0.0
    terms: Tuple[LorentzianTerm, ...] = ()
    table_omega: Optional[np.ndarray] = None
    table_values: Optional[np.ndarray] = None

    _interpolant: Optional[PchipInterpolator] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_parameters(self) -> "SpectralDensity":
        if self.kind in (DensityKind.OHMIC, DensityKind.SUBOHMIC):
            if self.alpha < 0:
                raise ValueError("alpha must be non-negative")
            if self.s <= 0:
                raise ValueError("exponent s must be positive")
            if self.omega_c <= 0:
                raise ValueError("cutoff omega_c must be positive")
        elif self.kind == DensityKind.BROWNIAN:
            if self.omega0 <= 0 or self.gamma0 <= 0:
                raise ValueError("brownian density needs omega0 > 0 and gamma0 > 0")
        elif self.kind == DensityKind.LORENTZIAN:
            if not self.terms:
                raise ValueError("lorentzian-sum density needs at least one term")
        elif self.kind == DensityKind.TABULATED:
            if self.table_omega is None or self.table_values is None:
                raise ValueError("tabulated density needs omega and J samples")
            w = np.asarray(self.table_omega, dtype=float)
            j = np.asarray(self.table_values, dtype=float)
            if w.ndim != 1 or w.shape != j.shape or w.size < 2:
                raise ValueError("tabulated samples must be two equal 1-D arrays of length >= 2")
            if np.any(np.diff(w) <= 0):
                raise ValueError("tabulated grid must be strictly increasing")
            if w[0] < 0:
                raise ValueError("tabulated grid must start at omega >= 0")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(j))):
                raise ValueError("tabulated samples must be finite")
        return self

    def model_post_init(self, __context) -> None:
        if self.kind == DensityKind.TABULATED:
            self._interpolant = PchipInterpolator(
                np.asarray(self.table_omega, dtype=float),
                np.asarray(self.table_values, dtype=float),
                extrapolate=False,
            )

    # Constructors

    @classmethod
    def ohmic(cls, alpha: float, omega_c: float) -> "SpectralDensity":
        return cls(kind=DensityKind.OHMIC, alpha=alpha, s=1.0, omega_c=omega_c)

    @classmethod
    def subohmic(cls, alpha: float, s: float, omega_c: float) -> "SpectralDensity":
        return cls(kind=DensityKind.SUBOHMIC, alpha=alpha, s=s, omega_c=omega_c)

    @classmethod
    def brownian(cls, c0: float, omega0: float, gamma0: float) -> "SpectralDensity":
        return cls(kind=DensityKind.BROWNIAN, c0=c0, omega0=omega0, gamma0=gamma0)

    @classmethod
    def lorentzian(cls, terms: List[Tuple[float, float, float]]) -> "SpectralDensity":
        """Build from (g, ω_k, γ_k) triples."""
        return cls(
            kind=DensityKind.LORENTZIAN,
            terms=tuple(LorentzianTerm(g=g, omega=w, gamma=gm) for g, w, gm in terms),
        )

    @classmethod
    def tabulated(cls, omega: np.ndarray, values: np.ndarray) -> "SpectralDensity":
        return cls(
            kind=DensityKind.TABULATED,
            table_omega=np.asarray(omega, dtype=float),
            table_values=np.asarray(values, dtype=float),
        )

    # Evaluation

    def _positive_branch(self, w: np.ndarray) -> np.ndarray:
        """J on w >= 0."""
        if self.kind in (DensityKind.OHMIC, DensityKind.SUBOHMIC):
            return (
                0.5 * math.pi * self.alpha * w ** self.s
                * self.omega_c ** (1.0 - self.s) * np.exp(-w / self.omega_c)
            )
        if self.kind == DensityKind.BROWNIAN:
            return self.over_omega(w) * w
        if self.kind == DensityKind.LORENTZIAN:
            # odd part of the line sum; the Bose weights cancel
            out = np.zeros_like(w)
            for t in self.terms:
                out += 2.0 * t.gamma * t.g ** 2 * (
                    1.0 / ((w - t.omega) ** 2 + t.gamma ** 2)
                    - 1.0 / ((w + t.omega) ** 2 + t.gamma ** 2)
                )
            return out
        self._check_table_range(w)
        values = self._interpolant(w)
        return np.where(w == 0.0, 0.0, values)

    def _check_table_range(self, w: np.ndarray) -> None:
        lo, hi = float(self.table_omega[0]), float(self.table_omega[-1])
        inside = (w == 0.0) | ((w >= lo) & (w <= hi))
        if not np.all(inside):
            bad = w[~inside]
            raise DomainError(
                "frequency outside tabulated range",
                {"omega": float(bad.flat[0]), "range": (lo, hi)},
            )

    def evaluate(self, omega: ArrayLike) -> ArrayLike:
        """
        Evaluate J(ω).

        Args:
            omega: Frequency or array of frequencies

        Returns:
            J(ω) with the shape of ``omega``

        Raises:
            DomainError: If ω lies outside a tabulated range
        """
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        value = np.sign(w) * self._positive_branch(np.abs(w))
        return float(value.ravel()[0]) if np.ndim(omega) == 0 else value

    __call__ = evaluate

    def over_omega(self, omega: ArrayLike) -> ArrayLike:
        """J(ω)/ω, an even function with a finite limit at 0 where one exists."""
        w = np.abs(np.atleast_1d(np.asarray(omega, dtype=float)))
        if self.kind in (DensityKind.OHMIC, DensityKind.SUBOHMIC):
            with np.errstate(divide="ignore"):
                value = (
                    0.5 * math.pi * self.alpha * w ** (self.s - 1.0)
                    * self.omega_c ** (1.0 - self.s) * np.exp(-w / self.omega_c)
                )
        elif self.kind == DensityKind.BROWNIAN:
            value = 2.0 * self.c0 ** 2 * self.gamma0 / (
                (w ** 2 - self.omega0 ** 2) ** 2 + 4.0 * self.gamma0 ** 2 * w ** 2
            )
        elif self.kind == DensityKind.LORENTZIAN:
            value = np.zeros_like(w)
            for t in self.terms:
                value += 2.0 * t.gamma * t.g ** 2 * 4.0 * t.omega / (
                    ((w - t.omega) ** 2 + t.gamma ** 2) * ((w + t.omega) ** 2 + t.gamma ** 2)
                )
        else:
            self._check_table_range(w)
            safe = np.where(w == 0.0, float(self.table_omega[-1]), w)
            value = self._interpolant(safe) / safe
            if np.any(w == 0.0):
                slope = self._interpolant.derivative()(float(self.table_omega[0]))
                value = np.where(w == 0.0, slope, value)
        return float(value.ravel()[0]) if np.ndim(omega) == 0 else value

    def frequency_scale(self) -> float:
        """Characteristic frequency used to lay out quadrature panels."""
        if self.kind in (DensityKind.OHMIC, DensityKind.SUBOHMIC):
            return self.omega_c
        if self.kind == DensityKind.BROWNIAN:
            return max(self.omega0, self.gamma0)
        if self.kind == DensityKind.LORENTZIAN:
            return max(max(abs(t.omega), t.gamma) for t in self.terms)
        return float(self.table_omega[-1])

    def support_limit(self, tol: float) -> float:
        """Upper frequency beyond which the remaining weight is below ``tol`` (relative)."""
        tol = min(max(tol, 1e-300), 0.5)
        if self.kind in (DensityKind.OHMIC, DensityKind.SUBOHMIC):
            return self.omega_c * (-math.log(tol) + 20.0 + 3.0 * self.s)
        if self.kind == DensityKind.TABULATED:
            return float(self.table_omega[-1])
        if self.kind == DensityKind.LORENTZIAN:
            # the ω^{-2} tails beyond this edge are added in closed form
            return 1e3 * self.frequency_scale()
        # algebraic ω^{-3} tails
        return self.frequency_scale() * max(10.0, 10.0 * tol ** -0.5)


def load_tabulated_density(path: str) -> SpectralDensity:
    """
    Load a tabulated spectral density from two-column delimited text.

    Lines starting with '#' are comments. Columns are ω and J(ω), separated by
    commas or whitespace.

    Raises:
        SchemaError: If the file does not contain two numeric columns
    """
    logger.info(f"Loading tabulated spectral density: {path}")
    frame = pd.read_csv(path, comment="#", header=None, sep=r"[,\s]+", engine="python")
    frame = frame.dropna(axis=1, how="all")
    if frame.shape[1] != 2:
        raise SchemaError("tabulated density needs exactly two columns", {"path": path})
    try:
        omega = frame.iloc[:, 0].to_numpy(dtype=float)
        values = frame.iloc[:, 1].to_numpy(dtype=float)
    except ValueError as e:
        raise SchemaError(f"non-numeric entry in tabulated density: {e}", {"path": path})
    try:
        return SpectralDensity.tabulated(omega, values)
    except ValueError as e:
        raise SchemaError(str(e), {"path": path})


class NoisePower(BaseModel):
    """Thermal noise power S_β(ω) = J(ω)/(1 − e^{−βω})."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    density: SpectralDensity
    beta: float = BETA_INF

    @field_validator("beta")
    @classmethod
    def _check_beta(cls, value: float) -> float:
        if math.isnan(value) or value <= 0:
            raise ValueError("beta must be positive or infinite")
        return value

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    @property
    def two_sided(self) -> bool:
        """True if S_β carries weight at negative frequencies."""
        return not self.zero_temperature or self.density.kind == DensityKind.LORENTZIAN

    def _lorentzian_lines(self, w: np.ndarray) -> np.ndarray:
        value = np.zeros_like(w)
        for t in self.density.terms:
            n = bose_occupation(t.omega, self.beta)
            value += 2.0 * t.gamma * t.g ** 2 * (
                (n + 1.0) / ((w - t.omega) ** 2 + t.gamma ** 2)
                + n / ((w + t.omega) ** 2 + t.gamma ** 2)
            )
        return value

    def evaluate(self, omega: ArrayLike) -> ArrayLike:
        """
        Evaluate S_β(ω).

        At β = ∞ this is θ(ω)J(ω). Near ω = 0 the Bose factor is replaced by its
        series 1 + x/2 + x²/12 − x⁴/720 in x = βω. Lorentzian sums are
        evaluated line by line and do not obey detailed balance exactly.
        """
        w = np.atleast_1d(np.asarray(omega, dtype=float)).ravel()
        value = np.zeros_like(w)
        if self.density.kind == DensityKind.LORENTZIAN:
            value = self._lorentzian_lines(w)
        elif self.zero_temperature:
            positive = w > 0
            value[positive] = self.density.evaluate(w[positive])
        else:
            x = self.beta * w
            small = np.abs(x) < BOSE_SERIES_THRESHOLD
            xs = x[small]
            series = 1.0 + xs / 2.0 + xs ** 2 / 12.0 - xs ** 4 / 720.0
            value[small] = self.density.over_omega(w[small]) / self.beta * series
            with np.errstate(over="ignore"):
                value[~small] = self.density.evaluate(w[~small]) / (-np.expm1(-x[~small]))
        if np.ndim(omega) == 0:
            return float(value[0])
        return value.reshape(np.shape(omega))

    __call__ = evaluate


# Quadrature

_GAUSS_CACHE: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cached Gauss–Legendre nodes and weights on [−1, 1]."""
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GAUSS_CACHE[n]


def panel_rule(a: np.ndarray, b: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an n-point Gauss rule on each panel [a_i, b_i]."""
    x, w = gauss_legendre(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid[:, None] + half[:, None] * x[None, :], half[:, None] * w[None, :]


class FrequencyGrid(BaseModel):
    """Composite quadrature grid for the frequency integral of C(t)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    error_estimate: float
    t_cover: float
    edges: Tuple[float, float] = (0.0, 0.0)

    @property
    def spectral_weights(self) -> np.ndarray:
        """w_i S(ω_i)/2π."""
        return self.weights * self.values / (2.0 * math.pi)


def _power_tail(noise: NoisePower, edge: float) -> float:
    """∫ beyond |edge| estimated from a local power law S ~ |ω|^{-p}."""
    s_edge = abs(float(noise.evaluate(edge)))
    if s_edge == 0.0:
        return 0.0
    s_half = abs(float(noise.evaluate(edge / 2.0)))
    if s_half <= s_edge:
        return math.inf
    p = math.log2(s_half / s_edge)
    if p <= 1.0:
        return math.inf
    return s_edge * abs(edge) / (p - 1.0)


def build_frequency_grid(
    noise: NoisePower,
    t_cover: float,
    tol: float = 1e-8,
    nodes_per_panel: int = 32,
    max_depth: int = 40,
) -> FrequencyGrid:
    """
    Build an adaptive composite Gauss–Legendre grid for S_β.

    Panels start from logarithmic refinement towards ω = 0 and geometric
    panels up to the support limit. Each panel is bisected until the n-point
    rule and the two-half rule agree for the integrands S, S·cos(ωT) and
    S·sin(ωT) with T = ``t_cover``.

    Args:
        noise: Noise power to integrate
        t_cover: Largest |t| the grid has to resolve
        tol: Relative target accuracy
        nodes_per_panel: Gauss nodes per panel
        max_depth: Bisection levels before a panel is accepted as unresolved

    Returns:
        FrequencyGrid with the accumulated error estimate (absolute, in units of C)
    """
    density = noise.density
    scale = density.frequency_scale()
    upper = density.support_limit(tol)

    if density.kind == DensityKind.TABULATED:
        # the table defines the support; no extrapolation below its first knot
        positive = np.asarray(density.table_omega, dtype=float)
        lower = upper
    else:
        log_part = scale * 2.0 ** np.arange(-50, 0, dtype=float)
        n_geo = max(1, int(math.ceil(math.log2(max(upper / scale, 2.0)))))
        geo_part = scale * 2.0 ** np.arange(0, n_geo + 1, dtype=float)
        geo_part = geo_part[geo_part < upper]
        positive = np.concatenate([[0.0], log_part, geo_part, [upper]])
        lower = upper
        if not noise.zero_temperature and density.kind != DensityKind.LORENTZIAN:
            lower = min(upper, 2.0 * scale + (-math.log(max(tol, 1e-300)) + 40.0) / noise.beta)

    pos_a, pos_b = positive[:-1], positive[1:]
    if not noise.two_sided:
        a, b = pos_a, pos_b
    else:
        neg = positive[positive <= lower]
        if neg[-1] < lower:
            neg = np.concatenate([neg, [lower]])
        neg_a, neg_b = -neg[1:][::-1], -neg[:-1][::-1]
        a = np.concatenate([neg_a, pos_a])
        b = np.concatenate([neg_b, pos_b])

    total_length = float(b[-1] - a[0])

    def panel_integrals(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
        nodes, weights = panel_rule(pa, pb, nodes_per_panel)
        s = noise.evaluate(nodes.ravel()).reshape(nodes.shape)
        phase = nodes * t_cover
        stacked = np.stack([s, s * np.cos(phase), s * np.sin(phase)], axis=-1)
        return np.einsum("pn,pnk->pk", weights, stacked)

    coarse = panel_integrals(a, b)
    mass = max(float(np.sum(coarse[:, 0])), 1e-300)
    abs_tol = tol * mass

    acc_a: List[np.ndarray] = []
    acc_b: List[np.ndarray] = []
    error = 0.0
    for depth in range(max_depth + 1):
        if a.size == 0:
            break
        mid = 0.5 * (a + b)
        whole = panel_integrals(a, b)
        halves = panel_integrals(a, mid) + panel_integrals(mid, b)
        err = np.max(np.abs(whole - halves), axis=1)
        ok = (err <= abs_tol * (b - a) / total_length) | (err <= 1e-14 * np.abs(whole[:, 0]))
        if depth == max_depth:
            ok[:] = True
        error += float(np.sum(err[ok]))
        acc_a.extend([a[ok], mid[ok]])
        acc_b.extend([mid[ok], b[ok]])
        a, b = np.concatenate([a[~ok], mid[~ok]]), np.concatenate([mid[~ok], b[~ok]])

    fa = np.concatenate(acc_a)
    fb = np.concatenate(acc_b)
    order = np.argsort(fa)
    nodes, weights = panel_rule(fa[order], fb[order], nodes_per_panel)
    nodes, weights = nodes.ravel(), weights.ravel()
    values = noise.evaluate(nodes)

    tail = 0.0
    if density.kind not in (DensityKind.TABULATED, DensityKind.LORENTZIAN):
        tail += _power_tail(noise, upper)
        if noise.two_sided:
            tail += _power_tail(noise, -lower)

    estimate = (error + tail) / (2.0 * math.pi)
    logger.debug(
        f"Frequency grid: {fa.size} panels, {nodes.size} nodes, "
        f"error estimate {estimate:.3e}, t_cover {t_cover}"
    )
    return FrequencyGrid(
        nodes=nodes,
        weights=weights,
        values=values,
        error_estimate=estimate,
        t_cover=t_cover,
        edges=(float(fa.min()), float(fb.max())),
    )


def lorentzian_tails(noise: NoisePower, t: np.ndarray, lower: float, upper: float) -> np.ndarray:
    """
    (1/2π) ∫ S_β(ω) e^{−iωt} dω over ω < −lower and ω > upper for a Lorentzian sum, t ≥ 0.

    Each line 2γ/((ω − a)² + γ²) = i/(ω − a + iγ) − i/(ω − a − iγ) integrates to
    exponential integrals: ∫_U^∞ e^{−iωt}/(ω − c) dω = e^{−ict} E1(it(U − c)) and
    ∫_{−∞}^{−L} e^{−iωt}/(ω − c) dω = −e^{−ict} E1(−it(L + c)).
    """
    shape = np.shape(t)
    t = np.asarray(t, dtype=float).ravel()
    out = np.zeros(t.shape, dtype=complex)
    positive = t > 0
    tp = t[positive]
    for term in noise.density.terms:
        n = float(bose_occupation(term.omega, noise.beta))
        for weight, a in ((n + 1.0, term.omega), (n, -term.omega)):
            if weight == 0.0:
                continue
            amplitude = weight * term.g ** 2
            mass = (
                2.0 * math.pi
                - 2.0 * math.atan((upper - a) / term.gamma)
                - 2.0 * math.atan((lower + a) / term.gamma)
            )
            out[~positive] += amplitude * mass
            part = np.zeros(tp.shape, dtype=complex)
            for sign, c in ((1.0, complex(a, -term.gamma)), (-1.0, complex(a, term.gamma))):
                phase = np.exp(-1j * c * tp)
                right = phase * exp1(1j * tp * (upper - c))
                left = -phase * exp1(-1j * tp * (lower + c))
                part += sign * 1j * (right + left)
            out[positive] += amplitude * part
    return (out / (2.0 * math.pi)).reshape(shape)


class CorrelationFunction(BaseModel):
    """
    Bath correlation function C(t).

    ``closed-form`` is available for Lorentzian sums (narrow-line form with
    Bose weights) and for the Brownian density in the high-temperature limit
    (``high_temperature=True``). Everything else is evaluated by quadrature
    of S_β on an adaptive frequency grid. C(−t) = C*(t) is imposed by
    evaluating |t| and conjugating.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: NoisePower
    evaluation: Optional[Evaluation] = None
    high_temperature: bool = False
    tail_tol: float = Field(default=1e-8, gt=0.0)
    nodes_per_panel: int = Field(default=32, ge=4)
    chunk_size: int = Field(default=256, ge=1)

    _grids: Dict[float, FrequencyGrid] = PrivateAttr(default_factory=dict)
    _lock: threading.Lock = PrivateAttr(default_factory=threading.Lock)
    _samples: Dict[Tuple[float, float, int], np.ndarray] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _resolve_evaluation(self) -> "CorrelationFunction":
        kind = self.source.density.kind
        closed = kind == DensityKind.LORENTZIAN or (
            kind == DensityKind.BROWNIAN and self.high_temperature
        )
        if self.evaluation is None:
            object.__setattr__(
                self, "evaluation", Evaluation.CLOSED_FORM if closed else Evaluation.QUADRATURE
            )
        elif self.evaluation == Evaluation.CLOSED_FORM and not closed:
            raise ValueError(f"no closed form available for {kind.value}")
        if kind == DensityKind.BROWNIAN and self.high_temperature:
            d = self.source.density
            if self.source.zero_temperature:
                raise ValueError("high-temperature brownian form needs finite beta")
            if d.omega0 <= d.gamma0:
                raise ValueError("high-temperature brownian form needs omega0 > gamma0")
        return self

    def refine(self, factor: int = 2) -> "CorrelationFunction":
        """Copy with ``factor`` times more nodes per panel and a tighter tail tolerance."""
        return CorrelationFunction(
            source=self.source,
            evaluation=self.evaluation,
            high_temperature=self.high_temperature,
            tail_tol=self.tail_tol / factor,
            nodes_per_panel=self.nodes_per_panel * factor,
            chunk_size=self.chunk_size,
        )

    def grid(self, t_max: float) -> FrequencyGrid:
        """Quadrature grid resolving |t| ≤ t_max (cached in powers of two)."""
        t_cover = 2.0 ** math.ceil(math.log2(max(float(t_max), 1.0)))
        with self._lock:
            cached = self._grids.get(t_cover)
        if cached is not None:
            return cached
        grid = build_frequency_grid(
            self.source, t_cover, tol=self.tail_tol, nodes_per_panel=self.nodes_per_panel
        )
        with self._lock:
            self._grids[t_cover] = grid
        return grid

    def _closed_form(self, t: np.ndarray) -> np.ndarray:
        density = self.source.density
        if density.kind == DensityKind.LORENTZIAN:
            out = np.zeros(t.shape, dtype=complex)
            for term in density.terms:
                n = bose_occupation(term.omega, self.source.beta)
                out += term.g ** 2 * np.exp(-term.gamma * t) * (
                    (n + 1.0) * np.exp(-1j * term.omega * t) + n * np.exp(1j * term.omega * t)
                )
            return out
        c0, w0, g0 = density.c0, density.omega0, density.gamma0
        zeta = math.sqrt(w0 ** 2 - g0 ** 2)
        decay = np.exp(-g0 * t)
        phi_q = decay * (np.cos(zeta * t) + g0 / zeta * np.sin(zeta * t))
        phi_p = -(w0 / zeta) * decay * np.sin(zeta * t)
        return c0 ** 2 / (2.0 * self.source.beta * w0 ** 2) * phi_q + 1j * c0 ** 2 / (4.0 * w0) * phi_p

    def _quadrature(self, t: np.ndarray) -> np.ndarray:
        grid = self.grid(float(np.max(t)) if t.size else 0.0)
        c0 = float(np.sum(grid.spectral_weights))
        if grid.error_estimate > self.tail_tol * max(abs(c0), 1e-300):
            raise AccuracyError(
                "correlation quadrature did not reach tolerance",
                {"estimate": grid.error_estimate, "tolerance": self.tail_tol * abs(c0)},
            )
        sw = grid.spectral_weights
        out = np.empty(t.shape, dtype=complex)
        flat_t = t.ravel()
        flat_out = out.reshape(-1)
        for start in range(0, flat_t.size, self.chunk_size):
            block = flat_t[start:start + self.chunk_size]
            flat_out[start:start + block.size] = np.exp(-1j * np.outer(block, grid.nodes)) @ sw
        if self.source.density.kind == DensityKind.LORENTZIAN:
            out += lorentzian_tails(self.source, t, -grid.edges[0], grid.edges[1])
        return out

    def evaluate(self, t: ArrayLike) -> Union[complex, np.ndarray]:
        """
        Evaluate C(t).

        Raises:
            AccuracyError: If the quadrature error estimate exceeds the tolerance
        """
        times = np.asarray(t, dtype=float)
        magnitude = np.abs(times)
        if self.evaluation == Evaluation.CLOSED_FORM:
            value = self._closed_form(magnitude)
        else:
            value = self._quadrature(magnitude)
        value = np.where(times < 0, np.conj(value), value)
        return complex(value) if np.ndim(t) == 0 else value

    __call__ = evaluate

    @property
    def c0(self) -> float:
        """C(0), real for any thermal bath."""
        return float(np.real(self.evaluate(0.0)))

    @property
    def error_estimate(self) -> float:
        """Absolute quadrature error estimate (0 for closed forms)."""
        if self.evaluation == Evaluation.CLOSED_FORM:
            return 0.0
        return self.grid(1.0).error_estimate

    def samples(self, t_start: float, t_stop: float, n: int) -> np.ndarray:
        """C on ``np.linspace(t_start, t_stop, n)``, cached."""
        key = (float(t_start), float(t_stop), int(n))
        with self._lock:
            cached = self._samples.get(key)
        if cached is None:
            cached = np.asarray(self.evaluate(np.linspace(t_start, t_stop, n)))
            with self._lock:
                self._samples[key] = cached
        return cached

    def decay_time(self, threshold: float = 1e-3, t_limit: float = 1e4) -> float:
        """
        Time after which |C(t)| stays below ``threshold``·C(0).

        Scans a geometric grid; returns ``t_limit`` if the decay is not reached.
        """
        c0 = abs(self.c0)
        if c0 == 0.0:
            return 0.0
        scale = self.source.density.frequency_scale()
        t = min(0.1 / scale, t_limit)
        while t < t_limit:
            window = np.linspace(t, 2.0 * t, 64)
            if np.max(np.abs(self.evaluate(window))) < threshold * c0:
                tail = np.linspace(2.0 * t, 4.0 * t, 64)
                if np.max(np.abs(self.evaluate(tail))) < threshold * c0:
                    return t
            t *= 2.0
        logger.warning(f"Correlation function did not decay below {threshold} C(0) by t={t_limit}")
        return t_limit


def eval_spectral_density(density: SpectralDensity, omega: ArrayLike) -> ArrayLike:
    """Evaluate J(ω)."""
    return density.evaluate(omega)


def eval_noise_power(noise: NoisePower, omega: ArrayLike) -> ArrayLike:
    """Evaluate S_β(ω)."""
    return noise.evaluate(omega)


def eval_correlation(correlation: CorrelationFunction, t: ArrayLike) -> Union[complex, np.ndarray]:
    """Evaluate C(t)."""
    return correlation.evaluate(t)


__all__ = [
    "BETA_INF",
    "CorrelationFunction",
    "DensityKind",
    "Evaluation",
    "FrequencyGrid",
    "LorentzianTerm",
    "NoisePower",
    "SpectralDensity",
    "bose_occupation",
    "build_frequency_grid",
    "eval_correlation",
    "eval_noise_power",
    "eval_spectral_density",
    "gauss_legendre",
    "load_tabulated_density",
    "panel_rule",
]
