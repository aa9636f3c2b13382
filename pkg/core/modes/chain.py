#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Chain mapping of a bath and chain closure

The bath measure dμ(ω) = S_β(ω)dω/(2π g_0²) is turned into recurrence
coefficients of orthonormal polynomials in x = ω^l (l = 1 or 2) by the
Stieltjes procedure on a discretized measure. The chain is closed by a
terminal self-energy and the continued fraction
G_nn(ω) = 1/(ω^l − ω_n^l − g_{n+1}² G_{n+1,n+1}(ω)).

Author: messkit developers
"""

import logging
import math
from enum import Enum
from typing import Callable, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import quad

from core.baths import CorrelationFunction, NoisePower
from core.modes.modeset import EffectiveModeSet, Topology
from core.utils import ConditioningError, PreconditionError, SchemaError

# Setup logger
logger = logging.getLogger("core.modes")

ORTHOGONALITY_TOL = 1e-8
GREEN_BOUND = 1e12
FLAG_TRUNCATED = "chain-truncated"


class ChainCoefficients(BaseModel):
    """
    Recurrence coefficients of a chain.

    Attributes:
        l: Power of ω used as polynomial variable
        site_energies: ω_n^l for n = 0..K−1
        hoppings: [g_0, g_1, ..., g_{K−1}], g_0 = √C(0)
        nodes: Measure nodes ω_i (diagnostics only)
        measure: Normalized measure weights μ_i (diagnostics only)
        flags: Non-empty if orthogonality was lost before K
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    l: int = Field(ge=1, le=2)
    site_energies: np.ndarray
    hoppings: np.ndarray
    nodes: Optional[np.ndarray] = None
    measure: Optional[np.ndarray] = None
    orthogonality_error: float = 0.0
    flags: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "ChainCoefficients":
        if self.site_energies.size != self.hoppings.size or self.site_energies.size == 0:
            raise ValueError("site energies and hoppings must have the same positive length")
        if np.any(self.hoppings[1:] <= 0):
            raise ValueError("hoppings g_n (n >= 1) must be positive")
        return self

    @property
    def length(self) -> int:
        return int(self.site_energies.size)

    def polynomials(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal p_n(x) for n = 0..K−1, shape (K, len(x))."""
        k = self.length
        p = np.zeros((k, x.size))
        p[0] = 1.0
        if k > 1:
            p[1] = (x - self.site_energies[0]) / self.hoppings[1]
        for n in range(1, k - 1):
            p[n + 1] = (
                (x - self.site_energies[n]) * p[n] - self.hoppings[n] * p[n - 1]
            ) / self.hoppings[n + 1]
        return p

    def krylov_functions(self, t) -> np.ndarray:
        """
        𝒦_n(t) = ∫dμ(ω) p_n(ω^l) e^{−iωt}, shape (K, len(t)).

        Raises:
            PreconditionError: If the measure was not retained
        """
        if self.nodes is None or self.measure is None:
            raise PreconditionError("Krylov functions need the discretized measure")
        times = np.atleast_1d(np.asarray(t, dtype=float))
        p = self.polynomials(self.nodes ** self.l)
        phases = np.exp(-1j * np.outer(self.nodes, times))
        return (p * self.measure[None, :]) @ phases

    def krylov_boundary_error(self) -> float:
        """max_n |𝒦_n(0) − δ_{n0}|."""
        k0 = self.krylov_functions(0.0)[:, 0]
        target = np.zeros(self.length)
        target[0] = 1.0
        return float(np.max(np.abs(k0 - target)))


def chain_map_measure(
    nodes: np.ndarray,
    weights: np.ndarray,
    K: int,
    l: int = 1,
    g0: float = 1.0,
    tol: float = ORTHOGONALITY_TOL,
) -> ChainCoefficients:
    """
    Stieltjes procedure on a discrete measure Σ_i μ_i δ(ω − ω_i).

    Args:
        nodes: Measure nodes ω_i
        weights: Non-negative weights (normalized internally)
        K: Requested chain length
        l: Polynomial variable x = ω^l
        g0: System coupling g_0 stored as the first hopping
        tol: Orthogonality loss that truncates the chain

    Returns:
        ChainCoefficients; flagged if truncated before K
    """
    if K < 1:
        raise SchemaError("chain length must be at least 1", {"K": K})
    if l not in (1, 2):
        raise SchemaError("chain power must be 1 or 2", {"l": l})
    w = np.asarray(weights, dtype=float)
    omega = np.asarray(nodes, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise SchemaError("measure weights must be non-negative with positive mass")
    mu = w / w.sum()
    x = omega ** l

    energies = []
    hoppings = [g0]
    basis = [np.ones_like(x)]
    prev = np.zeros_like(x)
    flags: Tuple[str, ...] = ()
    error = 0.0
    for n in range(K):
        p = basis[-1]
        a_n = float(np.sum(mu * x * p * p))
        energies.append(a_n)
        if n == K - 1:
            break
        b_prev = hoppings[-1] if n > 0 else 0.0
        r = (x - a_n) * p - b_prev * prev
        norm = math.sqrt(float(np.sum(mu * r * r)))
        if norm == 0.0:
            flags = (FLAG_TRUNCATED,)
            logger.warning(f"Chain map terminated at length {n + 1}: measure exhausted")
            break
        q = r / norm
        overlaps = np.array([np.sum(mu * q * b) for b in basis])
        error = max(error, float(np.max(np.abs(overlaps))))
        if error > tol:
            flags = (FLAG_TRUNCATED,)
            logger.warning(
                f"Chain map lost orthogonality at n={n + 1} ({error:.2e}); truncating"
            )
            break
        hoppings.append(norm)
        prev = p
        basis.append(q)

    length = len(energies)
    return ChainCoefficients(
        l=l,
        site_energies=np.array(energies),
        hoppings=np.array(hoppings[:length]),
        nodes=omega,
        measure=mu,
        orthogonality_error=error,
        flags=flags,
    )


def chain_map(
    noise: NoisePower,
    K: int,
    l: int = 1,
    tail_tol: float = 1e-10,
    tol: float = ORTHOGONALITY_TOL,
) -> ChainCoefficients:
    """
    Chain coefficients of a thermal bath.

    The measure is discretized on the adaptive quadrature grid of C(t) with at
    least 4K nodes per panel.
    """
    correlation = CorrelationFunction(
        source=noise,
        evaluation="quadrature",
        tail_tol=tail_tol,
        nodes_per_panel=max(32, 4 * K),
    )
    grid = correlation.grid(1.0)
    mass = np.clip(grid.weights * grid.values, 0.0, None) / (2.0 * math.pi)
    g0 = math.sqrt(float(mass.sum()))
    coeffs = chain_map_measure(grid.nodes, mass, K, l=l, g0=g0, tol=tol)
    logger.info(f"Chain map: requested K={K}, achieved {coeffs.length}, l={l}, g0={g0:.6g}")
    return coeffs


def chain_modeset(coeffs: ChainCoefficients, terminal_gamma: float = 0.0) -> EffectiveModeSet:
    """
    Tridiagonal mode set of an l = 1 chain; the last site may carry a
    wide-band damping −iγ.

    Raises:
        PreconditionError: For l ≠ 1
    """
    if coeffs.l != 1:
        raise PreconditionError("a chain mode set exists for l = 1 only")
    k = coeffs.length
    E = np.diag(coeffs.site_energies.astype(complex))
    for n in range(1, k):
        E[n - 1, n] = E[n, n - 1] = coeffs.hoppings[n]
    E[-1, -1] -= 1j * terminal_gamma
    head = np.zeros(k, dtype=complex)
    head[0] = coeffs.hoppings[0]
    return EffectiveModeSet(E=E, kappa=head, eta=head.copy(), topology=Topology.CHAIN)


class TerminalKind(str, Enum):
    WIDE_BAND = "wide-band"
    OHMIC = "ohmic-exponential"


class TerminalBathSpec(BaseModel):
    """
    Residual bath at the chain end.

    wide-band: constant S_K = γ, self-energy −iγ.
    ohmic-exponential: J_K(ω) = 2γωe^{−|ω|/Λ}. ``renormalize`` controls the real
        part: "static" subtracts Σ(0), "full" drops it (Markovian terminal),
        "none" keeps the bare principal value.
    """

    model_config = ConfigDict(frozen=True)

    kind: TerminalKind = TerminalKind.WIDE_BAND
    gamma: float = Field(default=0.0, ge=0.0)
    cutoff: float = Field(default=100.0, gt=0.0)
    renormalize: Literal["none", "static", "full"] = "static"

    def spectral_function(self, omega: float) -> float:
        if self.kind == TerminalKind.WIDE_BAND:
            return self.gamma
        return 2.0 * self.gamma * omega * math.exp(-abs(omega) / self.cutoff)

    def _hilbert(self, omega: float) -> float:
        """P(1/π)∫ S_K(ω′)/(ω − ω′) dω′."""
        if self.gamma == 0.0:
            return 0.0
        lim = 60.0 * self.cutoff
        f = lambda w: -2.0 * self.gamma * w * math.exp(-abs(w) / self.cutoff) / math.pi  # noqa: E731
        # quad's cauchy weight integrates f(w)/(w − ω)
        if -lim < omega < lim:
            value, _ = quad(f, -lim, lim, weight="cauchy", wvar=omega, limit=400)
        else:
            value, _ = quad(lambda w: f(w) / (w - omega), -lim, lim, limit=400)
        return value

    def self_energy(self, omega: float) -> complex:
        """Σ_K(ω) = (1/π)∫ S_K(ω′)/(ω − ω′ + i0) dω′."""
        if self.kind == TerminalKind.WIDE_BAND:
            return -1j * self.gamma
        if self.renormalize == "full":
            return complex(0.0, -self.spectral_function(omega))
        real = self._hilbert(omega)
        if self.renormalize == "static":
            real -= self._hilbert(0.0)
        return complex(real, -self.spectral_function(omega))


def chain_closure_spectrum(
    coeffs: ChainCoefficients, terminal: TerminalBathSpec
) -> Callable[[np.ndarray], np.ndarray]:
    """
    Effective spectrum −2g_0² Im G_00(ω) of a closed chain.

    Returns an evaluator of ω. For l = 1 this is S_β(ω); for l = 2 it is the
    antisymmetric J(ω).

    Raises:
        ConditioningError: (from the evaluator) if |G| exceeds the bound
    """
    energies = coeffs.site_energies
    hops = coeffs.hoppings
    k = coeffs.length
    g0 = float(hops[0])

    def evaluate(omega) -> np.ndarray:
        w_arr = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.empty(w_arr.size)
        for i, w in enumerate(w_arr.ravel()):
            x = w ** coeffs.l
            sigma = terminal.self_energy(w)
            g = 0.0j
            for n in range(k - 1, -1, -1):
                denom = x - energies[n] - sigma
                if abs(denom) * GREEN_BOUND < 1.0:
                    raise ConditioningError(
                        "chain continued fraction hit a pole", {"omega": float(w), "site": n}
                    )
                g = 1.0 / denom
                sigma = hops[n] ** 2 * g
            out[i] = -2.0 * g0 ** 2 * g.imag
        return float(out[0]) if np.ndim(omega) == 0 else out.reshape(np.shape(omega))

    return evaluate
