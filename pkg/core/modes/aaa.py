#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Barycentric rational approximation by the AAA greedy algorithm

Author: messkit developers
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict

from core.utils import SchemaError

# Setup logger
logger = logging.getLogger("core.modes")

DEFAULT_TOL = 1e-6
DEFAULT_M_MAX = 120
FLAG_TOL_NOT_REACHED = "aaa-tolerance-not-reached"
# residues below this (relative to max |S|) mark Froissart doublets
FROISSART_TOL = 1e-13


class BarycentricRational(BaseModel):
    """
    Rational function R(ω) = Σ θ_j f_j/(ω − ω_j) / Σ θ_j/(ω − ω_j).

    Attributes:
        support: Support points ω_j
        weights: Barycentric weights θ_j
        values: Interpolated values f_j = S(ω_j)
        max_error: Sup-norm error over the sample grid
        error_history: Best error after each greedy step (non-increasing)
        flags: Non-empty if the requested tolerance was not reached
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    support: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    max_error: float
    tolerance: float
    error_history: Tuple[float, ...] = ()
    sample_range: Tuple[float, float] = (0.0, 0.0)
    flags: Tuple[str, ...] = ()

    @property
    def order(self) -> int:
        """Number of support points m."""
        return int(self.support.size)

    @property
    def converged(self) -> bool:
        return FLAG_TOL_NOT_REACHED not in self.flags

    def evaluate(self, omega) -> np.ndarray:
        """Evaluate R at real or complex points; exact at support points."""
        z = np.atleast_1d(np.asarray(omega))
        diff = z[:, None] - self.support[None, :]
        at_node = diff == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            cauchy = 1.0 / diff
            value = (cauchy @ (self.weights * self.values)) / (cauchy @ self.weights)
        rows, cols = np.nonzero(at_node)
        value = np.asarray(value, dtype=complex)
        value[rows] = self.values[cols]
        if not np.iscomplexobj(omega) and np.isrealobj(self.values):
            if np.all(np.abs(value.imag) <= 1e-12 * np.maximum(1.0, np.abs(value.real))):
                value = value.real
        return value[0] if np.ndim(omega) == 0 else value.reshape(np.shape(omega))

    __call__ = evaluate

    def poles(self) -> np.ndarray:
        """Finite poles from the arrowhead generalized eigenvalue problem."""
        return barycentric_poles(self.support, self.weights)

    def residues(self, poles: np.ndarray) -> np.ndarray:
        """Residues N(p)/D′(p) at the given poles."""
        return barycentric_residues(poles, self.support, self.weights, self.values)


def barycentric_poles(support: np.ndarray, weights: np.ndarray) -> np.ndarray:
    m = support.size
    a = np.zeros((m + 1, m + 1), dtype=complex)
    a[0, 1:] = weights
    a[1:, 0] = 1.0
    a[1:, 1:] = np.diag(support)
    b = np.eye(m + 1, dtype=complex)
    b[0, 0] = 0.0
    eigenvalues = scipy.linalg.eigvals(a, b=b)
    # the two infinite eigenvalues may come back as huge finite numbers
    reach = 1e8 * max(1.0, float(np.max(np.abs(support))))
    finite = np.isfinite(eigenvalues)
    finite[finite] = np.abs(eigenvalues[finite]) < reach
    return eigenvalues[finite]


def barycentric_residues(
    poles: np.ndarray, support: np.ndarray, weights: np.ndarray, values: np.ndarray
) -> np.ndarray:
    diff = poles[:, None] - support[None, :]
    numerator = (1.0 / diff) @ (weights * values)
    derivative = -(1.0 / diff ** 2) @ weights
    return numerator / derivative


def loewner_weights(
    z: np.ndarray, f: np.ndarray, support: List[int]
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Weights from the Loewner SVD on the given support, plus the fitted values and sup error."""
    mask = np.ones(z.size, dtype=bool)
    mask[support] = False
    zj, fj = z[support], f[support]
    cauchy = 1.0 / (z[mask][:, None] - zj[None, :])
    loewner = (f[mask][:, None] - fj[None, :]) * cauchy
    _, _, vh = np.linalg.svd(loewner, full_matrices=False)
    weights = vh[-1].conj()
    approx = f.astype(complex).copy()
    approx[mask] = (cauchy @ (weights * fj)) / (cauchy @ weights)
    return weights, approx, float(np.max(np.abs(f - approx)))


def froissart_cleanup(
    z: np.ndarray, f: np.ndarray, support: List[int], weights: np.ndarray, scale: float
) -> Optional[Tuple[List[int], np.ndarray, float]]:
    """
    Remove spurious pole–zero pairs.

    Poles whose residue is below ``FROISSART_TOL * scale`` are taken as
    Froissart doublets; the support point nearest to each is dropped and the
    weights are recomputed by least squares on the remaining support. Repeats
    until no doublet is left.

    Returns:
        (support, weights, error) of the cleaned fit, or None if nothing was removed
    """
    kept = list(support)
    error = None
    while len(kept) > 1:
        zj, fj = z[kept], f[kept]
        poles = barycentric_poles(zj, weights)
        if poles.size == 0:
            break
        residues = barycentric_residues(poles, zj, weights, fj)
        spurious = poles[np.abs(residues) < FROISSART_TOL * scale]
        if spurious.size == 0:
            break
        drop = {int(np.argmin(np.abs(zj - p))) for p in spurious}
        if len(drop) >= len(kept):
            break
        kept = [j for i, j in enumerate(kept) if i not in drop]
        weights, _, error = loewner_weights(z, f, kept)
    if error is None:
        return None
    logger.info(f"AAA cleanup removed {len(support) - len(kept)} support point(s) next to spurious poles")
    return kept, weights, error


def aaa_fit(
    omega: np.ndarray,
    values: np.ndarray,
    tol: float = DEFAULT_TOL,
    m_max: int = DEFAULT_M_MAX,
) -> BarycentricRational:
    """
    Greedy AAA fit of samples S(ω_i).

    Each step adds the sample with the largest current error as a support
    point and takes the weights from the smallest right singular vector of the
    Loewner matrix over the remaining samples.

    Args:
        omega: Sample abscissae (at least 8, distinct, finite)
        values: Sample values
        tol: Relative sup-norm tolerance (relative to max |S|)
        m_max: Maximum number of support points

    Returns:
        BarycentricRational; flagged if ``tol`` was not reached within ``m_max``

    Raises:
        SchemaError: On too few, non-finite or duplicate samples
    """
    z = np.asarray(omega, dtype=float).ravel()
    f = np.asarray(values).ravel()
    if z.size != f.size:
        raise SchemaError("sample abscissae and values differ in length")
    if z.size < 8:
        raise SchemaError("AAA needs at least 8 samples", {"samples": int(z.size)})
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(f))):
        raise SchemaError("AAA samples must be finite")
    if np.unique(z).size != z.size:
        raise SchemaError("duplicate sample abscissae")
    if tol <= 0:
        raise SchemaError("tolerance must be positive", {"tol": tol})

    scale = max(float(np.max(np.abs(f))), 1e-300)
    target = tol * scale
    mask = np.ones(z.size, dtype=bool)
    approx = np.full(f.shape, np.mean(f), dtype=complex)

    support: List[int] = []
    best = None
    history: List[float] = []
    m_cap = min(m_max, z.size - 1)

    for _ in range(m_cap):
        j = int(np.argmax(np.where(mask, np.abs(f - approx), -np.inf)))
        support.append(j)
        mask[j] = False

        weights, approx, error = loewner_weights(z, f, support)
        if best is None or error < best[0]:
            best = (error, list(support), weights.copy())
        history.append(best[0])
        if error <= target:
            break

    error, chosen, weights = best
    cleaned = froissart_cleanup(z, f, chosen, weights, scale)
    if cleaned is not None and cleaned[2] <= max(target, 10.0 * error, 1e-14 * scale):
        chosen, weights, error = cleaned
    zj, fj = z[chosen], f[chosen]

    flags: Tuple[str, ...] = ()
    if error > target:
        flags = (FLAG_TOL_NOT_REACHED,)
        logger.warning(
            f"AAA stopped at m={len(zj)} with relative error {error / scale:.3e} > {tol:.1e}"
        )
    else:
        logger.info(f"AAA converged with m={len(zj)}, relative error {error / scale:.3e}")

    return BarycentricRational(
        support=zj,
        weights=weights,
        values=fj,
        max_error=error,
        tolerance=target,
        error_history=tuple(history),
        sample_range=(float(z.min()), float(z.max())),
        flags=flags,
    )
