#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Cross-backend comparison of reduced trajectories

Author: messkit developers
"""

import logging
from typing import Dict, List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.interpolate import CubicSpline

from core.solvers.results import PropagationResult
from core.stochastic import TrajectoryEnsemble
from core.utils import SchemaError

# Setup logger
logger = logging.getLogger("core.oracles")

Comparable = Union[PropagationResult, TrajectoryEnsemble]

GRID_MATCH_TOL = 1e-12


class ComparisonReport(BaseModel):
    """
    Element-wise deviations between two trajectories on a common grid.

    Deviations are absolute, or in combined standard errors when either
    input is an ensemble (``sigma_units``).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    labels: List[str]
    times: np.ndarray
    max_deviation: float
    mean_deviation: float
    element_max: Dict[str, float]
    tolerance: float
    sigma_units: bool
    passed: bool

    def lines(self) -> List[str]:
        """One line per element: name, metric, tolerance, verdict."""
        unit = "sigma" if self.sigma_units else "abs"
        out = []
        for name, value in self.element_max.items():
            verdict = "PASS" if value <= self.tolerance else "FAIL"
            out.append(f"{self.labels[0]}~{self.labels[1]}:{name} {value:.6e} {unit}<={self.tolerance:.3e} {verdict}")
        return out


def _as_result(item: Comparable) -> PropagationResult:
    return item.as_result() if isinstance(item, TrajectoryEnsemble) else item


def _resample(result: PropagationResult, grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    if result.times.size == grid.size and np.all(np.abs(result.times - grid) <= GRID_MATCH_TOL):
        return values
    if result.times.size < 2:
        raise SchemaError("cannot interpolate a single-point result")
    return CubicSpline(result.times, values, axis=0)(grid)


def common_grid(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Union of both grids restricted to their overlap."""
    lo = max(a[0], b[0])
    hi = min(a[-1], b[-1])
    if hi < lo:
        raise SchemaError("results have disjoint time grids", {"a": [a[0], a[-1]], "b": [b[0], b[-1]]})
    merged = np.union1d(a, b)
    merged = merged[(merged >= lo - GRID_MATCH_TOL) & (merged <= hi + GRID_MATCH_TOL)]
    keep = np.concatenate([[True], np.diff(merged) > GRID_MATCH_TOL])
    return merged[keep]


def cross_compare(a: Comparable, b: Comparable, tolerance: float = 1e-4, sigma: float = 3.0) -> ComparisonReport:
    """
    Compare two trajectories element by element.

    When either input carries standard errors, each real and imaginary
    deviation is divided by the combined error and checked against ``sigma``;
    otherwise the absolute deviation is checked against ``tolerance``.

    Raises:
        SchemaError: On disjoint grids or mismatched dimensions
    """
    ra, rb = _as_result(a), _as_result(b)
    if ra.dim != rb.dim:
        raise SchemaError("results have different system dimensions", {"a": ra.dim, "b": rb.dim})
    grid = common_grid(ra.times, rb.times)
    sa = _resample(ra, grid, ra.states)
    sb = _resample(rb, grid, rb.states)
    sigma_units = ra.is_ensemble or rb.is_ensemble

    if sigma_units:
        ea = _resample(ra, grid, ra.stderr) if ra.is_ensemble else np.zeros_like(sa)
        eb = _resample(rb, grid, rb.stderr) if rb.is_ensemble else np.zeros_like(sb)
        parts = []
        for diff, err in (
            (np.abs(sa.real - sb.real), np.hypot(ea.real, eb.real)),
            (np.abs(sa.imag - sb.imag), np.hypot(ea.imag, eb.imag)),
        ):
            scaled = np.where(err > 0, diff / np.where(err > 0, err, 1.0), np.where(diff > 1e-14, np.inf, 0.0))
            parts.append(scaled)
        deviation = np.maximum(parts[0], parts[1])
        limit = sigma
    else:
        deviation = np.abs(sa - sb)
        limit = tolerance

    d = ra.dim
    element_max = {f"rho_{i}{j}": float(deviation[:, i, j].max()) for i in range(d) for j in range(d)}
    worst = float(deviation.max())
    labels = sorted([ra.backend, rb.backend])
    report = ComparisonReport(
        labels=labels,
        times=grid,
        max_deviation=worst,
        mean_deviation=float(deviation.mean()),
        element_max=element_max,
        tolerance=limit,
        sigma_units=sigma_units,
        passed=worst <= limit,
    )
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, f"{labels[0]} vs {labels[1]}: max deviation {worst:.3e} (limit {limit:.3e})")
    return report
