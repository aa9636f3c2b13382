#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Propagation results

Author: messkit developers
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.utils import SchemaError

FLAG_TRACE_DRIFT = "trace-drift"
FLAG_POSITIVITY = "positivity-violated"
FLAG_DEPTH = "heom-depth-not-converged"
FLAG_CUTOFF = "fock-cutoff-not-converged"
FLAG_VARIANCE = "variance-blow-up"
FLAG_RECURRENCE = "beyond-recurrence-window"


class PropagationResult(BaseModel):
    """
    Reduced system trajectory on a time grid.

    Attributes:
        times: Time grid
        states: ρ_s(t) samples, shape (n_t, d, d)
        stderr: Standard errors for ensemble means (real part carries the
            error of Re ρ, imaginary part the error of Im ρ)
        backend: Label of the producing backend
        diagnostics: Solver statistics and sizes
        flags: Best-effort warnings (non-convergence, positivity, variance)
        metadata: Reproducibility record (tolerances, seeds, truncation)
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    states: np.ndarray
    stderr: Optional[np.ndarray] = None
    backend: str = "unknown"
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    flags: Tuple[str, ...] = ()
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("times", mode="before")
    @classmethod
    def _times(cls, value):
        return np.asarray(value, dtype=float)

    @field_validator("states", "stderr", mode="before")
    @classmethod
    def _complex(cls, value):
        return None if value is None else np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self) -> "PropagationResult":
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if self.states.ndim != 3 or self.states.shape[0] != self.times.size:
            raise ValueError("states must have shape (n_t, d, d)")
        if self.states.shape[1] != self.states.shape[2]:
            raise ValueError("states must be square")
        if self.stderr is not None and self.stderr.shape != self.states.shape:
            raise ValueError("stderr must match states")
        return self

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def is_ensemble(self) -> bool:
        return self.stderr is not None

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def trace(self) -> np.ndarray:
        return np.real(np.trace(self.states, axis1=1, axis2=2))

    def trace_drift(self) -> float:
        return float(np.max(np.abs(np.trace(self.states, axis1=1, axis2=2) - 1.0)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.states - np.conj(np.swapaxes(self.states, 1, 2)))))

    def element(self, i: int, j: int) -> np.ndarray:
        return self.states[:, i, j]

    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    def expectation(self, op: np.ndarray) -> np.ndarray:
        """Tr(O ρ_s(t))."""
        op = np.asarray(op, dtype=complex)
        if op.shape != (self.dim, self.dim):
            raise SchemaError("observable does not match the system dimension")
        return np.einsum("ij,tji->t", op, self.states)

    def min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.states + np.conj(np.swapaxes(self.states, 1, 2)))
        return float(np.min(np.linalg.eigvalsh(hermitian)))

    def at(self, t: float) -> np.ndarray:
        """State at a grid time."""
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-12 * max(1.0, abs(t)):
            raise SchemaError("time not on the result grid", {"t": t})
        return self.states[idx]

    def with_flags(self, *flags: str, **diagnostics: Any) -> "PropagationResult":
        merged = tuple(dict.fromkeys(self.flags + tuple(f for f in flags if f)))
        return self.model_copy(update={"flags": merged, "diagnostics": {**self.diagnostics, **diagnostics}})

    def max_deviation(self, other: "PropagationResult") -> float:
        """Max |Δρ| on identical grids."""
        if self.times.shape != other.times.shape or np.any(np.abs(self.times - other.times) > 1e-12):
            raise SchemaError("results live on different grids")
        return float(np.max(np.abs(self.states - other.states)))
