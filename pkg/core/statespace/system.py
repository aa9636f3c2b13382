#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
System model, truncation and superoperator algebra

Vectorization is column-stacking throughout: entry (r, c) of a D×D matrix
sits at index r + D·c, so vec(AXB) = (Bᵀ ⊗ A) vec(X).

Author: messkit developers
"""

import logging
import math
from functools import reduce
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.utils import SchemaError

# Setup logger
logger = logging.getLogger("core.statespace")

HERMITIAN_TOL = 1e-12
DEFAULT_MAX_DIMENSION = 1_000_000

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class SystemModel(BaseModel):
    """
    System Hamiltonian H_s and coupling operator S (H_sb = S ⊗ X_b).

    Attributes:
        H: d×d Hermitian system Hamiltonian
        S: d×d Hermitian coupling operator
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    H: np.ndarray
    S: np.ndarray

    @field_validator("H", "S", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self) -> "SystemModel":
        if self.H.ndim != 2 or self.H.shape[0] != self.H.shape[1]:
            raise ValueError("H must be a square matrix")
        if self.S.shape != self.H.shape:
            raise ValueError("H and S must have the same shape")
        if self.H.shape[0] < 2:
            raise ValueError("system dimension must be at least 2")
        for name, op in (("H", self.H), ("S", self.S)):
            scale = max(1.0, float(np.abs(op).max()))
            if np.abs(op - op.conj().T).max() > HERMITIAN_TOL * scale:
                raise ValueError(f"{name} is not Hermitian")
        return self

    @classmethod
    def spin_boson(cls, epsilon: float, delta: float) -> "SystemModel":
        """H_s = (ε/2)σ_z + (Δ/2)σ_x with S = σ_z."""
        return cls(H=0.5 * epsilon * PAULI_Z + 0.5 * delta * PAULI_X, S=PAULI_Z)

    @classmethod
    def dephasing(cls, epsilon: float) -> "SystemModel":
        """H_s = (ε/2)σ_z with S = σ_z."""
        return cls(H=0.5 * epsilon * PAULI_Z, S=PAULI_Z)

    @property
    def dim(self) -> int:
        return int(self.H.shape[0])

    def commutes(self, tol: float = 1e-12) -> bool:
        """Whether [H_s, S] = 0 to ``tol`` relative to ‖H‖‖S‖."""
        scale = max(1.0, float(np.abs(self.H).max()) * float(np.abs(self.S).max()))
        return bool(np.abs(self.H @ self.S - self.S @ self.H).max() <= tol * scale)

    def liouvillian(self) -> sp.csr_matrix:
        """−i[H_s, ·] on column-stacked d×d matrices."""
        return -1j * commutator(self.H)


class TruncationSpec(BaseModel):
    """
    Truncation of the extended space.

    Attributes:
        cutoffs: Fock cutoffs n_max,k (one value broadcasts to every mode)
        depth: Hierarchy depth L
        filter_threshold: ADO filter threshold ε_f (0 disables filtering)
        max_dimension: Guard on the vectorized extended-state length
    """

    model_config = ConfigDict(frozen=True)

    cutoffs: Tuple[int, ...] = (4,)
    depth: int = Field(default=4, ge=1)
    filter_threshold: float = Field(default=0.0, ge=0.0)
    max_dimension: int = Field(default=DEFAULT_MAX_DIMENSION, ge=1)

    @field_validator("cutoffs", mode="before")
    @classmethod
    def _as_tuple(cls, value):
        if isinstance(value, int):
            return (value,)
        return tuple(int(v) for v in value)

    @field_validator("cutoffs")
    @classmethod
    def _check_cutoffs(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value or any(v < 1 for v in value):
            raise ValueError("every Fock cutoff must be at least 1")
        return value

    def cutoffs_for(self, K: int) -> Tuple[int, ...]:
        """Per-mode cutoffs for K modes."""
        if len(self.cutoffs) == 1:
            return self.cutoffs * K
        if len(self.cutoffs) != K:
            raise SchemaError(
                "number of Fock cutoffs does not match the mode count",
                {"cutoffs": len(self.cutoffs), "modes": K},
            )
        return self.cutoffs

    def doubled(self) -> "TruncationSpec":
        return self.model_copy(update={"cutoffs": tuple(2 * c for c in self.cutoffs)})

    def deeper(self, extra: int = 1) -> "TruncationSpec":
        return self.model_copy(update={"depth": self.depth + extra})


def hierarchy_size(modes: int, depth: int) -> int:
    """Number of multi-indices over ``modes`` entries with total ≤ depth."""
    return math.comb(modes + depth, depth)


def apply_superops(model: SystemModel, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Return (𝒮_c ρ, 𝒮_q ρ) with 𝒮_{c/q}ρ = (Sρ ± ρS)/√2.

    Raises:
        SchemaError: If ρ is not d×d
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != model.S.shape:
        raise SchemaError("state shape does not match the system", {"shape": rho.shape, "dim": model.dim})
    left = model.S @ rho
    right = rho @ model.S
    return (left + right) / math.sqrt(2.0), (left - right) / math.sqrt(2.0)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(vector).reshape((dim, dim), order="F")


def _sparse(op) -> sp.csr_matrix:
    return sp.csr_matrix(op, dtype=complex)


def left_superop(op) -> sp.csr_matrix:
    """X ↦ AX."""
    op = _sparse(op)
    return sp.kron(sp.identity(op.shape[0], dtype=complex, format="csr"), op, format="csr")


def right_superop(op) -> sp.csr_matrix:
    """X ↦ XB."""
    op = _sparse(op)
    return sp.kron(op.T, sp.identity(op.shape[0], dtype=complex, format="csr"), format="csr")


def commutator(op) -> sp.csr_matrix:
    """X ↦ [A, X]."""
    return left_superop(op) - right_superop(op)


def anticommutator(op) -> sp.csr_matrix:
    """X ↦ {A, X}."""
    return left_superop(op) + right_superop(op)


def dissipator(jump, other=None) -> sp.csr_matrix:
    """
    X ↦ 2 F_k X F_j† − {F_j†F_k, X} with F_k = ``jump`` and F_j = ``other``.

    ``other`` defaults to ``jump`` (the diagonal Lindblad term).
    """
    fk = _sparse(jump)
    fj = fk if other is None else _sparse(other)
    fj_dag = fj.conj().T.tocsr()
    product = fj_dag @ fk
    return 2.0 * (left_superop(fk) @ right_superop(fj_dag)) - left_superop(product) - right_superop(product)


def annihilation(cutoff: int) -> sp.csr_matrix:
    """Truncated annihilation operator on Fock states 0..cutoff."""
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), offsets=1, format="csr").astype(complex)


def embed(op, position: int, dims: Sequence[int]) -> sp.csr_matrix:
    """Place ``op`` at tensor factor ``position`` of the product space with ``dims``."""
    factors: List[sp.spmatrix] = [sp.identity(n, dtype=complex, format="csr") for n in dims]
    factors[position] = _sparse(op)
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def thermal_populations(n: float, cutoff: int) -> np.ndarray:
    """Geometric populations (n/(n+1))^j renormalized on 0..cutoff."""
    if n <= 0.0:
        populations = np.zeros(cutoff + 1)
        populations[0] = 1.0
        return populations
    ratio = n / (n + 1.0)
    populations = ratio ** np.arange(cutoff + 1)
    return populations / populations.sum()


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix (Ginibre construction)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
