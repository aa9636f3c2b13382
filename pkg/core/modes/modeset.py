#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Effective mode sets {E, κ, η}

S_β(ω) = −2 Im κ†(ω − E)^{−1}η and C(t ≥ 0) = κ†e^{−iEt}η.

Author: messkit developers
"""

import logging
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.modes.exponential import ExponentialModes
from core.utils import ConditioningError, PreconditionError, SchemaError

# Setup logger
logger = logging.getLogger("core.modes")

GREEN_CONDITION_LIMIT = 1e12
TRANSFORM_CONDITION_LIMIT = 1e8


class Topology(str, Enum):
    STAR = "star"
    CHAIN = "chain"
    GENERAL = "general"


class EffectiveModeSet(BaseModel):
    """K×K mode matrix E with coupling vectors κ and η."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    E: np.ndarray
    kappa: np.ndarray
    eta: np.ndarray
    topology: Topology = Topology.GENERAL
    tolerance: float = 0.0

    @field_validator("E", "kappa", "eta", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self) -> "EffectiveModeSet":
        object.__setattr__(self, "E", np.atleast_2d(np.asarray(self.E, dtype=complex)))
        object.__setattr__(self, "kappa", np.asarray(self.kappa, dtype=complex).ravel())
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=complex).ravel())
        k = self.kappa.size
        if self.E.shape != (k, k) or self.eta.size != k:
            raise ValueError("E must be K×K with κ, η of length K")
        scale = max(1.0, float(np.abs(self.E).max()) if k else 1.0)
        if k and np.any(np.linalg.eigvals(self.E).imag > 1e-10 * scale):
            raise ValueError("eigenvalues of E must have non-positive imaginary part")
        return self

    @property
    def count(self) -> int:
        return int(self.kappa.size)

    @property
    def kappa_plus(self) -> np.ndarray:
        return 0.5 * (self.kappa + self.eta)

    @property
    def kappa_minus(self) -> np.ndarray:
        return 0.5 * (self.kappa - self.eta)

    @property
    def omega_matrix(self) -> np.ndarray:
        """Ω = (E + E†)/2."""
        return 0.5 * (self.E + self.E.conj().T)

    @property
    def gamma_matrix(self) -> np.ndarray:
        """Γ = (E† − E)/2i."""
        return (self.E.conj().T - self.E) / 2j

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        off = self.E - np.diag(np.diag(self.E))
        return bool(np.all(np.abs(off) <= tol))

    def spectrum(self, omega) -> np.ndarray:
        return reconstruct_spectrum(self, omega)

    def correlation(self, t) -> np.ndarray:
        return reconstruct_correlation(self, t)

    evaluate = correlation


def build_star_modeset(modes: ExponentialModes) -> EffectiveModeSet:
    """
    Star set from exponential modes: E = diag(ω_k − iγ_k), κ_k* = −√(2d_k),
    η_k = −√(d_k/2) on the principal branch.
    """
    d = modes.d
    return EffectiveModeSet(
        E=np.diag(-1j * modes.z),
        kappa=np.conj(-np.sqrt(2.0 * d)),
        eta=-np.sqrt(d / 2.0),
        topology=Topology.STAR,
        tolerance=modes.residual_bound,
    )


def reconstruct_spectrum(modeset: EffectiveModeSet, omega) -> np.ndarray:
    """
    S(ω) = i{κ†G(ω)η − η†G†(ω)κ} with G(ω) = (ω − E)^{−1}.

    Raises:
        ConditioningError: If ω − E is numerically singular
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float)).ravel()
    k = modeset.count
    if modeset.is_diagonal():
        diag = np.diag(modeset.E)
        denom = w[:, None] - diag[None, :]
        scale = np.maximum(np.abs(w[:, None]), np.abs(diag[None, :])) + 1.0
        if np.any(np.abs(denom) * GREEN_CONDITION_LIMIT < scale):
            raise ConditioningError("near-real pole of the mode Green's function")
        x = (modeset.kappa.conj()[None, :] * modeset.eta[None, :] / denom).sum(axis=1)
    else:
        x = np.empty(w.size, dtype=complex)
        identity = np.eye(k)
        for i, wi in enumerate(w):
            a = wi * identity - modeset.E
            if np.linalg.cond(a) > GREEN_CONDITION_LIMIT:
                raise ConditioningError(
                    "near-real pole of the mode Green's function", {"omega": float(wi)}
                )
            x[i] = modeset.kappa.conj() @ np.linalg.solve(a, modeset.eta)
    value = -2.0 * x.imag
    return float(value[0]) if np.ndim(omega) == 0 else value.reshape(np.shape(omega))


def reconstruct_correlation(modeset: EffectiveModeSet, t) -> np.ndarray:
    """
    C(t) = κ†e^{−iEt}η for t ≥ 0 (G(0⁺) = −i), conjugate for t < 0.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    out = np.empty(times.size, dtype=complex)
    if modeset.is_diagonal():
        coeff = modeset.kappa.conj() * modeset.eta
        out = np.exp(-1j * np.outer(np.abs(times), np.diag(modeset.E))) @ coeff
    else:
        for i, ti in enumerate(np.abs(times)):
            out[i] = modeset.kappa.conj() @ scipy.linalg.expm(-1j * modeset.E * ti) @ modeset.eta
    out = np.where(times < 0, np.conj(out), out)
    return complex(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def reconstruct(
    modeset: EffectiveModeSet, omega=None, t=None
) -> np.ndarray:
    """Reconstruct S(ω) (``omega`` given) or C(t) (``t`` given)."""
    if (omega is None) == (t is None):
        raise SchemaError("give exactly one of omega or t")
    if omega is not None:
        return reconstruct_spectrum(modeset, omega)
    return reconstruct_correlation(modeset, t)


def transform_modeset(
    modeset: EffectiveModeSet,
    M: np.ndarray,
    condition_limit: float = TRANSFORM_CONDITION_LIMIT,
    topology: Optional[Topology] = None,
) -> EffectiveModeSet:
    """
    Similarity transform E′ = MEM^{−1}, κ′† = κ†M^{−1}, η′ = Mη.

    Raises:
        ConditioningError: If cond(M) exceeds ``condition_limit``
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != modeset.E.shape:
        raise SchemaError("transform must be K×K", {"shape": M.shape})
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > condition_limit:
        raise ConditioningError("ill-conditioned mode transform", {"condition": float(cond)})
    m_inv = np.linalg.inv(M)
    return EffectiveModeSet(
        E=M @ modeset.E @ m_inv,
        kappa=m_inv.conj().T @ modeset.kappa,
        eta=M @ modeset.eta,
        topology=topology or Topology.GENERAL,
        tolerance=modeset.tolerance,
    )


def lindblad_gauge(modeset: EffectiveModeSet) -> EffectiveModeSet:
    """
    Rescale a star set with real positive weights κ_k* η_k so that κ = η.

    With M = diag(√(κ_k*/η_k)) every mode gets κ′_k = η′_k = √(κ_k* η_k); for
    the star mapping this is M = √2·𝟙.

    Raises:
        PreconditionError: If E is not diagonal or a weight is not real positive
    """
    if not modeset.is_diagonal():
        raise PreconditionError("Lindblad gauge needs a diagonal mode matrix")
    weight = modeset.kappa.conj() * modeset.eta
    if np.any(np.abs(weight.imag) > 1e-12 * np.maximum(1.0, np.abs(weight))) or np.any(
        weight.real <= 0
    ):
        raise PreconditionError("Lindblad gauge needs real positive mode weights")
    ratio = modeset.kappa.conj() / modeset.eta
    M = np.diag(np.sqrt(ratio))
    gauged = transform_modeset(modeset, M, topology=Topology.STAR)
    return EffectiveModeSet(
        E=gauged.E,
        kappa=gauged.eta,
        eta=gauged.eta,
        topology=Topology.STAR,
        tolerance=modeset.tolerance,
    )


def tridiagonalize(modeset: EffectiveModeSet, breakdown_tol: float = 1e-12) -> EffectiveModeSet:
    """
    Two-sided Lanczos similarity transform to a chain.

    Produces a tridiagonal E′ with κ′, η′ ∝ e_0 and the same C(t).

    Raises:
        ConditioningError: On Lanczos breakdown
    """
    k = modeset.count
    sigma = complex(modeset.kappa.conj() @ modeset.eta)
    if abs(sigma) == 0.0:
        raise ConditioningError("κ†η vanishes; chain head undefined")
    root = np.sqrt(sigma)
    V = np.zeros((k, k), dtype=complex)
    W = np.zeros((k, k), dtype=complex)
    V[:, 0] = modeset.eta / root
    W[:, 0] = modeset.kappa / np.conj(root)
    E = modeset.E
    for j in range(k - 1):
        v = E @ V[:, j]
        w = E.conj().T @ W[:, j]
        # full biorthogonalization against previous vectors
        v -= V[:, : j + 1] @ (W[:, : j + 1].conj().T @ v)
        w -= W[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        overlap = complex(w.conj() @ v)
        if abs(overlap) < breakdown_tol * max(1.0, np.linalg.norm(v) * np.linalg.norm(w)):
            raise ConditioningError("Lanczos breakdown during tridiagonalization", {"step": j})
        beta = np.sqrt(overlap)
        V[:, j + 1] = v / beta
        W[:, j + 1] = w / np.conj(beta)
    M = W.conj().T
    chain = transform_modeset(modeset, M, topology=Topology.CHAIN)
    E_chain = np.triu(np.tril(chain.E, 1), -1)
    head = np.zeros(k, dtype=complex)
    kappa = head.copy()
    eta = head.copy()
    kappa[0] = chain.kappa[0]
    eta[0] = chain.eta[0]
    return EffectiveModeSet(
        E=E_chain, kappa=kappa, eta=eta, topology=Topology.CHAIN, tolerance=modeset.tolerance
    )

