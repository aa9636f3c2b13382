#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Hierarchical equations of motion

Three variants share one assembly path: the ADO index set is enumerated
level by level, and the generator is Σ T ⊗ 𝒮 over coefficient matrices T
between ADOs and system superoperators 𝒮.

- generalized: ADOs ρ_{m,n} with separate ket (m) and bra (n) indices per
  exponential mode (d_k, z_k)
- ikeda: ADOs ρ_n over a mode set {E, κ, η′, η″} with split real and
  imaginary parts of C
- standard: ADOs ρ_n for purely decaying modes (ω_k = 0)

Author: messkit developers
"""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict

from core.modes import ExponentialModes, IkedaModes, ikeda_split
from core.solvers.integrator import IntegratorOptions, propagate_linear
from core.solvers.results import FLAG_DEPTH, FLAG_TRACE_DRIFT, PropagationResult
from core.statespace import (
    SystemModel,
    TruncationSpec,
    anticommutator,
    commutator,
    hierarchy_size,
    left_superop,
    right_superop,
    unvec,
    vec,
)
from core.utils import DimensionError, InstabilityError, PreconditionError, SchemaError, Timer

# Setup logger
logger = logging.getLogger("core.solvers")

NORM_WATCHDOG = 1e6
TRACE_DRIFT_TOL = 1e-8
FREQUENCY_TOL = 1e-12

MultiIndex = Tuple[int, ...]


class HeomVariant(str, Enum):
    GENERALIZED = "generalized"
    IKEDA = "ikeda"
    STANDARD = "standard"


def enumerate_indices(width: int, depth: int) -> List[MultiIndex]:
    """All multi-indices of ``width`` entries with total ≤ depth, ordered by level."""

    def compositions(total: int, slots: int):
        if slots == 0:
            if total == 0:
                yield ()
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, slots - 1):
                yield (first,) + rest

    out: List[MultiIndex] = []
    for level in range(depth + 1):
        out.extend(compositions(level, width))
    return out


class HierarchyState(BaseModel):
    """
    ADO container: level-ordered index set plus the stacked ADO vector.

    ADO p occupies entries p·d² … (p+1)·d² − 1 of ``vector`` (column-stacked).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    indices: Tuple[MultiIndex, ...]
    dim: int
    depth: int
    rescaled: bool = True
    vector: Optional[np.ndarray] = None

    @property
    def count(self) -> int:
        return len(self.indices)

    @property
    def lookup(self) -> Dict[MultiIndex, int]:
        return {idx: p for p, idx in enumerate(self.indices)}

    def initial(self, rho_s: np.ndarray) -> "HierarchyState":
        vector = np.zeros(self.count * self.dim * self.dim, dtype=complex)
        vector[: self.dim * self.dim] = vec(rho_s)
        return self.model_copy(update={"vector": vector})

    def ado(self, index: MultiIndex, vector: Optional[np.ndarray] = None) -> np.ndarray:
        v = self.vector if vector is None else vector
        p = self.lookup[tuple(index)]
        block = self.dim * self.dim
        return unvec(v[p * block : (p + 1) * block], self.dim)


class _Assembler:
    """Accumulates T ⊗ 𝒮 terms."""

    def __init__(self, count: int):
        self.count = count
        self.terms: Dict[str, Tuple[List[int], List[int], List[complex]]] = {}

    def add(self, kind: str, row: int, col: int, value: complex) -> None:
        if value == 0:
            return
        rows, cols, vals = self.terms.setdefault(kind, ([], [], []))
        rows.append(row)
        cols.append(col)
        vals.append(complex(value))

    def build(self, superops: Dict[str, sp.spmatrix], free: sp.spmatrix) -> sp.csr_matrix:
        n = self.count
        gen = sp.kron(sp.identity(n, dtype=complex, format="csr"), free, format="csr")
        for kind, (rows, cols, vals) in self.terms.items():
            coeffs = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
            gen = gen + sp.kron(coeffs, superops[kind], format="csr")
        return gen.tocsr()


def _system_superops(model: SystemModel) -> Dict[str, sp.csr_matrix]:
    d = model.dim
    return {
        "identity": sp.identity(d * d, dtype=complex, format="csr"),
        "comm": commutator(model.S),
        "anti": anticommutator(model.S),
        "left": left_superop(model.S),
        "right": right_superop(model.S),
    }


def _generalized(model: SystemModel, modes: ExponentialModes, depth: int, rescaled: bool):
    K = modes.count
    indices = enumerate_indices(2 * K, depth)
    lookup = {idx: p for p, idx in enumerate(indices)}
    asm = _Assembler(len(indices))
    d, z = modes.d, modes.z
    root = np.sqrt(d)
    root_bra = np.conj(root)
    for p, idx in enumerate(indices):
        m, n = idx[:K], idx[K:]
        asm.add("identity", p, p, -np.sum(np.array(m) * z + np.array(n) * np.conj(z)))
        for k in range(K):
            for side, occ, ket in ((k, m[k], True), (K + k, n[k], False)):
                up = list(idx)
                up[side] += 1
                q = lookup.get(tuple(up))
                if q is not None:
                    s = root[k] if ket else root_bra[k]
                    asm.add("comm", p, q, 1j * (np.sqrt(occ + 1.0) * s if rescaled else 1.0))
                if occ > 0:
                    down = list(idx)
                    down[side] -= 1
                    q = lookup[tuple(down)]
                    if ket:
                        coeff = np.sqrt(occ) * root[k] if rescaled else occ * d[k]
                        asm.add("left", p, q, 1j * coeff)
                    else:
                        coeff = np.sqrt(occ) * root_bra[k] if rescaled else occ * np.conj(d[k])
                        asm.add("right", p, q, -1j * coeff)
    return indices, asm


def _ikeda(model: SystemModel, modes: IkedaModes, depth: int):
    K = modes.count
    indices = enumerate_indices(K, depth)
    lookup = {idx: p for p, idx in enumerate(indices)}
    asm = _Assembler(len(indices))
    E = modes.E
    for p, idx in enumerate(indices):
        for j in range(K):
            if idx[j] == 0:
                continue
            for k in range(K):
                if E[j, k] == 0:
                    continue
                if j == k:
                    asm.add("identity", p, p, -1j * idx[j] * E[j, j])
                    continue
                moved = list(idx)
                moved[j] -= 1
                moved[k] += 1
                q = lookup[tuple(moved)]
                asm.add("identity", p, q, -1j * np.sqrt(idx[j] * (idx[k] + 1.0)) * E[j, k])
        for j in range(K):
            up = list(idx)
            up[j] += 1
            q = lookup.get(tuple(up))
            if q is not None:
                asm.add("comm", p, q, -1j * np.conj(modes.kappa[j]) * np.sqrt(idx[j] + 1.0))
            if idx[j] > 0:
                down = list(idx)
                down[j] -= 1
                q = lookup[tuple(down)]
                asm.add("comm", p, q, -1j * modes.eta_re[j] * np.sqrt(idx[j]))
                asm.add("anti", p, q, -1j * modes.eta_im[j] * np.sqrt(idx[j]))
    return indices, asm


def _standard(model: SystemModel, modes: ExponentialModes, depth: int, rescaled: bool):
    if np.any(np.abs(modes.z.imag) > FREQUENCY_TOL * np.maximum(1.0, np.abs(modes.z))):
        raise PreconditionError("standard HEOM requires all mode frequencies to vanish")
    K = modes.count
    indices = enumerate_indices(K, depth)
    lookup = {idx: p for p, idx in enumerate(indices)}
    asm = _Assembler(len(indices))
    d, gamma = modes.d, modes.z.real
    root = np.sqrt(d)
    for p, idx in enumerate(indices):
        asm.add("identity", p, p, -np.sum(np.array(idx) * gamma))
        for k in range(K):
            up = list(idx)
            up[k] += 1
            q = lookup.get(tuple(up))
            if q is not None:
                asm.add("comm", p, q, -1j * (np.sqrt(idx[k] + 1.0) * root[k] if rescaled else 1.0))
            if idx[k] > 0:
                down = list(idx)
                down[k] -= 1
                q = lookup[tuple(down)]
                if rescaled:
                    asm.add("left", p, q, -1j * np.sqrt(idx[k]) * root[k])
                    asm.add("right", p, q, 1j * np.sqrt(idx[k]) * np.conj(d[k]) / root[k])
                else:
                    asm.add("left", p, q, -1j * idx[k] * d[k])
                    asm.add("right", p, q, 1j * idx[k] * np.conj(d[k]))
    return indices, asm


def build_heom_generator(
    model: SystemModel,
    modes: Union[ExponentialModes, IkedaModes],
    trunc: TruncationSpec,
    variant: Union[HeomVariant, str] = HeomVariant.GENERALIZED,
    rescaled: bool = True,
) -> Tuple[HierarchyState, sp.csr_matrix]:
    """
    Assemble the truncated hierarchy generator.

    Raises:
        PreconditionError: For a standard variant with oscillating modes
        DimensionError: If ADO count × d² exceeds the guard
    """
    variant = HeomVariant(variant)
    if variant == HeomVariant.IKEDA:
        if isinstance(modes, ExponentialModes):
            modes = ikeda_split(modes)
        if not isinstance(modes, IkedaModes):
            raise SchemaError("ikeda HEOM needs Ikeda or exponential modes")
        width = modes.count
        rescaled = True
    else:
        if not isinstance(modes, ExponentialModes):
            raise SchemaError(f"{variant.value} HEOM needs exponential modes")
        width = 2 * modes.count if variant == HeomVariant.GENERALIZED else modes.count

    size = hierarchy_size(width, trunc.depth) * model.dim ** 2
    if size > trunc.max_dimension:
        raise DimensionError(
            "hierarchy exceeds the dimension guard; lower the depth or the mode count",
            {"size": size, "max_dimension": trunc.max_dimension},
        )

    if variant == HeomVariant.GENERALIZED:
        indices, asm = _generalized(model, modes, trunc.depth, rescaled)
    elif variant == HeomVariant.IKEDA:
        indices, asm = _ikeda(model, modes, trunc.depth)
    else:
        indices, asm = _standard(model, modes, trunc.depth, rescaled)

    matrix = asm.build(_system_superops(model), model.liouvillian())
    state = HierarchyState(indices=tuple(indices), dim=model.dim, depth=trunc.depth, rescaled=rescaled)
    return state, matrix


class _Watchdog:
    """Post-step hook: norm watchdog plus dynamical ADO filtering."""

    def __init__(self, count: int, block: int, threshold: float, initial_norm: float):
        self.count = count
        self.block = block
        self.threshold = threshold
        self.limit = NORM_WATCHDOG * max(initial_norm, 1e-300)
        self.discards = 0
        self.max_active = 0

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        norm = float(np.linalg.norm(y))
        if not np.isfinite(norm) or norm > self.limit:
            raise InstabilityError("hierarchy norm diverged", {"t": t, "norm": norm})
        if self.threshold > 0.0:
            blocks = y.reshape(self.count, self.block)
            small = np.max(np.abs(blocks), axis=1) < self.threshold
            small[0] = False
            dropped = small & np.any(blocks != 0, axis=1)
            self.discards += int(np.count_nonzero(dropped))
            blocks[small] = 0.0
            self.max_active = max(self.max_active, int(self.count - np.count_nonzero(small)))
            return blocks.reshape(-1)
        self.max_active = self.count
        return y


def heom_propagate(
    model: SystemModel,
    modes: Union[ExponentialModes, IkedaModes],
    trunc: TruncationSpec,
    times: Sequence[float],
    rho0: np.ndarray,
    variant: Union[HeomVariant, str] = HeomVariant.GENERALIZED,
    options: Optional[IntegratorOptions] = None,
    rescaled: bool = True,
) -> PropagationResult:
    """
    Propagate a truncated hierarchy; ρ_s(t) is the root ADO.

    All non-root ADOs start at zero. With ``trunc.filter_threshold`` > 0,
    ADOs whose largest entry falls below the threshold are zeroed after every
    accepted step; they re-enter as soon as their neighbours feed them.

    Raises:
        InstabilityError: If the ADO norm grows beyond 1e6× its initial value
    """
    variant = HeomVariant(variant)
    opts = options or IntegratorOptions()
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise SchemaError("initial state does not match the system dimension")

    with Timer(f"HEOM {variant.value}", log=False) as timer:
        state, matrix = build_heom_generator(model, modes, trunc, variant, rescaled)
        state = state.initial(rho0)
        block = model.dim ** 2
        watchdog = _Watchdog(state.count, block, trunc.filter_threshold, float(np.linalg.norm(state.vector)))
        trajectory, stats = propagate_linear(matrix, state.vector, times, opts, watchdog)

    states = np.array([unvec(row[:block], model.dim) for row in trajectory])
    logger.info(
        f"HEOM {variant.value}: {state.count} ADOs (L={trunc.depth}), "
        f"{stats['accepted']} steps, {timer.elapsed():.3f}s"
    )
    result = PropagationResult(
        times=np.asarray(times, dtype=float),
        states=states,
        backend=f"heom-{variant.value}",
        diagnostics={
            "ado_count": state.count,
            "active_ado_max": watchdog.max_active,
            "filter_discards": watchdog.discards,
            "nnz": int(matrix.nnz),
            "wall_time": timer.elapsed(),
            **stats,
        },
        metadata={
            "variant": variant.value,
            "modes": modes.count,
            "depth": trunc.depth,
            "filter_threshold": trunc.filter_threshold,
            "rescaled": state.rescaled,
            "rtol": opts.rtol,
            "atol": opts.atol,
        },
    )
    if result.trace_drift() > TRACE_DRIFT_TOL:
        result = result.with_flags(FLAG_TRACE_DRIFT)
    return result


def convergence_check(
    model: SystemModel,
    modes: Union[ExponentialModes, IkedaModes],
    trunc: TruncationSpec,
    times: Sequence[float],
    rho0: np.ndarray,
    variant: Union[HeomVariant, str] = HeomVariant.GENERALIZED,
    tol: float = 1e-4,
    options: Optional[IntegratorOptions] = None,
) -> PropagationResult:
    """
    Compare depths L and L+1; the deeper result is returned and flagged
    when the two differ by more than ``tol``.
    """
    shallow = heom_propagate(model, modes, trunc, times, rho0, variant, options)
    deep = heom_propagate(model, modes, trunc.deeper(), times, rho0, variant, options)
    difference = shallow.max_deviation(deep)
    if difference > tol:
        logger.warning(f"HEOM depth {trunc.depth} vs {trunc.depth + 1} differs by {difference:.3e} > {tol:.1e}")
        return deep.with_flags(FLAG_DEPTH, depth_difference=difference)
    return deep.with_flags(depth_difference=difference)
