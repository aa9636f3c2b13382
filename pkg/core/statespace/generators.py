#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Extended-space generators

The extended Hilbert space is system ⊗ mode_1 ⊗ … ⊗ mode_K with the system as
the slowest tensor factor. Every generator acts on the column-stacked extended
density operator.

Author: messkit developers
"""

import logging
import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict

from core.modes import EffectiveModeSet, ExponentialModes, QuasiThermalModes, build_star_modeset
from core.statespace.system import (
    SystemModel,
    TruncationSpec,
    annihilation,
    anticommutator,
    commutator,
    dissipator,
    embed,
    left_superop,
    right_superop,
    thermal_populations,
    unvec,
    vec,
)
from core.utils import DimensionError, SchemaError, StructuralError, Timer

# Setup logger
logger = logging.getLogger("core.statespace")

TRACE_CHECK_STATES = 100
TRACE_CHECK_TOL = 1e-12
PRECONDITION_TOL = 1e-10

ModeInput = Union[EffectiveModeSet, ExponentialModes, QuasiThermalModes]


class GeneratorForm(str, Enum):
    FIRST = "first-form"
    SECOND = "second-form"
    QUASI_LINDBLAD = "quasi-lindblad"
    STRICT_LINDBLAD = "strict-lindblad"
    QUASI_THERMAL = "quasi-thermal"
    CHAIN_UNITARY = "chain-unitary"


class ExtendedGenerator(BaseModel):
    """
    Sparse generator on the vectorized extended state.

    Attributes:
        form: Generator form
        matrix: CSR matrix acting on vec(ρ)
        dims: Tensor factor dimensions (system first)
        hamiltonian: Extended Hamiltonian for the unitary form
        kossakowski: Coefficient matrix of the dissipator, if any
        occupations: Initial thermal occupation of every mode
        trace_defect: Largest |d/dt Tr| seen by the build-time check
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    form: GeneratorForm
    matrix: sp.csr_matrix
    dims: Tuple[int, ...]
    hamiltonian: Optional[sp.csr_matrix] = None
    kossakowski: Optional[np.ndarray] = None
    occupations: Tuple[float, ...] = ()
    trace_defect: float = 0.0

    @property
    def system_dim(self) -> int:
        return self.dims[0]

    @property
    def mode_dims(self) -> Tuple[int, ...]:
        return self.dims[1:]

    @property
    def extended_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.matrix @ state

    def __call__(self, t: float, state: np.ndarray) -> np.ndarray:
        return self.matrix @ state

    def mode_state(self) -> np.ndarray:
        """Initial density operator of the modes (vacuum or thermal)."""
        factors = []
        for k, dim in enumerate(self.mode_dims):
            n = self.occupations[k] if self.occupations else 0.0
            factors.append(np.diag(thermal_populations(n, dim - 1)).astype(complex))
        out = np.ones((1, 1), dtype=complex)
        for f in factors:
            out = np.kron(out, f)
        return out

    def initial_state(self, rho_s: np.ndarray) -> np.ndarray:
        """vec(ρ_s ⊗ ρ_modes)."""
        rho_s = np.asarray(rho_s, dtype=complex)
        if rho_s.shape != (self.system_dim, self.system_dim):
            raise SchemaError("initial state does not match the system dimension")
        return vec(np.kron(rho_s, self.mode_state()))

    def initial_wavefunction(self, psi_s: np.ndarray) -> np.ndarray:
        """ψ_s ⊗ |0⟩ for pure-state propagation."""
        psi_s = np.asarray(psi_s, dtype=complex).ravel()
        if psi_s.size != self.system_dim:
            raise SchemaError("initial wavefunction does not match the system dimension")
        vacuum = np.zeros(self.extended_dim // self.system_dim, dtype=complex)
        vacuum[0] = 1.0
        return np.kron(psi_s, vacuum)

    def project(self, state: np.ndarray) -> np.ndarray:
        return project_reduced_state(state, self)

    def mode_occupations(self, state: np.ndarray) -> np.ndarray:
        """⟨a_k†a_k⟩ for density-operator forms."""
        rho = _as_density(state, self.extended_dim)
        out = np.empty(len(self.mode_dims))
        for k, dim in enumerate(self.mode_dims):
            number = embed(sp.diags(np.arange(dim, dtype=float)), k + 1, self.dims)
            out[k] = float(np.real((number @ rho).trace()))
        return out

    def diagnostics(self) -> dict:
        return {
            "form": self.form.value,
            "dims": list(self.dims),
            "size": self.size,
            "nnz": self.nnz,
            "trace_defect": self.trace_defect,
        }


def _as_density(state: np.ndarray, dim: int) -> np.ndarray:
    state = np.asarray(state)
    if state.ndim == 2:
        return state
    if state.size == dim:
        return np.outer(state, state.conj())
    if state.size == dim * dim:
        return unvec(state, dim)
    raise SchemaError("state length matches neither the Hilbert nor the Liouville space")


def project_reduced_state(state: np.ndarray, generator: ExtendedGenerator) -> np.ndarray:
    """
    Reduced system state of an extended state.

    The first form takes the vacuum element ⟨0|ρ|0⟩; every other form traces
    out the modes. ``state`` may be a vectorized density operator, a matrix or
    a pure extended wavefunction.
    """
    d = generator.system_dim
    m = generator.extended_dim // d
    rho = _as_density(state, generator.extended_dim).reshape(d, m, d, m)
    if generator.form == GeneratorForm.FIRST:
        return np.array(rho[:, 0, :, 0])
    return np.einsum("imjm->ij", rho)


def _check_dimension(dims: Sequence[int], trunc: TruncationSpec) -> None:
    extended = int(np.prod(dims))
    if extended * extended > trunc.max_dimension:
        raise DimensionError(
            "extended space exceeds the dimension guard; lower the Fock cutoffs",
            {"vectorized_dim": extended * extended, "max_dimension": trunc.max_dimension},
        )


class _Operators:
    """System and ladder operators embedded in the extended space."""

    def __init__(self, model: SystemModel, cutoffs: Sequence[int]):
        self.dims = (model.dim,) + tuple(c + 1 for c in cutoffs)
        self.H = embed(model.H, 0, self.dims)
        self.S = embed(model.S, 0, self.dims)
        self.a = [embed(annihilation(c), k + 1, self.dims) for k, c in enumerate(cutoffs)]
        self.identity = sp.identity(int(np.prod(self.dims)), dtype=complex, format="csr")

    def dag(self, op: sp.spmatrix) -> sp.csr_matrix:
        return op.conj().T.tocsr()

    def linear(self, coeffs: np.ndarray, ops: List[sp.spmatrix]) -> sp.csr_matrix:
        out = sp.csr_matrix(self.identity.shape, dtype=complex)
        for c, op in zip(coeffs, ops):
            if c != 0:
                out = out + complex(c) * op
        return out

    def bilinear(self, matrix: np.ndarray) -> sp.csr_matrix:
        """Σ_jk M_jk a_j† a_k."""
        out = sp.csr_matrix(self.identity.shape, dtype=complex)
        for j, aj in enumerate(self.a):
            aj_dag = self.dag(aj)
            for k, ak in enumerate(self.a):
                if matrix[j, k] != 0:
                    out = out + complex(matrix[j, k]) * (aj_dag @ ak)
        return out


def kossakowski_dissipator(jumps: Sequence[sp.spmatrix], C: np.ndarray) -> sp.csr_matrix:
    """Σ_jk 𝒞_jk (2 f_k ρ f_j† − {f_j† f_k, ρ})."""
    shape = left_superop(jumps[0]).shape
    out = sp.csr_matrix(shape, dtype=complex)
    for j, fj in enumerate(jumps):
        for k, fk in enumerate(jumps):
            if C[j, k] != 0:
                out = out + complex(C[j, k]) * dissipator(fk, fj)
    return out


def quasi_lindblad_kossakowski(modeset: EffectiveModeSet, gamma_s: float = 0.0) -> np.ndarray:
    """
    Block matrix 𝒞 = [[γ_s, iκ_−†], [−iκ_−, Γ]] for jump operators (S, a_1, …, a_K).

    Indefinite in general; γ_s regularizes the system corner.
    """
    k = modeset.count
    C = np.zeros((k + 1, k + 1), dtype=complex)
    C[0, 0] = gamma_s
    C[0, 1:] = 1j * modeset.kappa_minus.conj()
    C[1:, 0] = -1j * modeset.kappa_minus
    C[1:, 1:] = modeset.gamma_matrix
    return C


def _first_form(ops: _Operators, modeset: EffectiveModeSet) -> sp.csr_matrix:
    root2 = math.sqrt(2.0)
    s_left, s_right = left_superop(ops.S), right_superop(ops.S)
    sc = (s_left + s_right) / root2
    sq = (s_left - s_right) / root2
    a_dag = [ops.dag(a) for a in ops.a]
    h_mode = ops.bilinear(modeset.E)
    # O = κ†a + a†η acts on the ket side; its adjoint on the bra side
    O = ops.linear(modeset.kappa.conj(), ops.a) + ops.linear(modeset.eta, a_dag)
    A = ops.linear(modeset.eta, a_dag)
    gen = -1j * commutator(ops.H)
    gen = gen - 1j * (left_superop(h_mode) - right_superop(ops.dag(h_mode)))
    gen = gen - 1j * (sq @ (left_superop(O) + right_superop(ops.dag(O))))
    gen = gen - 1j * (sc @ (left_superop(A) - right_superop(ops.dag(A))))
    return gen.tocsr()


def _mode_hamiltonian(ops: _Operators, modeset: EffectiveModeSet) -> sp.csr_matrix:
    """H_0 = H_s + S(a†κ_+ + κ_+†a) + a†Ωa."""
    a_dag = [ops.dag(a) for a in ops.a]
    coupling = ops.linear(modeset.kappa_plus, a_dag) + ops.linear(modeset.kappa_plus.conj(), ops.a)
    return (ops.H + ops.S @ coupling + ops.bilinear(modeset.omega_matrix)).tocsr()


def _second_form(ops: _Operators, modeset: EffectiveModeSet) -> sp.csr_matrix:
    h0 = _mode_hamiltonian(ops, modeset)
    gen = -1j * commutator(h0)
    s_left, s_right = left_superop(ops.S), right_superop(ops.S)
    for k, ak in enumerate(ops.a):
        km = modeset.kappa_minus[k]
        if km == 0:
            continue
        ak_dag = ops.dag(ak)
        gen = gen + 1j * np.conj(km) * (2.0 * (left_superop(ak) @ s_right) - anticommutator(ops.S @ ak))
        gen = gen - 1j * km * (2.0 * (s_left @ right_superop(ak_dag)) - anticommutator(ak_dag @ ops.S))
    gamma = modeset.gamma_matrix
    for j, aj in enumerate(ops.a):
        aj_dag = ops.dag(aj)
        for k, ak in enumerate(ops.a):
            if gamma[j, k] == 0:
                continue
            gen = gen + complex(gamma[j, k]) * (
                2.0 * (left_superop(ak) @ right_superop(aj_dag)) - anticommutator(aj_dag @ ak)
            )
    return gen.tocsr()


def _quasi_lindblad(ops: _Operators, modeset: EffectiveModeSet, gamma_s: float):
    C = quasi_lindblad_kossakowski(modeset, gamma_s)
    gen = -1j * commutator(_mode_hamiltonian(ops, modeset)) + kossakowski_dissipator([ops.S] + ops.a, C)
    return gen.tocsr(), C


def _require_lindblad_gauge(modeset: EffectiveModeSet, form: GeneratorForm) -> None:
    scale = max(1.0, float(np.abs(modeset.kappa).max(initial=0.0)))
    gap = float(np.abs(modeset.kappa - modeset.eta).max(initial=0.0))
    if gap > PRECONDITION_TOL * scale:
        raise StructuralError(f"{form.value} requires κ = η", {"max_difference": gap})


def _strict_lindblad(ops: _Operators, modeset: EffectiveModeSet):
    _require_lindblad_gauge(modeset, GeneratorForm.STRICT_LINDBLAD)
    scale = max(1.0, float(np.abs(modeset.E).max(initial=0.0)))
    if not modeset.is_diagonal(PRECONDITION_TOL * scale):
        raise StructuralError("strict-lindblad requires a diagonal mode matrix E")
    energies = np.diag(modeset.E)
    h0 = ops.H
    for k, ak in enumerate(ops.a):
        ak_dag = ops.dag(ak)
        kappa = complex(modeset.kappa[k])
        h0 = h0 + ops.S @ (kappa * ak_dag + np.conj(kappa) * ak) + float(energies[k].real) * (ak_dag @ ak)
    rates = np.diag(-energies.imag).astype(complex)
    gen = -1j * commutator(h0) + kossakowski_dissipator(ops.a, rates)
    return gen.tocsr(), rates


def _quasi_thermal(ops: _Operators, modes: QuasiThermalModes):
    h0 = ops.H
    for k, bk in enumerate(ops.a):
        bk_dag = ops.dag(bk)
        h0 = h0 + float(modes.omega[k]) * (bk_dag @ bk) + float(modes.g[k]) * (ops.S @ (bk + bk_dag))
    K = modes.count
    C = np.zeros((2 * K, 2 * K), dtype=complex)
    C[np.arange(K), np.arange(K)] = modes.gamma * (modes.n + 1.0)
    C[np.arange(K, 2 * K), np.arange(K, 2 * K)] = modes.gamma * modes.n
    jumps = ops.a + [ops.dag(b) for b in ops.a]
    gen = -1j * commutator(h0) + kossakowski_dissipator(jumps, C)
    return gen.tocsr(), C


def _chain_unitary(ops: _Operators, modeset: EffectiveModeSet):
    _require_lindblad_gauge(modeset, GeneratorForm.CHAIN_UNITARY)
    scale = max(1.0, float(np.abs(modeset.E).max(initial=0.0)))
    if np.abs(modeset.gamma_matrix).max(initial=0.0) > PRECONDITION_TOL * scale:
        raise StructuralError("chain-unitary requires a Hermitian mode matrix (Γ = 0)")
    a_dag = [ops.dag(a) for a in ops.a]
    coupling = ops.linear(modeset.kappa, a_dag) + ops.linear(modeset.kappa.conj(), ops.a)
    hamiltonian = (ops.H + ops.S @ coupling + ops.bilinear(modeset.omega_matrix)).tocsr()
    return (-1j * commutator(hamiltonian)).tocsr(), hamiltonian


def _trace_functional(form: GeneratorForm, dims: Sequence[int]) -> np.ndarray:
    extended = int(np.prod(dims))
    functional = np.zeros(extended * extended)
    if form == GeneratorForm.FIRST:
        rows = np.arange(dims[0]) * (extended // dims[0])
    else:
        rows = np.arange(extended)
    functional[rows + extended * rows] = 1.0
    return functional


def check_trace_preservation(
    matrix: sp.csr_matrix, form: GeneratorForm, dims: Sequence[int], seed: int = 0
) -> float:
    """
    Largest |d/dt Tr(reduced)| over random normalized extended states.

    Raises:
        StructuralError: If the defect exceeds tolerance
    """
    rng = np.random.default_rng(seed)
    functional = matrix.transpose().tocsr() @ _trace_functional(form, dims)
    defect = 0.0
    for _ in range(TRACE_CHECK_STATES):
        state = rng.standard_normal(matrix.shape[0]) + 1j * rng.standard_normal(matrix.shape[0])
        state /= np.linalg.norm(state)
        defect = max(defect, abs(complex(functional @ state)))
    scale = max(1.0, float(abs(matrix).max()) if matrix.nnz else 1.0)
    if defect > TRACE_CHECK_TOL * scale:
        raise StructuralError(
            f"{form.value} generator does not preserve the reduced trace",
            {"defect": defect, "scale": scale},
        )
    return defect


def _as_modeset(modes: ModeInput) -> EffectiveModeSet:
    if isinstance(modes, EffectiveModeSet):
        return modes
    if isinstance(modes, QuasiThermalModes):
        modes = modes.to_exponential()
    if isinstance(modes, ExponentialModes):
        return build_star_modeset(modes)
    raise SchemaError(f"unsupported mode input {type(modes).__name__}")


def build_extended_generator(
    model: SystemModel,
    modes: ModeInput,
    trunc: TruncationSpec,
    form: Union[GeneratorForm, str],
    gamma_s: float = 0.0,
    check_trace: bool = True,
) -> ExtendedGenerator:
    """
    Assemble one extended-space generator.

    Args:
        model: System model
        modes: Effective mode set; exponential or quasi-thermal modes are
            converted to a star set, except for the quasi-thermal form which
            needs quasi-thermal modes
        trunc: Fock cutoffs and dimension guard
        form: Generator form
        gamma_s: System corner of the quasi-Lindblad Kossakowski matrix
        check_trace: Verify trace preservation on random states

    Returns:
        ExtendedGenerator

    Raises:
        StructuralError: If a form precondition fails
        DimensionError: If the extended space exceeds the guard
    """
    form = GeneratorForm(form)
    if form == GeneratorForm.QUASI_THERMAL:
        if not isinstance(modes, QuasiThermalModes):
            raise StructuralError("quasi-thermal form requires quasi-thermal modes")
        count = modes.count
    else:
        modes = _as_modeset(modes)
        count = modes.count

    cutoffs = trunc.cutoffs_for(count)
    dims = (model.dim,) + tuple(c + 1 for c in cutoffs)
    _check_dimension(dims, trunc)

    with Timer(f"Build {form.value} generator", log=False) as timer:
        ops = _Operators(model, cutoffs)
        hamiltonian = None
        kossakowski = None
        occupations: Tuple[float, ...] = ()
        if form == GeneratorForm.FIRST:
            matrix = _first_form(ops, modes)
        elif form == GeneratorForm.SECOND:
            matrix = _second_form(ops, modes)
        elif form == GeneratorForm.QUASI_LINDBLAD:
            matrix, kossakowski = _quasi_lindblad(ops, modes, gamma_s)
        elif form == GeneratorForm.STRICT_LINDBLAD:
            matrix, kossakowski = _strict_lindblad(ops, modes)
        elif form == GeneratorForm.QUASI_THERMAL:
            matrix, kossakowski = _quasi_thermal(ops, modes)
            occupations = tuple(float(n) for n in modes.n)
        else:
            matrix, hamiltonian = _chain_unitary(ops, modes)
        matrix.eliminate_zeros()
        defect = check_trace_preservation(matrix, form, dims) if check_trace else 0.0

    logger.info(
        f"Built {form.value} generator: dims={dims}, size={matrix.shape[0]}, "
        f"nnz={matrix.nnz}, trace defect {defect:.2e} ({timer.elapsed():.3f}s)"
    )
    return ExtendedGenerator(
        form=form,
        matrix=matrix,
        dims=dims,
        hamiltonian=hamiltonian,
        kossakowski=kossakowski,
        occupations=occupations,
        trace_defect=defect,
    )
