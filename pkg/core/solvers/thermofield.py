#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Thermofield doubling of quasi-thermal modes

A thermal mode (g, n, ω, γ) is equivalent to two vacuum modes at ±ω with
couplings g√(n+1) and g√n, each with damping γ.

Author: messkit developers
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.modes import EffectiveModeSet, QuasiThermalModes, Topology
from core.solvers.integrator import IntegratorOptions
from core.solvers.pseudomode import propagate_generator
from core.solvers.results import PropagationResult
from core.statespace import ExtendedGenerator, GeneratorForm, SystemModel, TruncationSpec, build_extended_generator

# Setup logger
logger = logging.getLogger("core.solvers")

FLAG_NON_COMPARABLE = "truncation-mismatch"
FLAG_NOT_EQUIVALENT = "thermofield-deviation-above-tol"


class ThermofieldReport(BaseModel):
    """Both generators, their trajectories and the largest ρ_s deviation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    two_mode: ExtendedGenerator
    one_mode: ExtendedGenerator
    two_mode_result: Optional[PropagationResult] = None
    one_mode_result: Optional[PropagationResult] = None
    max_deviation: Optional[float] = None
    tolerance: float = 1e-7
    flags: Tuple[str, ...] = ()

    @property
    def comparable(self) -> bool:
        return FLAG_NON_COMPARABLE not in self.flags

    @property
    def equivalent(self) -> bool:
        return self.comparable and self.max_deviation is not None and self.max_deviation <= self.tolerance


def doubled_modeset(modes: QuasiThermalModes) -> EffectiveModeSet:
    """Vacuum pair per thermal mode: E = diag(ω − iγ, −ω − iγ), κ = η = (g√(n+1), g√n)."""
    energies = []
    couplings = []
    for g, n, w, gam in zip(modes.g, modes.n, modes.omega, modes.gamma):
        energies.extend([complex(w, -gam), complex(-w, -gam)])
        couplings.extend([g * math.sqrt(n + 1.0), g * math.sqrt(n)])
    couplings = np.array(couplings, dtype=complex)
    return EffectiveModeSet(E=np.diag(energies), kappa=couplings, eta=couplings.copy(), topology=Topology.STAR)


def squeezed_kossakowski(gamma: float, n: float) -> np.ndarray:
    """
    Kossakowski matrix in the squeezed frame (b, c, b†, c†).

    With cosh²θ = n + 1 and the two-mode squeezing
    a_1 = cosh θ b − sinh θ c†, a_2 = cosh θ c − sinh θ b†, the dissipator
    γ Σ_i D[a_i] becomes Σ_jk 𝒞_jk (2F_j ρ F_k† − {F_k†F_j, ρ}).
    """
    ch = math.sqrt(n + 1.0)
    sh = math.sqrt(n)
    U = np.array([[ch, 0.0, 0.0, -sh], [0.0, ch, -sh, 0.0]])
    return gamma * (U.T @ U.conj())


def _pair_cutoffs(cutoffs: Sequence[int], K: int) -> Tuple[int, ...]:
    """Broadcast one cutoff to all 2K vacuum modes, or one (+ω, −ω) pair to all K pairs."""
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) == 1:
        return cutoffs * (2 * K)
    if len(cutoffs) == 2 and K > 1:
        return cutoffs * K
    return cutoffs


def thermofield_transform(
    model: SystemModel,
    modes: QuasiThermalModes,
    two_mode_cutoffs: Sequence[int] = (6, 6),
    one_mode_cutoff: int = 24,
    times: Optional[Sequence[float]] = None,
    rho0: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    options: Optional[IntegratorOptions] = None,
) -> ThermofieldReport:
    """
    Build the two-mode vacuum and one-mode thermal generators and, given a
    time grid, compare their reduced dynamics.

    Truncation is matched when every one-mode cutoff is at least the cutoff
    of its vacuum partner at +ω; otherwise the report is flagged as not
    comparable and no deviation is computed.
    """
    K = modes.count
    pair_cutoffs = _pair_cutoffs(two_mode_cutoffs, K)
    thermal_cutoffs = (one_mode_cutoff,) * K
    two_mode = build_extended_generator(
        model, doubled_modeset(modes), TruncationSpec(cutoffs=pair_cutoffs), GeneratorForm.STRICT_LINDBLAD
    )
    one_mode = build_extended_generator(
        model, modes, TruncationSpec(cutoffs=thermal_cutoffs), GeneratorForm.QUASI_THERMAL
    )

    flags = []
    if any(thermal_cutoffs[k] < pair_cutoffs[2 * k] for k in range(K)):
        flags.append(FLAG_NON_COMPARABLE)
    if times is None or FLAG_NON_COMPARABLE in flags:
        return ThermofieldReport(two_mode=two_mode, one_mode=one_mode, tolerance=tol, flags=tuple(flags))

    if rho0 is None:
        rho0 = np.zeros((model.dim, model.dim), dtype=complex)
        rho0[0, 0] = 1.0
    doubled = propagate_generator(two_mode, times, rho0, options, backend="thermofield-two-mode")
    thermal = propagate_generator(one_mode, times, rho0, options, backend="thermofield-one-mode")
    deviation = doubled.max_deviation(thermal)
    if deviation > tol:
        flags.append(FLAG_NOT_EQUIVALENT)
        logger.warning(f"Thermofield generators differ by {deviation:.3e} > {tol:.1e}")
    else:
        logger.info(f"Thermofield generators agree to {deviation:.3e}")
    return ThermofieldReport(
        two_mode=two_mode,
        one_mode=one_mode,
        two_mode_result=doubled,
        one_mode_result=thermal,
        max_deviation=deviation,
        tolerance=tol,
        flags=tuple(flags),
    )
