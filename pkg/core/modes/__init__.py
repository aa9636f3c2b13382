#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Mode decomposition: rational fits, exponential modes, mode sets and chains

Author: messkit developers
"""

from core.modes.aaa import (
    DEFAULT_M_MAX,
    DEFAULT_TOL,
    FLAG_TOL_NOT_REACHED,
    BarycentricRational,
    aaa_fit,
)
from core.modes.chain import (
    FLAG_TRUNCATED,
    ChainCoefficients,
    TerminalBathSpec,
    TerminalKind,
    chain_closure_spectrum,
    chain_map,
    chain_map_measure,
    chain_modeset,
)
from core.modes.exponential import (
    BrownianRegime,
    ExponentialModes,
    IkedaModes,
    brownian_ikeda_modes,
    candidate_grid,
    extract_exponential_modes,
    fit_exponential_modes,
    ikeda_split,
)
from core.modes.modeset import (
    EffectiveModeSet,
    Topology,
    build_star_modeset,
    lindblad_gauge,
    reconstruct,
    reconstruct_correlation,
    reconstruct_spectrum,
    transform_modeset,
    tridiagonalize,
)
from core.modes.quasithermal import FLAG_RESIDUAL, QuasiThermalModes, quasi_thermal_fit

__all__ = [
    "DEFAULT_M_MAX",
    "DEFAULT_TOL",
    "FLAG_RESIDUAL",
    "FLAG_TOL_NOT_REACHED",
    "FLAG_TRUNCATED",
    "BarycentricRational",
    "BrownianRegime",
    "ChainCoefficients",
    "EffectiveModeSet",
    "ExponentialModes",
    "IkedaModes",
    "QuasiThermalModes",
    "TerminalBathSpec",
    "TerminalKind",
    "Topology",
    "aaa_fit",
    "brownian_ikeda_modes",
    "build_star_modeset",
    "candidate_grid",
    "chain_closure_spectrum",
    "chain_map",
    "chain_map_measure",
    "chain_modeset",
    "extract_exponential_modes",
    "fit_exponential_modes",
    "ikeda_split",
    "lindblad_gauge",
    "quasi_thermal_fit",
    "reconstruct",
    "reconstruct_correlation",
    "reconstruct_spectrum",
    "transform_modeset",
    "tridiagonalize",
]
