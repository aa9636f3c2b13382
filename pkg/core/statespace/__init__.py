#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
State space: system model, superoperators and extended generators

Author: messkit developers
"""

from core.statespace.generators import (
    ExtendedGenerator,
    GeneratorForm,
    build_extended_generator,
    check_trace_preservation,
    kossakowski_dissipator,
    project_reduced_state,
    quasi_lindblad_kossakowski,
)
from core.statespace.system import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    SystemModel,
    TruncationSpec,
    annihilation,
    anticommutator,
    apply_superops,
    commutator,
    dissipator,
    embed,
    hierarchy_size,
    left_superop,
    random_density_matrix,
    right_superop,
    thermal_populations,
    unvec,
    vec,
)

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "ExtendedGenerator",
    "GeneratorForm",
    "SystemModel",
    "TruncationSpec",
    "annihilation",
    "anticommutator",
    "apply_superops",
    "build_extended_generator",
    "check_trace_preservation",
    "commutator",
    "dissipator",
    "embed",
    "hierarchy_size",
    "kossakowski_dissipator",
    "left_superop",
    "project_reduced_state",
    "quasi_lindblad_kossakowski",
    "random_density_matrix",
    "right_superop",
    "thermal_populations",
    "unvec",
    "vec",
]
