#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Deterministic solvers: integrator, HEOM, pseudomodes, thermofield, TCL2

Author: messkit developers
"""

from core.solvers.heom import (
    HeomVariant,
    HierarchyState,
    build_heom_generator,
    convergence_check,
    enumerate_indices,
    heom_propagate,
)
from core.solvers.integrator import IntegratorOptions, dopri5, expm_propagate, propagate_linear
from core.solvers.pseudomode import cutoff_convergence, propagate_generator, pseudomode_propagate
from core.solvers.results import (
    FLAG_CUTOFF,
    FLAG_DEPTH,
    FLAG_POSITIVITY,
    FLAG_RECURRENCE,
    FLAG_TRACE_DRIFT,
    FLAG_VARIANCE,
    PropagationResult,
)
from core.solvers.tcl2 import memory_kernel, tcl2_propagate
from core.solvers.thermofield import (
    ThermofieldReport,
    doubled_modeset,
    squeezed_kossakowski,
    thermofield_transform,
)

__all__ = [
    "FLAG_CUTOFF",
    "FLAG_DEPTH",
    "FLAG_POSITIVITY",
    "FLAG_RECURRENCE",
    "FLAG_TRACE_DRIFT",
    "FLAG_VARIANCE",
    "HeomVariant",
    "HierarchyState",
    "IntegratorOptions",
    "PropagationResult",
    "ThermofieldReport",
    "build_heom_generator",
    "convergence_check",
    "cutoff_convergence",
    "dopri5",
    "doubled_modeset",
    "enumerate_indices",
    "expm_propagate",
    "heom_propagate",
    "memory_kernel",
    "propagate_generator",
    "propagate_linear",
    "pseudomode_propagate",
    "squeezed_kossakowski",
    "tcl2_propagate",
    "thermofield_transform",
]
