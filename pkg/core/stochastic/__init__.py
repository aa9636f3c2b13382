#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Stochastic unravelings: SLN noise pairs, SLN and HOPS trajectory ensembles

Author: messkit developers
"""

from core.stochastic.ensemble import (
    BLOCK_SIZE,
    DEFAULT_STDERR_BOUND,
    TrajectoryEnsemble,
    run_ensemble,
    trajectory_rng,
)
from core.stochastic.hops import HopsHierarchy, hops_propagate_ensemble, integrate_hops
from core.stochastic.noise import (
    NoiseConstruction,
    SLNNoisePair,
    complex_normal,
    generate_hops_noise,
    generate_sln_noise,
    uniform_step,
)
from core.stochastic.sln import integrate_sln, refined_grid, sln_propagate_ensemble

__all__ = [
    "BLOCK_SIZE",
    "DEFAULT_STDERR_BOUND",
    "HopsHierarchy",
    "NoiseConstruction",
    "SLNNoisePair",
    "TrajectoryEnsemble",
    "complex_normal",
    "generate_hops_noise",
    "generate_sln_noise",
    "hops_propagate_ensemble",
    "integrate_hops",
    "integrate_sln",
    "refined_grid",
    "run_ensemble",
    "sln_propagate_ensemble",
    "trajectory_rng",
    "uniform_step",
]
