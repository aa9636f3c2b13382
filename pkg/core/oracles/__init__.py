#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Oracles and validation: closed-form dephasing, brute-force discrete bath,
cross-backend comparison and the acceptance suite

Author: messkit developers
"""

from core.oracles.compare import ComparisonReport, common_grid, cross_compare
from core.oracles.dephasing import DEPHASING_PREFACTOR, dephasing_oracle, double_integral
from core.oracles.discretized import DiscreteBath, discretized_bath_oracle
from core.oracles.suite import (
    CHECKS,
    CheckOutcome,
    SuiteReport,
    SuiteSettings,
    lorentzian_fixture,
    noise_correlator_scores,
    run_suite,
)

__all__ = [
    "CHECKS",
    "DEPHASING_PREFACTOR",
    "CheckOutcome",
    "ComparisonReport",
    "DiscreteBath",
    "SuiteReport",
    "SuiteSettings",
    "common_grid",
    "cross_compare",
    "dephasing_oracle",
    "discretized_bath_oracle",
    "double_integral",
    "lorentzian_fixture",
    "noise_correlator_scores",
    "run_suite",
]
