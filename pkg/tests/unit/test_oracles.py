#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for Oracles Module
Author: messkit developers
"""

import math
import os
import shutil
import sys
import tempfile
import unittest

import numpy as np
import scipy.linalg
from pydantic import ValidationError

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.modes import ExponentialModes
from core.oracles import (
    CHECKS, CheckOutcome, DiscreteBath, SuiteSettings, common_grid, cross_compare, dephasing_oracle,
    discretized_bath_oracle, double_integral, lorentzian_fixture, noise_correlator_scores, run_suite
)
from core.solvers import FLAG_RECURRENCE, IntegratorOptions, PropagationResult, heom_propagate
from core.statespace import SystemModel, TruncationSpec
from core.stochastic import NoiseConstruction
from core.utils import DimensionError, PreconditionError, SchemaError


class _Constant:
    def evaluate(self, t):
        return np.ones(np.shape(t), dtype=complex)


def _result(times, scale=1.0, stderr=None, backend="a"):
    times = np.asarray(times, dtype=float)
    states = np.zeros((times.size, 2, 2), dtype=complex)
    states[:, 0, 0] = 0.5 + 0.5 * scale * np.cos(times)
    states[:, 1, 1] = 1.0 - states[:, 0, 0]
    err = None if stderr is None else np.full(states.shape, stderr)
    return PropagationResult(times=times, states=states, stderr=err, backend=backend)


class TestDephasingOracle(unittest.TestCase):
    """Test cases for the closed-form dephasing dynamics."""

    def setUp(self):
        self.model = SystemModel.dephasing(1.0)
        self.modes = lorentzian_fixture()
        self.rho0 = np.full((2, 2), 0.5, dtype=complex)
        self.times = np.linspace(0.0, 5.0, 26)

    def test_double_integral(self):
        times = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(double_integral(_Constant(), times), times ** 2 / 2.0, atol=1e-12)

    def test_matches_heom(self):
        oracle = dephasing_oracle(self.model, self.modes, self.times, self.rho0)
        heom = heom_propagate(
            self.model, self.modes, TruncationSpec(depth=10), self.times, self.rho0,
            options=IntegratorOptions(rtol=1e-10, atol=1e-12),
        )
        self.assertLess(float(np.max(np.abs(oracle.element(0, 1) - heom.element(0, 1)))), 1e-5)
        np.testing.assert_allclose(oracle.populations(), 0.5, atol=1e-14)
        self.assertEqual(oracle.backend, "oracle-dephasing")

    def test_coherence_decays(self):
        oracle = dephasing_oracle(self.model, self.modes, self.times, self.rho0)
        coherence = np.abs(oracle.element(0, 1))
        self.assertAlmostEqual(coherence[0], 0.5)
        self.assertLess(coherence[-1], coherence[0])

    def test_needs_commuting_system(self):
        with self.assertRaises(PreconditionError):
            dephasing_oracle(SystemModel.spin_boson(1.0, 0.5), self.modes, self.times, self.rho0)

    def test_grid_validation(self):
        with self.assertRaises(SchemaError):
            dephasing_oracle(self.model, self.modes, [0.0, 1.0, 0.5], self.rho0)


class TestDiscreteBath(unittest.TestCase):
    """Test cases for the discretized-bath oracle."""

    def setUp(self):
        self.model = SystemModel.spin_boson(1.0, 0.5)
        self.bath = DiscreteBath(g=[0.1, 0.1], omega=[1.0, 1.5])
        self.rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)

    def test_correlation(self):
        self.assertAlmostEqual(self.bath.correlation(0.0), 0.02)
        hot = DiscreteBath(g=[0.1], omega=[1.0], beta=1.0)
        n = 1.0 / math.expm1(1.0)
        self.assertAlmostEqual(hot.correlation(0.0).real, 0.01 * (2.0 * n + 1.0))
        t = np.linspace(0.0, 3.0, 7)
        np.testing.assert_allclose(hot.to_exponential().correlation(t), hot.correlation(t), atol=1e-14)
        self.assertEqual(hot.to_exponential().count, 2)
        self.assertEqual(self.bath.to_exponential().count, 2)

    def test_recurrence_time(self):
        self.assertAlmostEqual(self.bath.recurrence_time(), 4.0 * math.pi)

    def test_validation(self):
        with self.assertRaises(ValidationError):
            DiscreteBath(g=[0.1] * 7, omega=[1.0] * 7)
        with self.assertRaises(ValidationError):
            DiscreteBath(g=[0.1], omega=[0.0])

    def test_uncoupled_is_unitary(self):
        bath = DiscreteBath(g=[0.0], omega=[1.0])
        times = np.linspace(0.0, 1.0, 6)
        result = discretized_bath_oracle(self.model, bath, 3, times, self.rho0)
        for t, rho in zip(times, result.states):
            U = scipy.linalg.expm(-1j * self.model.H * t)
            np.testing.assert_allclose(rho, U @ self.rho0 @ U.conj().T, atol=1e-10)

    def test_mixed_and_thermal_states(self):
        """Purified initial states reproduce ρ_s(0) and keep the trace."""
        rho0 = np.array([[0.7, 0.1], [0.1, 0.3]], dtype=complex)
        hot = DiscreteBath(g=[0.1], omega=[1.0], beta=2.0)
        times = np.linspace(0.0, 1.0, 5)
        result = discretized_bath_oracle(self.model, hot, 4, times, rho0)
        np.testing.assert_allclose(result.states[0], rho0, atol=1e-12)
        self.assertLess(result.trace_drift(), 1e-10)
        self.assertEqual(result.diagnostics["dimension"], 2 * 2 * 5 * 5)

    def test_recurrence_flag(self):
        late = np.linspace(0.0, 0.5 * self.bath.recurrence_time(), 5)
        result = discretized_bath_oracle(self.model, self.bath, 3, late, self.rho0)
        self.assertIn(FLAG_RECURRENCE, result.flags)
        early = np.linspace(0.0, 1.0, 5)
        self.assertEqual(discretized_bath_oracle(self.model, self.bath, 3, early, self.rho0).flags, ())

    def test_guards(self):
        times = np.linspace(0.0, 1.0, 3)
        with self.assertRaises(DimensionError):
            discretized_bath_oracle(self.model, self.bath, 8, times, self.rho0, max_dimension=100)
        with self.assertRaises(SchemaError):
            discretized_bath_oracle(self.model, self.bath, [3], times, self.rho0)


class TestCrossCompare(unittest.TestCase):
    """Test cases for cross-backend comparison."""

    def test_common_grid(self):
        grid = common_grid(np.array([0.0, 1.0, 2.0]), np.array([0.5, 1.5, 2.5]))
        np.testing.assert_allclose(grid, [0.5, 1.0, 1.5, 2.0])
        with self.assertRaises(SchemaError):
            common_grid(np.array([0.0, 1.0]), np.array([2.0, 3.0]))

    def test_identical(self):
        a = _result(np.linspace(0.0, 2.0, 11), backend="b")
        report = cross_compare(a, a)
        self.assertEqual(report.max_deviation, 0.0)
        self.assertTrue(report.passed)
        self.assertFalse(report.sigma_units)

    def test_symmetric(self):
        a = _result(np.linspace(0.0, 2.0, 11), backend="zeta")
        b = _result(np.linspace(0.0, 2.0, 21), scale=0.99, backend="alpha")
        ab = cross_compare(a, b)
        ba = cross_compare(b, a)
        self.assertEqual(ab.labels, ["alpha", "zeta"])
        self.assertEqual(ab.labels, ba.labels)
        self.assertAlmostEqual(ab.max_deviation, ba.max_deviation, places=12)
        self.assertEqual(ab.times.size, 21)
        self.assertFalse(ab.passed)
        self.assertTrue(ab.lines()[0].startswith("alpha~zeta:rho_00"))

    def test_sigma_units(self):
        times = np.linspace(0.0, 1.0, 5)
        exact = _result(times)
        noisy = _result(times, scale=1.01, stderr=0.01 + 0.01j, backend="sln")
        report = cross_compare(noisy, exact, sigma=3.0)
        self.assertTrue(report.sigma_units)
        self.assertAlmostEqual(report.max_deviation, 0.5, places=9)
        self.assertTrue(report.passed)

    def test_zero_error_with_difference(self):
        times = np.linspace(0.0, 1.0, 5)
        report = cross_compare(_result(times, scale=0.5, stderr=0.0), _result(times))
        self.assertTrue(math.isinf(report.max_deviation))
        self.assertFalse(report.passed)

    def test_dimension_mismatch(self):
        times = np.array([0.0, 1.0])
        big = PropagationResult(times=times, states=np.zeros((2, 3, 3)))
        with self.assertRaises(SchemaError):
            cross_compare(_result(times), big)


class TestSuite(unittest.TestCase):
    """Test cases for the acceptance suite runner."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_check_names(self):
        self.assertEqual(len(CHECKS), 12)
        self.assertIn("chain-vs-star", CHECKS)

    def test_unknown_check(self):
        with self.assertRaises(SchemaError):
            run_suite(["detailed-balance", "warp-drive"])

    def test_outcome_line(self):
        outcome = CheckOutcome(name="x", metric=1.5e-7, tolerance=1e-6, passed=True)
        self.assertEqual(outcome.line(), "x 1.500000e-07 1.000e-06 PASS")

    def test_subset_with_report(self):
        settings = SuiteSettings(out_dir=self.temp_dir)
        report = run_suite(["detailed-balance", "dephasing"], settings)
        self.assertTrue(report.passed, report.lines())
        self.assertEqual(len(report.outcomes), 5)
        with open(os.path.join(self.temp_dir, "suite_report.txt")) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines, report.lines())

    def test_noise_scores(self):
        modes = ExponentialModes.single(0.04, 0.5 + 1.0j)
        scores = noise_correlator_scores(modes, 200, 3, NoiseConstruction.OU_UNRAVELING, lags=5)
        self.assertEqual(sorted(scores), ["cc", "cq", "qc", "qq"])
        for values in scores.values():
            self.assertEqual(values.shape, (10,))
            self.assertTrue(np.all(np.isfinite(values)))

    def test_noise_correlators_within_three_sigma(self):
        modes = lorentzian_fixture()
        for construction in NoiseConstruction:
            scores = noise_correlator_scores(modes, 20_000, 11, construction, lags=20)
            for name, values in scores.items():
                with self.subTest(construction=construction.value, correlator=name):
                    self.assertLessEqual(float(np.mean(values > 3.0)), 0.05)


if __name__ == '__main__':
    unittest.main()
