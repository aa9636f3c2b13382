#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for Solvers Module
Author: messkit developers
"""

import os
import sys
import unittest
from unittest import mock

import numpy as np
import scipy.linalg
from pydantic import ValidationError

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.modes import ExponentialModes, QuasiThermalModes
from core.solvers import (
    FLAG_CUTOFF, FLAG_DEPTH, IntegratorOptions, PropagationResult, convergence_check, cutoff_convergence,
    dopri5, doubled_modeset, enumerate_indices, expm_propagate, heom_propagate, memory_kernel,
    propagate_linear, pseudomode_propagate, squeezed_kossakowski, tcl2_propagate, thermofield_transform
)
from core.solvers.heom import HierarchyState, _Watchdog, build_heom_generator
from core.statespace import PAULI_Z, GeneratorForm, SystemModel, TruncationSpec
from core.utils import (
    AccuracyError, ConvergenceError, DimensionError, InstabilityError, PreconditionError, SchemaError
)


def _rho_up() -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


class TestIntegrator(unittest.TestCase):
    """Test cases for the linear propagators."""

    def setUp(self):
        self.A = np.array([[-0.1, 1.0], [-1.0, -0.2]], dtype=complex)
        self.y0 = np.array([1.0, 0.5j])
        self.times = np.linspace(0.0, 3.0, 13)
        self.exact = np.array([scipy.linalg.expm(self.A * t) @ self.y0 for t in self.times])

    def test_dopri5_matches_exponential(self):
        out, stats = dopri5(lambda t, y: self.A @ y, self.y0, self.times)
        np.testing.assert_allclose(out, self.exact, atol=1e-8)
        self.assertGreater(stats["accepted"], 0)

    def test_expm_matches_exponential(self):
        out, _ = expm_propagate(self.A, self.y0, self.times)
        np.testing.assert_allclose(out, self.exact, atol=1e-12)
        out, _ = propagate_linear(self.A, self.y0, self.times, IntegratorOptions(method="expm"))
        np.testing.assert_allclose(out, self.exact, atol=1e-12)

    def test_post_step_hook(self):
        calls = []

        def hook(t, y):
            calls.append(t)
            return y

        dopri5(lambda t, y: self.A @ y, self.y0, self.times, post_step=hook)
        for t in self.times[1:]:
            self.assertIn(t, calls)

    def test_grid_validation(self):
        with self.assertRaises(SchemaError):
            dopri5(lambda t, y: y, self.y0, [0.0, 1.0, 0.5])

    def test_step_budget(self):
        with self.assertRaises(ConvergenceError):
            dopri5(lambda t, y: self.A @ y, self.y0, self.times, IntegratorOptions(max_steps=2))


class TestPropagationResult(unittest.TestCase):
    """Test cases for PropagationResult."""

    def setUp(self):
        times = np.array([0.0, 0.5, 1.0])
        states = np.array([_rho_up(), np.diag([0.8, 0.2]), np.diag([0.6, 0.4])], dtype=complex)
        self.result = PropagationResult(times=times, states=states, backend="test")

    def test_observables(self):
        np.testing.assert_allclose(self.result.expectation(PAULI_Z), [1.0, 0.6, 0.2])
        np.testing.assert_allclose(self.result.populations()[:, 1], [0.0, 0.2, 0.4])
        self.assertEqual(self.result.trace_drift(), 0.0)
        self.assertEqual(self.result.hermiticity_error(), 0.0)
        self.assertAlmostEqual(self.result.min_eigenvalue(), 0.0)
        with self.assertRaises(SchemaError):
            self.result.expectation(np.eye(3))

    def test_lookup_on_grid(self):
        np.testing.assert_array_equal(self.result.at(0.5), np.diag([0.8, 0.2]))
        with self.assertRaises(SchemaError):
            self.result.at(0.25)

    def test_flags_deduplicated(self):
        flagged = self.result.with_flags("a", "b", "a", note=1)
        self.assertEqual(flagged.flags, ("a", "b"))
        self.assertEqual(flagged.diagnostics["note"], 1)
        self.assertTrue(flagged.flagged)
        self.assertFalse(self.result.flagged)

    def test_deviation_needs_same_grid(self):
        other = PropagationResult(times=[0.0, 0.4, 1.0], states=self.result.states)
        with self.assertRaises(SchemaError):
            self.result.max_deviation(other)
        self.assertEqual(self.result.max_deviation(self.result), 0.0)

    def test_shape_validation(self):
        with self.assertRaises(ValidationError):
            PropagationResult(times=[0.0, 1.0], states=self.result.states)


class TestHeom(unittest.TestCase):
    """Test cases for the hierarchy backends."""

    def setUp(self):
        self.model = SystemModel.spin_boson(1.0, 0.5)
        self.modes = ExponentialModes(d=[0.01], z=[0.5 + 1.0j])
        self.times = np.linspace(0.0, 4.0, 21)
        self.trunc = TruncationSpec(depth=6, cutoffs=6)

    def test_indices_level_ordered(self):
        indices = enumerate_indices(2, 2)
        self.assertEqual(indices[0], (0, 0))
        self.assertEqual(len(indices), 6)
        self.assertEqual([sum(i) for i in indices], [0, 1, 1, 2, 2, 2])

    def test_root_ado(self):
        state, matrix = build_heom_generator(self.model, self.modes, TruncationSpec(depth=2))
        self.assertIsInstance(state, HierarchyState)
        self.assertEqual(matrix.shape, (state.count * 4, state.count * 4))
        rho = np.diag([0.3, 0.7]).astype(complex)
        initial = state.initial(rho)
        np.testing.assert_array_equal(initial.ado((0, 0)), rho)
        self.assertFalse(np.any(initial.ado((1, 0))))

    def test_trace_preserved(self):
        result = heom_propagate(self.model, self.modes, self.trunc, self.times, _rho_up())
        self.assertEqual(result.backend, "heom-generalized")
        self.assertLess(result.trace_drift(), 1e-8)
        self.assertEqual(result.flags, ())

    def test_matches_pseudomodes(self):
        """Generalized and Ikeda hierarchies agree with the quasi-Lindblad pseudomode generator."""
        reference = pseudomode_propagate(self.model, self.modes, self.trunc, self.times, _rho_up())
        for variant in ("generalized", "ikeda"):
            with self.subTest(variant=variant):
                result = heom_propagate(self.model, self.modes, self.trunc, self.times, _rho_up(), variant)
                self.assertLess(result.max_deviation(reference), 1e-4)

    def test_standard_variant(self):
        with self.assertRaises(PreconditionError):
            heom_propagate(self.model, self.modes, self.trunc, self.times, _rho_up(), "standard")

        overdamped = ExponentialModes(d=[0.01 - 0.002j], z=[0.8])
        standard = heom_propagate(self.model, overdamped, self.trunc, self.times, _rho_up(), "standard")
        generalized = heom_propagate(self.model, overdamped, self.trunc, self.times, _rho_up())
        self.assertLess(standard.max_deviation(generalized), 1e-5)

    def test_filtering_is_harmless(self):
        threshold = 1e-8
        plain = heom_propagate(self.model, self.modes, self.trunc, self.times, _rho_up())
        filtered = heom_propagate(
            self.model, self.modes, self.trunc.model_copy(update={"filter_threshold": threshold}),
            self.times, _rho_up()
        )
        self.assertIn("filter_discards", filtered.diagnostics)
        bound = 10.0 * threshold * filtered.diagnostics["ado_count"]
        self.assertLess(np.max(np.abs(filtered.states[-1] - plain.states[-1])), bound)

    def test_norm_watchdog(self):
        watchdog = _Watchdog(count=3, block=4, threshold=0.0, initial_norm=1.0)
        y = np.zeros(12, dtype=complex)
        y[0] = 1.0
        np.testing.assert_array_equal(watchdog(0.1, y), y)
        y[5] = 2e6
        with self.assertRaises(InstabilityError):
            watchdog(0.2, y)
        y[5] = np.nan
        with self.assertRaises(InstabilityError):
            watchdog(0.3, y)

    def test_dimension_guard(self):
        with self.assertRaises(DimensionError):
            heom_propagate(self.model, self.modes, TruncationSpec(depth=6, max_dimension=50), self.times, _rho_up())

    def test_convergence_check(self):
        result = convergence_check(self.model, self.modes, TruncationSpec(depth=4), self.times, _rho_up())
        self.assertEqual(result.metadata["depth"], 5)
        self.assertIn("depth_difference", result.diagnostics)
        self.assertNotIn(FLAG_DEPTH, result.flags)

    def test_initial_state_shape(self):
        with self.assertRaises(SchemaError):
            heom_propagate(self.model, self.modes, self.trunc, self.times, np.eye(3))


class TestPseudomode(unittest.TestCase):
    """Test cases for pseudomode propagation."""

    def setUp(self):
        self.model = SystemModel.spin_boson(1.0, 0.5)
        self.modes = ExponentialModes(d=[0.01], z=[0.5 + 1.0j])
        self.times = np.linspace(0.0, 2.0, 11)

    def test_cutoff_convergence(self):
        result = cutoff_convergence(self.model, self.modes, TruncationSpec(cutoffs=4), self.times, _rho_up())
        self.assertEqual(result.metadata["cutoffs"], [8])
        self.assertNotIn(FLAG_CUTOFF, result.flags)
        self.assertLess(result.diagnostics["cutoff_difference"], 1e-4)

    def test_pure_state_needs_unitary_form(self):
        with self.assertRaises(SchemaError):
            pseudomode_propagate(
                self.model, self.modes, TruncationSpec(cutoffs=4), self.times, _rho_up(), pure_state=True
            )

    def test_expm_and_dopri5_agree(self):
        trunc = TruncationSpec(cutoffs=4)
        adaptive = pseudomode_propagate(self.model, self.modes, trunc, self.times, _rho_up(), GeneratorForm.SECOND)
        exact = pseudomode_propagate(
            self.model, self.modes, trunc, self.times, _rho_up(), GeneratorForm.SECOND,
            options=IntegratorOptions(method="expm"),
        )
        self.assertLess(adaptive.max_deviation(exact), 1e-7)


class TestTcl2(unittest.TestCase):
    """Test cases for the second-order time-nonlocal equation."""

    def setUp(self):
        self.model = SystemModel.spin_boson(1.0, 0.5)
        self.modes = ExponentialModes(d=[0.002], z=[0.5 + 1.0j])
        self.times = np.linspace(0.0, 2.0, 11)

    def test_kernel_shape(self):
        kernels = memory_kernel(self.model, self.modes, np.linspace(0.0, 1.0, 5))
        self.assertEqual(kernels.shape, (5, 4, 4))

    def test_weak_coupling_matches_heom(self):
        result = tcl2_propagate(self.model, self.modes, self.times, _rho_up())
        reference = heom_propagate(self.model, self.modes, TruncationSpec(depth=6), self.times, _rho_up())
        self.assertEqual(result.backend, "tcl2")
        self.assertLess(result.max_deviation(reference), 1e-3)
        self.assertLess(result.trace_drift(), 1e-8)

    def test_accuracy_error(self):
        with self.assertRaises(AccuracyError):
            tcl2_propagate(self.model, self.modes, self.times, _rho_up(), max_step=0.5, accuracy_tol=1e-8)

    def test_memory_window_bounds_storage(self):
        times = np.linspace(0.0, 40.0, 41)
        with mock.patch("core.solvers.tcl2.memory_kernel", wraps=memory_kernel) as kernel:
            result = tcl2_propagate(
                self.model, self.modes, times, _rho_up(), max_step=0.05, memory_time=2.0, accuracy_tol=1.0
            )
        lags = kernel.call_args[0][2]
        self.assertEqual(lags.size, 81)
        self.assertLessEqual(lags[-1], 2.0 + 0.05)
        self.assertEqual(result.diagnostics["history_length"], 81)
        self.assertLess(result.diagnostics["history_length"], result.diagnostics["steps"])

    def test_long_window_matches_full_history(self):
        times = np.linspace(0.0, 30.0, 31)
        full = tcl2_propagate(self.model, self.modes, times, _rho_up(), max_step=0.05, accuracy_tol=1.0)
        windowed = tcl2_propagate(
            self.model, self.modes, times, _rho_up(), max_step=0.05, memory_time=26.0, accuracy_tol=1.0
        )
        self.assertLess(windowed.max_deviation(full), 1e-6)
        self.assertEqual(full.diagnostics["history_length"], full.diagnostics["steps"] + 1)

    def test_grid_must_start_at_zero(self):
        with self.assertRaises(SchemaError):
            tcl2_propagate(self.model, self.modes, self.times + 0.1, _rho_up())


class TestThermofield(unittest.TestCase):
    """Test cases for the thermofield transformation."""

    def setUp(self):
        self.model = SystemModel.spin_boson(1.0, 0.5)
        self.modes = QuasiThermalModes.single(0.1, 0.5, 1.0, 0.4)

    def test_doubled_modeset(self):
        modeset = doubled_modeset(self.modes)
        self.assertEqual(modeset.count, 2)
        np.testing.assert_allclose(np.diag(modeset.E), [1.0 - 0.4j, -1.0 - 0.4j])
        np.testing.assert_allclose(modeset.kappa, [0.1 * np.sqrt(1.5), 0.1 * np.sqrt(0.5)])

    def test_squeezed_kossakowski(self):
        C = squeezed_kossakowski(0.4, 0.5)
        np.testing.assert_allclose(C, C.conj().T)
        self.assertGreaterEqual(np.linalg.eigvalsh(C).min(), -1e-14)
        self.assertLess(C[0, 3].real, 0.0)

    def test_generators_agree(self):
        report = thermofield_transform(
            self.model, self.modes, two_mode_cutoffs=(4, 4), one_mode_cutoff=8,
            times=np.linspace(0.0, 2.0, 11), rho0=_rho_up(), tol=1e-4,
        )
        self.assertTrue(report.comparable)
        self.assertTrue(report.equivalent)
        self.assertEqual(report.two_mode.dims, (2, 5, 5))
        self.assertIsNotNone(report.one_mode_result)

    def test_single_cutoff_covers_every_vacuum_mode(self):
        modes = QuasiThermalModes(g=[0.1, 0.05], n=[0.5, 0.2], omega=[1.0, 2.0], gamma=[0.4, 0.3])
        report = thermofield_transform(self.model, modes, two_mode_cutoffs=(3,), one_mode_cutoff=4)
        self.assertTrue(report.comparable)
        self.assertEqual(report.two_mode.dims, (2, 4, 4, 4, 4))
        self.assertEqual(report.one_mode.dims, (2, 5, 5))

    def test_mismatched_truncation(self):
        report = thermofield_transform(
            self.model, self.modes, two_mode_cutoffs=(4, 4), one_mode_cutoff=2, times=[0.0, 1.0]
        )
        self.assertFalse(report.comparable)
        self.assertIsNone(report.max_deviation)
        self.assertIsNone(report.one_mode_result)


if __name__ == '__main__':
    unittest.main()
