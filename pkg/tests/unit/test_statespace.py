#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for State Space Module
Author: messkit developers
"""

import os
import sys
import unittest

import numpy as np
import scipy.sparse as sp
from pydantic import ValidationError
from scipy.sparse.linalg import expm_multiply

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.modes import ExponentialModes, QuasiThermalModes, build_star_modeset, lindblad_gauge
from core.statespace import (
    PAULI_X, PAULI_Z, GeneratorForm, SystemModel, TruncationSpec, annihilation, apply_superops,
    build_extended_generator, dissipator, embed, hierarchy_size, kossakowski_dissipator, left_superop,
    quasi_lindblad_kossakowski, random_density_matrix, right_superop, thermal_populations, unvec, vec
)
from core.utils import DimensionError, SchemaError, StructuralError


class TestSystemModel(unittest.TestCase):
    """Test cases for SystemModel and TruncationSpec."""

    def test_spin_boson(self):
        model = SystemModel.spin_boson(1.0, 0.5)
        self.assertEqual(model.dim, 2)
        np.testing.assert_allclose(model.H, 0.5 * PAULI_Z + 0.25 * PAULI_X)
        self.assertFalse(model.commutes())
        self.assertTrue(SystemModel.dephasing(1.0).commutes())

    def test_rejects_non_hermitian(self):
        with self.assertRaises(ValidationError):
            SystemModel(H=[[0.0, 1.0], [0.0, 0.0]], S=PAULI_Z)

    def test_rejects_scalar_system(self):
        with self.assertRaises(ValidationError):
            SystemModel(H=[[1.0]], S=[[1.0]])

    def test_cutoff_broadcast(self):
        trunc = TruncationSpec(cutoffs=3, depth=2)
        self.assertEqual(trunc.cutoffs_for(4), (3, 3, 3, 3))
        self.assertEqual(trunc.doubled().cutoffs, (6,))
        self.assertEqual(trunc.deeper().depth, 3)
        with self.assertRaises(SchemaError):
            TruncationSpec(cutoffs=[2, 3]).cutoffs_for(3)

    def test_invalid_cutoff(self):
        with self.assertRaises(ValidationError):
            TruncationSpec(cutoffs=[0])

    def test_hierarchy_size(self):
        self.assertEqual(hierarchy_size(2, 3), 10)
        self.assertEqual(hierarchy_size(1, 5), 6)


class TestSuperoperators(unittest.TestCase):
    """Test cases for the superoperator algebra."""

    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.A = self.rng.standard_normal((3, 3)) + 1j * self.rng.standard_normal((3, 3))
        self.X = self.rng.standard_normal((3, 3)) + 1j * self.rng.standard_normal((3, 3))

    def test_column_stacking(self):
        X = np.arange(4).reshape(2, 2)
        np.testing.assert_array_equal(vec(X), [0, 2, 1, 3])
        np.testing.assert_array_equal(unvec(vec(self.X), 3), self.X)

    def test_left_and_right(self):
        np.testing.assert_allclose(unvec(left_superop(self.A) @ vec(self.X), 3), self.A @ self.X)
        np.testing.assert_allclose(unvec(right_superop(self.A) @ vec(self.X), 3), self.X @ self.A)

    def test_dissipator_is_traceless(self):
        rho = random_density_matrix(3, self.rng)
        out = unvec(dissipator(self.A) @ vec(rho), 3)
        self.assertAlmostEqual(abs(np.trace(out)), 0.0, places=12)
        np.testing.assert_allclose(out, out.conj().T, atol=1e-12)

    def test_kossakowski_identity_matches_sum(self):
        B = self.rng.standard_normal((3, 3))
        combined = kossakowski_dissipator([sp.csr_matrix(self.A), sp.csr_matrix(B)], np.eye(2))
        expected = dissipator(self.A) + dissipator(B)
        self.assertLess(abs(combined - expected).max(), 1e-12)

    def test_apply_superops(self):
        model = SystemModel.dephasing(1.0)
        rho = np.array([[0.6, 0.2], [0.2, 0.4]], dtype=complex)
        sc, sq = apply_superops(model, rho)
        np.testing.assert_allclose(sc, np.sqrt(2.0) * np.diag([0.6, -0.4]), atol=1e-15)
        np.testing.assert_allclose(sq, np.sqrt(2.0) * np.array([[0.0, 0.2], [-0.2, 0.0]]), atol=1e-15)
        with self.assertRaises(SchemaError):
            apply_superops(model, np.eye(3))

    def test_ladder_and_embedding(self):
        a = annihilation(4)
        np.testing.assert_allclose((a.conj().T @ a).diagonal(), np.arange(5.0))
        op = embed(PAULI_Z, 0, (2, 3, 4))
        self.assertEqual(op.shape, (24, 24))
        np.testing.assert_allclose(op.diagonal()[:12], 1.0)
        np.testing.assert_allclose(op.diagonal()[12:], -1.0)

    def test_thermal_populations(self):
        p = thermal_populations(0.5, 6)
        self.assertAlmostEqual(p.sum(), 1.0)
        np.testing.assert_allclose(p[1:] / p[:-1], 1.0 / 3.0)
        np.testing.assert_array_equal(thermal_populations(0.0, 3), [1.0, 0.0, 0.0, 0.0])


class TestExtendedGenerator(unittest.TestCase):
    """Test cases for the extended-space generator forms."""

    def setUp(self):
        self.model = SystemModel.spin_boson(1.0, 0.5)
        self.modes = ExponentialModes(d=[0.01], z=[0.5 + 1.0j])
        self.modeset = build_star_modeset(self.modes)
        self.trunc = TruncationSpec(cutoffs=6)
        self.rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)

    def _evolve(self, form, modes=None, t=1.0):
        gen = build_extended_generator(self.model, modes or self.modeset, self.trunc, form)
        state = expm_multiply(t * gen.matrix, gen.initial_state(self.rho0))
        return gen, gen.project(state)

    def test_forms_preserve_trace(self):
        for form in (GeneratorForm.FIRST, GeneratorForm.SECOND, GeneratorForm.QUASI_LINDBLAD):
            with self.subTest(form=form):
                gen, rho = self._evolve(form)
                self.assertEqual(gen.dims, (2, 7))
                self.assertEqual(gen.size, 196)
                self.assertLess(gen.trace_defect, 1e-10)
                self.assertAlmostEqual(np.trace(rho).real, 1.0, places=9)

    def test_forms_agree(self):
        """All density-operator forms share the reduced dynamics."""
        _, reference = self._evolve(GeneratorForm.QUASI_LINDBLAD)
        for form in (GeneratorForm.FIRST, GeneratorForm.SECOND):
            with self.subTest(form=form):
                _, rho = self._evolve(form)
                np.testing.assert_allclose(rho, reference, atol=1e-5)

    def test_strict_lindblad_needs_gauge(self):
        with self.assertRaises(StructuralError):
            build_extended_generator(self.model, self.modeset, self.trunc, "strict-lindblad")

        gauged = lindblad_gauge(self.modeset)
        _, reference = self._evolve(GeneratorForm.QUASI_LINDBLAD)
        _, rho = self._evolve(GeneratorForm.STRICT_LINDBLAD, modes=gauged)
        np.testing.assert_allclose(rho, reference, atol=1e-5)

    def test_chain_unitary_needs_hermitian_modes(self):
        gauged = lindblad_gauge(self.modeset)
        with self.assertRaises(StructuralError):
            build_extended_generator(self.model, gauged, self.trunc, GeneratorForm.CHAIN_UNITARY)

    def test_quasi_thermal_form(self):
        qt = QuasiThermalModes.single(0.1, 0.5, 1.0, 0.4)
        with self.assertRaises(StructuralError):
            build_extended_generator(self.model, self.modes, self.trunc, GeneratorForm.QUASI_THERMAL)

        gen = build_extended_generator(self.model, qt, self.trunc, GeneratorForm.QUASI_THERMAL)
        self.assertEqual(gen.occupations, (0.5,))
        state = gen.initial_state(self.rho0)
        p = thermal_populations(0.5, 6)
        self.assertAlmostEqual(gen.mode_occupations(state)[0], float(np.dot(np.arange(7), p)))
        np.testing.assert_allclose(gen.project(state), self.rho0, atol=1e-15)

    def test_kossakowski_matrix_hermitian(self):
        C = quasi_lindblad_kossakowski(self.modeset, gamma_s=0.2)
        self.assertEqual(C.shape, (2, 2))
        self.assertEqual(C[0, 0], 0.2)
        np.testing.assert_allclose(C, C.conj().T, atol=1e-15)

    def test_dimension_guard(self):
        trunc = TruncationSpec(cutoffs=6, max_dimension=100)
        with self.assertRaises(DimensionError):
            build_extended_generator(self.model, self.modeset, trunc, GeneratorForm.QUASI_LINDBLAD)

    def test_initial_states(self):
        gen = build_extended_generator(self.model, self.modeset, self.trunc, GeneratorForm.SECOND)
        with self.assertRaises(SchemaError):
            gen.initial_state(np.eye(3))
        psi = gen.initial_wavefunction([1.0, 0.0])
        self.assertEqual(psi.size, 14)
        np.testing.assert_allclose(gen.project(psi), self.rho0)
        self.assertEqual(gen.diagnostics()["form"], "second-form")


if __name__ == '__main__':
    unittest.main()
