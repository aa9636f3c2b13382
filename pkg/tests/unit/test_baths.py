#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for Bath Models
Author: messkit developers
"""

import math
import os
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.baths import (
    BETA_INF, CorrelationFunction, DensityKind, Evaluation, NoisePower, SpectralDensity,
    bose_occupation, build_frequency_grid, eval_correlation, eval_noise_power,
    eval_spectral_density, load_tabulated_density
)
from core.utils import DomainError, SchemaError


class TestSpectralDensity(unittest.TestCase):
    """Test cases for spectral densities."""

    def test_ohmic_value(self):
        """J(ω) = (π/2)αω e^{−ω/ω_c} for s = 1."""
        density = SpectralDensity.ohmic(alpha=0.1, omega_c=5.0)
        expected = 0.5 * math.pi * 0.1 * 1.0 * math.exp(-1.0 / 5.0)
        self.assertAlmostEqual(eval_spectral_density(density, 1.0), expected, places=14)

    def test_subohmic_value(self):
        density = SpectralDensity.subohmic(alpha=0.05, s=0.5, omega_c=1.0)
        expected = 0.5 * math.pi * 0.05 * math.sqrt(2.0) * math.exp(-2.0)
        self.assertAlmostEqual(density(2.0), expected, places=14)

    def test_antisymmetry(self):
        """J(−ω) = −J(ω) for every kind."""
        omega = np.linspace(0.01, 8.0, 50)
        densities = [
            SpectralDensity.ohmic(alpha=0.2, omega_c=2.0),
            SpectralDensity.subohmic(alpha=0.05, s=0.5, omega_c=1.0),
            SpectralDensity.brownian(c0=1.0, omega0=1.0, gamma0=0.3),
            SpectralDensity.lorentzian([(0.2, 1.0, 0.1), (0.1, 3.0, 0.5)]),
        ]
        for density in densities:
            with self.subTest(kind=density.kind.value):
                np.testing.assert_array_equal(density(-omega), -density(omega))
                self.assertEqual(density(0.0), 0.0)

    def test_brownian_value(self):
        density = SpectralDensity.brownian(c0=1.0, omega0=1.0, gamma0=0.3)
        w = 1.5
        expected = 2.0 * 0.3 * w / ((w ** 2 - 1.0) ** 2 + 4.0 * 0.09 * w ** 2)
        self.assertAlmostEqual(density(w), expected, places=14)

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            SpectralDensity.ohmic(alpha=0.1, omega_c=-1.0)
        with self.assertRaises(ValueError):
            SpectralDensity.lorentzian([])

    def test_tabulated_interpolation_and_range(self):
        omega = np.linspace(0.0, 10.0, 201)
        values = 0.5 * math.pi * 0.1 * omega * np.exp(-omega / 2.0)
        density = SpectralDensity.tabulated(omega, values)
        reference = SpectralDensity.ohmic(alpha=0.1, omega_c=2.0)

        # Interpolation is close on the grid interior
        points = np.linspace(0.1, 9.9, 37)
        np.testing.assert_allclose(density(points), reference(points), rtol=1e-3, atol=1e-6)

        # Outside the table the density is undefined
        with self.assertRaises(DomainError):
            density(12.0)

    def test_load_tabulated_density(self):
        omega = np.linspace(0.0, 4.0, 41)
        values = omega * np.exp(-omega)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "density.csv")
            with open(path, "w") as f:
                f.write("# omega, J\n")
                for w, j in zip(omega, values):
                    f.write(f"{w!r}, {j!r}\n")
            density = load_tabulated_density(path)
        self.assertEqual(density.kind, DensityKind.TABULATED)
        self.assertAlmostEqual(density(2.0), 2.0 * math.exp(-2.0), places=12)

    def test_load_tabulated_density_bad_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "density.txt")
            with open(path, "w") as f:
                f.write("1 2 3\n4 5 6\n")
            with self.assertRaises(SchemaError):
                load_tabulated_density(path)


class TestNoisePower(unittest.TestCase):
    """Test cases for the thermal noise power."""

    def setUp(self):
        self.density = SpectralDensity.ohmic(alpha=0.1, omega_c=5.0)

    def test_zero_temperature(self):
        noise = NoisePower(density=self.density, beta=BETA_INF)
        self.assertTrue(noise.zero_temperature)
        self.assertEqual(noise(-1.0), 0.0)
        self.assertAlmostEqual(noise(1.0), self.density(1.0), places=15)

    def test_detailed_balance(self):
        """S(−ω) = e^{−βω}S(ω)."""
        noise = NoisePower(density=self.density, beta=2.0)
        omega = np.array([1e-6, 1e-3, 0.1, 1.0, 4.0, 10.0])
        np.testing.assert_allclose(noise(-omega), np.exp(-2.0 * omega) * noise(omega), rtol=1e-12)

    def test_zero_frequency_limit(self):
        """S(0) = lim J(ω)/(βω) for an ohmic density."""
        noise = NoisePower(density=self.density, beta=2.0)
        expected = 0.5 * math.pi * 0.1 / 2.0
        self.assertAlmostEqual(eval_noise_power(noise, 0.0), expected, places=14)

    def test_lorentzian_lines(self):
        """Line sums keep weight at ω < 0 at zero temperature; J is their odd part."""
        density = SpectralDensity.lorentzian([(0.2, 1.0, 0.1)])
        noise = NoisePower(density=density, beta=BETA_INF)
        self.assertTrue(noise.two_sided)
        self.assertAlmostEqual(noise(-1.0), 2.0 * 0.1 * 0.04 / (4.0 + 0.01), places=15)
        self.assertAlmostEqual(noise(1.0), 2.0 * 0.04 / 0.1, places=13)

        thermal = NoisePower(density=density, beta=math.log(3.0))
        omega = np.linspace(0.05, 5.0, 25)
        np.testing.assert_allclose(thermal(omega) - thermal(-omega), density(omega), atol=1e-15)

    def test_invalid_beta(self):
        with self.assertRaises(ValueError):
            NoisePower(density=self.density, beta=0.0)
        with self.assertRaises(ValueError):
            NoisePower(density=self.density, beta=-1.0)

    def test_bose_occupation(self):
        self.assertAlmostEqual(bose_occupation(1.0, math.log(3.0)), 0.5, places=14)
        self.assertEqual(bose_occupation(1.0, BETA_INF), 0.0)


class TestCorrelationFunction(unittest.TestCase):
    """Test cases for C(t)."""

    def test_ohmic_zero_temperature_closed_form(self):
        """C(t) = (α/4)/(1/ω_c + it)² at β = ∞ for s = 1."""
        alpha, omega_c = 0.1, 5.0
        noise = NoisePower(density=SpectralDensity.ohmic(alpha=alpha, omega_c=omega_c))
        correlation = CorrelationFunction(source=noise)
        self.assertEqual(correlation.evaluation, Evaluation.QUADRATURE)

        t = np.array([0.0, 0.1, 0.5, 1.0, 3.0])
        expected = 0.25 * alpha / (1.0 / omega_c + 1j * t) ** 2
        np.testing.assert_allclose(correlation(t), expected, rtol=1e-6, atol=1e-7)

    def test_hermiticity(self):
        """C(−t) = C*(t)."""
        noise = NoisePower(density=SpectralDensity.ohmic(alpha=0.1, omega_c=2.0), beta=1.0)
        correlation = CorrelationFunction(source=noise)
        t = np.linspace(0.1, 4.0, 9)
        np.testing.assert_allclose(correlation(-t), np.conj(correlation(t)), rtol=1e-14)

    def test_c0_is_real_and_positive(self):
        noise = NoisePower(density=SpectralDensity.ohmic(alpha=0.1, omega_c=2.0), beta=1.0)
        correlation = CorrelationFunction(source=noise)
        value = eval_correlation(correlation, 0.0)
        self.assertGreater(value.real, 0.0)
        self.assertLess(abs(value.imag), 1e-12 * value.real)
        self.assertAlmostEqual(correlation.c0, value.real, places=14)

    def test_lorentzian_closed_form(self):
        """Narrow-line form with Bose weights: C(0) = g²(2n + 1)."""
        beta = math.log(3.0)
        noise = NoisePower(density=SpectralDensity.lorentzian([(0.1, 1.0, 0.2)]), beta=beta)
        correlation = CorrelationFunction(source=noise)
        self.assertEqual(correlation.evaluation, Evaluation.CLOSED_FORM)
        self.assertAlmostEqual(correlation.c0, 0.01 * 2.0, places=14)

        t = 2.0
        expected = 0.01 * math.exp(-0.2 * t) * (1.5 * np.exp(-1j * t) + 0.5 * np.exp(1j * t))
        self.assertAlmostEqual(abs(correlation(t) - expected), 0.0, places=14)

    def test_lorentzian_quadrature_matches_closed_form(self):
        t = np.linspace(0.0, 20.0, 41)
        cases = [(0.2, 1.0, 0.1, BETA_INF), (0.1, 1.0, 0.2, math.log(3.0))]
        for g, omega0, gamma, beta in cases:
            with self.subTest(beta=beta):
                noise = NoisePower(density=SpectralDensity.lorentzian([(g, omega0, gamma)]), beta=beta)
                closed = CorrelationFunction(source=noise)
                quadrature = CorrelationFunction(source=noise, evaluation="quadrature")
                np.testing.assert_allclose(quadrature(t), closed(t), rtol=0.0, atol=1e-8)

    def test_brownian_imaginary_part_is_temperature_independent(self):
        """Im C(t) = −(c0²/4ζ)e^{−γ0 t} sin ζt for any β."""
        c0, omega0, gamma0 = 1.0, 1.0, 0.2
        zeta = math.sqrt(omega0 ** 2 - gamma0 ** 2)
        density = SpectralDensity.brownian(c0=c0, omega0=omega0, gamma0=gamma0)
        t = np.array([0.5, 1.0, 2.0, 4.0])
        expected = -(c0 ** 2 / (4.0 * zeta)) * np.exp(-gamma0 * t) * np.sin(zeta * t)
        for beta in (0.5, 2.0):
            with self.subTest(beta=beta):
                correlation = CorrelationFunction(source=NoisePower(density=density, beta=beta))
                np.testing.assert_allclose(correlation(t).imag, expected, atol=1e-6)

    def test_brownian_high_temperature_form_requires_finite_beta(self):
        density = SpectralDensity.brownian(c0=1.0, omega0=1.0, gamma0=0.2)
        with self.assertRaises(ValueError):
            CorrelationFunction(source=NoisePower(density=density), high_temperature=True)

    def test_closed_form_rejected_without_formula(self):
        noise = NoisePower(density=SpectralDensity.ohmic(alpha=0.1, omega_c=2.0))
        with self.assertRaises(ValueError):
            CorrelationFunction(source=noise, evaluation="closed-form")

    def test_decay_time(self):
        noise = NoisePower(density=SpectralDensity.lorentzian([(0.1, 1.0, 0.5)]))
        correlation = CorrelationFunction(source=noise)
        tau = correlation.decay_time(1e-3)
        # |C(t)| = g² e^{−γt} drops below 1e−3 C(0) at t = ln(1000)/γ
        self.assertGreater(tau, 0.5 * math.log(1000.0) / 0.5)
        self.assertLess(tau, 2.0 * math.log(1000.0) / 0.5)

    def test_refine_tightens_tolerance(self):
        noise = NoisePower(density=SpectralDensity.ohmic(alpha=0.1, omega_c=2.0), beta=1.0)
        correlation = CorrelationFunction(source=noise, tail_tol=1e-8)
        finer = correlation.refine(2)
        self.assertEqual(finer.nodes_per_panel, 64)
        self.assertAlmostEqual(finer.tail_tol, 5e-9)
        self.assertLess(abs(finer(1.0) - correlation(1.0)), 1e-7)


class TestFrequencyGrid(unittest.TestCase):
    """Test cases for the adaptive frequency grid."""

    def test_mass_matches_c0(self):
        noise = NoisePower(density=SpectralDensity.ohmic(alpha=0.1, omega_c=5.0))
        grid = build_frequency_grid(noise, t_cover=1.0)
        self.assertAlmostEqual(float(np.sum(grid.spectral_weights)), 0.25 * 0.1 * 25.0, places=7)
        self.assertLess(grid.error_estimate, 1e-7)
        self.assertTrue(np.all(np.diff(grid.nodes) > 0))


if __name__ == '__main__':
    unittest.main()
