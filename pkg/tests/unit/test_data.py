#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for Data Files
Author: messkit developers
"""

import os
import shutil
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.data import (
    emit_timeseries, read_metadata, read_modes, read_modeset_text, read_timeseries,
    timeseries_frame, write_modes, write_modeset_text
)
from core.modes import (
    ChainCoefficients, ExponentialModes, QuasiThermalModes, Topology, build_star_modeset, tridiagonalize
)
from core.solvers import PropagationResult
from core.utils import SchemaError


def _result(stderr: bool = False) -> PropagationResult:
    times = np.linspace(0.0, 1.0, 7)
    states = np.zeros((times.size, 2, 2), dtype=complex)
    p = 0.5 + 0.5 * np.exp(-times)
    states[:, 0, 0] = p
    states[:, 1, 1] = 1.0 - p
    states[:, 0, 1] = 0.1 * np.exp(-1j * np.pi * times) / 3.0
    states[:, 1, 0] = np.conj(states[:, 0, 1])
    err = None
    if stderr:
        err = np.full(states.shape, 0.01 + 0.02j)
    return PropagationResult(times=times, states=states, stderr=err, backend="test")


class TestTimeseries(unittest.TestCase):
    """Test cases for the CSV writer."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_columns(self):
        frame = timeseries_frame(_result(), ["sigma_z", "rho_01"])
        self.assertEqual(list(frame.columns), ["t", "trace", "sigma_z", "Re_rho_01", "Im_rho_01"])
        np.testing.assert_allclose(frame["trace"], 1.0, atol=1e-15)

    def test_ensemble_columns(self):
        frame = timeseries_frame(_result(stderr=True), ["sigma_z", "rho_01", "pop_1"])
        for column in ("trace_stderr", "sigma_z_stderr", "Re_rho_01_stderr", "Im_rho_01_stderr", "pop_1_stderr"):
            self.assertIn(column, frame.columns)
        np.testing.assert_allclose(frame["Im_rho_01_stderr"], 0.02)
        np.testing.assert_allclose(frame["sigma_z_stderr"], np.hypot(0.01, 0.01))

    def test_round_trip_full_precision(self):
        """Reading the CSV back reproduces the grid and values exactly."""
        result = _result()
        paths = emit_timeseries(result, self.temp_dir, "run")
        frame = read_timeseries(paths.csv)
        np.testing.assert_array_equal(frame["t"].to_numpy(), result.times)
        np.testing.assert_array_equal(frame["Re_rho_01"].to_numpy(), result.element(0, 1).real)
        np.testing.assert_array_equal(frame["Im_rho_01"].to_numpy(), result.element(0, 1).imag)

    def test_sidecar_and_plot_stub(self):
        paths = emit_timeseries(_result(), self.temp_dir, "run", extra={"seed": 5})
        metadata = read_metadata(paths.metadata)
        self.assertEqual(metadata["backend"], "test")
        self.assertEqual(metadata["extra"]["seed"], 5)
        self.assertEqual(metadata["points"], 7)
        self.assertTrue(os.path.exists(paths.plot))
        with open(paths.plot) as f:
            self.assertIn("set datafile separator ','", f.read())

    def test_no_plot_stub(self):
        paths = emit_timeseries(_result(), self.temp_dir, "run", plot_stub=False)
        self.assertIsNone(paths.plot)

    def test_identical_results_identical_files(self):
        first = emit_timeseries(_result(), os.path.join(self.temp_dir, "a"), "run")
        second = emit_timeseries(_result(), os.path.join(self.temp_dir, "b"), "run")
        with open(first.csv, "rb") as fa, open(second.csv, "rb") as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_unknown_observable(self):
        with self.assertRaises(SchemaError):
            timeseries_frame(_result(), ["energy"])
        with self.assertRaises(SchemaError):
            timeseries_frame(_result(), ["rho_23"])

    def test_missing_file(self):
        with self.assertRaises(SchemaError):
            read_timeseries(os.path.join(self.temp_dir, "absent.csv"))


class TestModeFiles(unittest.TestCase):
    """Test cases for mode-set files."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.modes = ExponentialModes(d=[0.02 + 0.001j, 0.01], z=[0.5 + 1.0j, 0.3 - 0.2j])

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_exponential_json(self):
        path = write_modes(self.modes, os.path.join(self.temp_dir, "modes.json"))
        loaded = read_modes(path)
        self.assertIsInstance(loaded, ExponentialModes)
        np.testing.assert_array_equal(loaded.d, self.modes.d)
        np.testing.assert_array_equal(loaded.z, self.modes.z)

    def test_modeset_json(self):
        modeset = tridiagonalize(build_star_modeset(self.modes))
        loaded = read_modes(write_modes(modeset, os.path.join(self.temp_dir, "set.json")))
        self.assertEqual(loaded.topology, Topology.CHAIN)
        np.testing.assert_array_equal(loaded.E, modeset.E)

    def test_quasi_thermal_and_chain_json(self):
        qt = QuasiThermalModes.single(0.2, 0.5, 1.0, 0.3)
        loaded = read_modes(write_modes(qt, os.path.join(self.temp_dir, "qt.json")))
        self.assertAlmostEqual(float(loaded.n[0]), 0.5)

        chain = ChainCoefficients(l=1, site_energies=np.array([1.0, 2.0]), hoppings=np.array([0.3, 0.1]))
        loaded = read_modes(write_modes(chain, os.path.join(self.temp_dir, "chain.json")))
        np.testing.assert_array_equal(loaded.hoppings, chain.hoppings)

    def test_modeset_table(self):
        """Header lines carry K, topology and tolerance; rows carry E, κ and η."""
        modeset = build_star_modeset(self.modes)
        path = write_modeset_text(modeset, os.path.join(self.temp_dir, "set.txt"), 1.5e-5)
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[:2], ["# K=2", "# topology=star"])
        self.assertTrue(lines[2].startswith("# tolerance="))
        self.assertEqual(float(lines[2].split("=")[1]), 1.5e-5)
        self.assertEqual(sum(1 for line in lines if line.startswith("E,")), 2)

        loaded, tolerance = read_modeset_text(path)
        self.assertEqual(tolerance, 1.5e-5)
        np.testing.assert_array_equal(loaded.E, modeset.E)
        np.testing.assert_array_equal(loaded.kappa, modeset.kappa)
        np.testing.assert_array_equal(loaded.eta, modeset.eta)

    def test_unknown_record(self):
        path = os.path.join(self.temp_dir, "bad.json")
        with open(path, "w") as f:
            f.write('{"type": "fourier"}')
        with self.assertRaises(SchemaError):
            read_modes(path)


if __name__ == '__main__':
    unittest.main()
