#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for Configuration Module
Author: messkit developers
"""

import math
import os
import shutil
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.baths import DensityKind
from core.config import (
    ConfigManager, RunConfig, apply_overrides, get_config_manager, load_config, parse_config
)
from core.statespace import GeneratorForm
from core.utils import SchemaError

MINIMAL = """\
schema_version: 1
system:
  kind: spin-boson
  epsilon: 0.5
  delta: 1.0
bath:
  kind: ohmic-exponential
  alpha: 0.1
  omega_c: 5.0
  beta: inf
solver:
  backend: heom-generalized
  t_max: 2.0
  n_points: 21
  depth: 3
"""


class TestParseConfig(unittest.TestCase):
    """Test cases for YAML parsing and validation."""

    def test_minimal_config(self):
        config = parse_config(MINIMAL)
        self.assertEqual(config.schema_version, 1)
        self.assertEqual(config.bath.kind, DensityKind.OHMIC)
        self.assertTrue(math.isinf(config.bath.beta))
        self.assertEqual(config.solver.backend, "heom-generalized")
        self.assertEqual(config.solver.truncation().depth, 3)

        grid = config.solver.grid()
        self.assertEqual(grid.size, 21)
        self.assertAlmostEqual(grid[-1], 2.0)

        model = config.system.build()
        self.assertEqual(model.dim, 2)
        rho0 = config.system.initial_state(model.dim)
        self.assertEqual(rho0[0, 0], 1.0)
        self.assertAlmostEqual(np.trace(rho0).real, 1.0)

    def test_defaults(self):
        config = parse_config("schema_version: 1\n")
        self.assertEqual(config.decomposition.method, "aaa")
        self.assertEqual(config.solver.form, GeneratorForm.QUASI_LINDBLAD)
        self.assertEqual(config.output.observables, ["sigma_z", "rho_01"])

    def test_schema_version_required(self):
        with self.assertRaises(SchemaError) as ctx:
            parse_config("system:\n  kind: spin-boson\n")
        self.assertIn("schema_version", str(ctx.exception))

    def test_unsupported_schema_version(self):
        with self.assertRaises(SchemaError):
            parse_config("schema_version: 2\n")

    def test_negative_beta_names_field_and_line(self):
        text = MINIMAL.replace("beta: inf", "beta: -1.0")
        with self.assertRaises(SchemaError) as ctx:
            parse_config(text, source="run.yaml")
        message = str(ctx.exception)
        self.assertIn("bath.beta", message)
        self.assertIn("line 10", message)

    def test_unknown_field_rejected(self):
        with self.assertRaises(SchemaError) as ctx:
            parse_config(MINIMAL + "  tolerance: 1.0\n")
        self.assertIn("solver.tolerance", str(ctx.exception))

    def test_unknown_backend_rejected(self):
        with self.assertRaises(SchemaError):
            parse_config(MINIMAL.replace("heom-generalized", "monte-carlo"))

    def test_invalid_yaml(self):
        with self.assertRaises(SchemaError):
            parse_config("schema_version: 1\nsystem: [unclosed\n")

    def test_matrix_system(self):
        text = """\
schema_version: 1
system:
  kind: matrix
  H:
    real: [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]
  S:
    real: [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
"""
        model = parse_config(text).system.build()
        self.assertEqual(model.dim, 3)

    def test_matrix_system_needs_operators(self):
        with self.assertRaises(SchemaError):
            parse_config("schema_version: 1\nsystem:\n  kind: matrix\n")


class TestOverrides(unittest.TestCase):
    """Test cases for command-line overrides."""

    def test_seed_and_directory(self):
        config = parse_config(MINIMAL)
        updated = apply_overrides(config, seed=99, out_dir="elsewhere")
        self.assertEqual(updated.solver.seed, 99)
        self.assertEqual(updated.decomposition.seed, 99)
        self.assertEqual(updated.suite.seed, 99)
        self.assertEqual(updated.output.directory, "elsewhere")
        self.assertEqual(config.solver.seed, 0)

    def test_no_overrides(self):
        config = parse_config(MINIMAL)
        self.assertEqual(apply_overrides(config), config)


class TestConfigManager(unittest.TestCase):
    """Test cases for ConfigManager class."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.path = os.path.join(self.temp_dir, "run.yaml")
        with open(self.path, "w") as f:
            f.write(MINIMAL)
        self.manager = ConfigManager(env_file=os.path.join(self.temp_dir, "missing.env"))

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_load_and_cache(self):
        first = self.manager.load(self.path)
        second = self.manager.load(self.path)
        self.assertIs(first, second)
        self.assertEqual(first.system.epsilon, 0.5)

    def test_get_with_overrides(self):
        config = self.manager.get(self.path, seed=7)
        self.assertEqual(config.solver.seed, 7)

    def test_missing_file(self):
        with self.assertRaises(SchemaError):
            load_config(os.path.join(self.temp_dir, "absent.yaml"))

    def test_dump_round_trip(self):
        config = self.manager.load(self.path)
        out = os.path.join(self.temp_dir, "dumped.yaml")
        self.manager.dump(config, out)
        reloaded = load_config(out)
        self.assertEqual(reloaded.solver, config.solver)
        self.assertTrue(math.isinf(reloaded.bath.beta))

    def test_default(self):
        self.assertIsInstance(self.manager.default(), RunConfig)

    def test_get_config_manager(self):
        """Test getting the singleton instance."""
        self.assertIs(get_config_manager(), get_config_manager())


if __name__ == '__main__':
    unittest.main()
