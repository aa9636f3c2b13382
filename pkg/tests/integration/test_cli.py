#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Integration Tests for the Command-Line Interface
Author: messkit developers
"""

import os
import shutil
import sys
import tempfile
import unittest

import yaml
from typer.testing import CliRunner

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.data import read_metadata, read_modes, read_timeseries
from core.modes import IkedaModes
from main import EXIT_FLAGGED, EXIT_INPUT, EXIT_OK, app

SHIPPED_CONFIGS = os.path.abspath(os.path.join(os.path.dirname(__file__), "../../config"))

LORENTZIAN_TCL2 = """\
schema_version: 1
system:
  kind: spin-boson
  epsilon: 1.0
  delta: 0.5
bath:
  kind: lorentzian-sum
  terms:
    - [0.05, 1.0, 0.5]
  beta: inf
solver:
  backend: tcl2
  t_max: 2.0
  n_points: 21
output:
  prefix: weak
  observables: [sigma_z, rho_01, pop_1]
"""

BROWNIAN = """\
schema_version: 1
system:
  kind: spin-boson
  epsilon: 0.0
  delta: 1.0
bath:
  kind: brownian
  c0: 0.3
  omega0: 1.0
  gamma0: 0.2
  beta: 1.0
decomposition:
  method: brownian-ikeda
solver:
  backend: heom-ikeda
  t_max: 2.0
  n_points: 11
  depth: 3
compare:
  tolerance: 1.0e-2
  a:
    backend: heom-ikeda
    t_max: 2.0
    n_points: 11
    depth: 3
  b:
    backend: heom-ikeda
    t_max: 2.0
    n_points: 11
    depth: 4
output:
  prefix: brownian
"""

DISCRETIZED = """\
schema_version: 1
system:
  kind: spin-boson
  epsilon: 1.0
  delta: 0.5
solver:
  t_max: {t_max}
  n_points: 6
oracle:
  kind: discretized
  g: [0.1, 0.1]
  omega: [1.0, 1.5]
  cutoffs: [3]
output:
  prefix: brute
"""

SUITE = """\
schema_version: 1
suite:
  checks: [detailed-balance]
"""


class TestCommandLine(unittest.TestCase):
    """Test cases for the messkit subcommands."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out_dir = os.path.join(self.temp_dir, "out")
        self.runner = CliRunner()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _config(self, name: str, text: str) -> str:
        path = os.path.join(self.temp_dir, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def _invoke(self, *args: str):
        return self.runner.invoke(app, list(args))

    def test_version(self):
        result = self._invoke("version")
        self.assertEqual(result.exit_code, EXIT_OK)

    def test_propagate_writes_csv(self):
        path = self._config("weak.yaml", LORENTZIAN_TCL2)
        result = self._invoke("propagate", "-c", path, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_OK, result.output)

        frame = read_timeseries(os.path.join(self.out_dir, "weak.csv"))
        self.assertEqual(
            list(frame.columns), ["t", "trace", "sigma_z", "Re_rho_01", "Im_rho_01", "pop_1"]
        )
        self.assertEqual(len(frame), 21)
        self.assertAlmostEqual(frame["sigma_z"].iloc[0], 1.0)
        self.assertLess(abs(frame["trace"] - 1.0).max(), 1e-8)

        metadata = read_metadata(os.path.join(self.out_dir, "weak.json"))
        self.assertEqual(metadata["backend"], "tcl2")
        self.assertEqual(metadata["extra"]["config"]["bath"]["beta"], "inf")
        self.assertTrue(os.path.exists(os.path.join(self.out_dir, "weak.gp")))

    def test_fit_on_shipped_configs(self):
        for name in sorted(os.listdir(SHIPPED_CONFIGS)):
            if not name.endswith(".yaml"):
                continue
            with self.subTest(config=name):
                path = os.path.join(SHIPPED_CONFIGS, name)
                out_dir = os.path.join(self.out_dir, name[:-5])
                result = self._invoke("fit", "-c", path, "--out-dir", out_dir, "--allow-flagged")
                self.assertEqual(result.exit_code, EXIT_OK, result.output)
                with open(path) as f:
                    prefix = yaml.safe_load(f)["output"]["prefix"]
                modes = read_modes(os.path.join(out_dir, f"{prefix}_modes.json"))
                self.assertGreater(modes.count, 0)
                if name == "compare.yaml":
                    # a single Lorentzian line is one exponential
                    self.assertEqual(modes.count, 1)

    def test_invalid_config_exit_code(self):
        path = self._config("bad.yaml", LORENTZIAN_TCL2.replace("beta: inf", "beta: -1.0"))
        result = self._invoke("propagate", "-c", path, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_INPUT)
        self.assertFalse(os.path.exists(os.path.join(self.out_dir, "weak.csv")))

    def test_missing_config_exit_code(self):
        result = self._invoke("propagate", "-c", os.path.join(self.temp_dir, "absent.yaml"))
        self.assertEqual(result.exit_code, EXIT_INPUT)

    def test_unknown_option_exit_code(self):
        result = self._invoke("propagate", "--no-such-flag")
        self.assertEqual(result.exit_code, 2)

    def test_fit_brownian(self):
        path = self._config("brownian.yaml", BROWNIAN)
        result = self._invoke("fit", "-c", path, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        modes = read_modes(os.path.join(self.out_dir, "brownian_modes.json"))
        self.assertIsInstance(modes, IkedaModes)
        self.assertEqual(modes.count, 2)

    def test_compare_depths(self):
        path = self._config("brownian.yaml", BROWNIAN)
        result = self._invoke("compare", "-c", path, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        with open(os.path.join(self.out_dir, "brownian_compare.txt")) as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(all(line.endswith("PASS") for line in lines))
        for side in ("a", "b"):
            self.assertTrue(os.path.exists(os.path.join(self.out_dir, f"brownian_{side}.csv")))

    def test_oracle_recurrence_flag(self):
        early = self._config("early.yaml", DISCRETIZED.format(t_max=1.0))
        result = self._invoke("oracle", "-c", early, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertTrue(os.path.exists(os.path.join(self.out_dir, "brute_oracle.csv")))

        late = self._config("late.yaml", DISCRETIZED.format(t_max=10.0))
        result = self._invoke("oracle", "-c", late, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_FLAGGED)
        result = self._invoke("oracle", "-c", late, "--out-dir", self.out_dir, "--allow-flagged")
        self.assertEqual(result.exit_code, EXIT_OK)

    def test_suite_subset(self):
        path = self._config("suite.yaml", SUITE)
        result = self._invoke("suite", "-c", path, "--out-dir", self.out_dir)
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        with open(os.path.join(self.out_dir, "suite_report.txt")) as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[0].startswith("detailed-balance:ohmic"))


if __name__ == '__main__':
    unittest.main()
