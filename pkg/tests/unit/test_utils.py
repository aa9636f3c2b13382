#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Unit Tests for Utils Module
Author: messkit developers
"""

import os
import sys
import time
import unittest
from unittest import mock

import numpy as np

# Add parent directory to path to import core modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from core.utils import (
    MesskitError, SchemaError, Timer, from_json, get_environment_variable,
    pairwise_reduce, resolve_thread_count, to_json
)
from core.utils.errors import DimensionError


class TestErrors(unittest.TestCase):
    """Test cases for the error hierarchy."""

    def test_details_in_message(self):
        error = DimensionError("extended space too large", {"dimension": 2000000, "limit": 1000000})
        self.assertIsInstance(error, MesskitError)
        self.assertEqual(error.details["limit"], 1000000)
        self.assertIn("dimension=2000000", str(error))
        self.assertTrue(str(error).startswith("extended space too large"))

    def test_plain_message(self):
        self.assertEqual(str(SchemaError("bad field")), "bad field")


class TestTimer(unittest.TestCase):
    """Test cases for Timer class."""

    def test_timer_context_manager(self):
        """Test using Timer as a context manager."""
        with Timer("Test timer", log=False) as timer:
            time.sleep(0.01)

        self.assertIsNotNone(timer.start_time)
        self.assertIsNotNone(timer.end_time)
        self.assertGreaterEqual(timer.elapsed(), 0.01)

    def test_timer_manual(self):
        """Test using Timer manually."""
        timer = Timer("Manual timer")
        timer.start()
        time.sleep(0.01)

        running = timer.elapsed()
        self.assertGreaterEqual(running, 0.01)

        stopped = timer.stop()
        self.assertGreaterEqual(stopped, running)
        self.assertEqual(timer.elapsed(), stopped)

    def test_timer_not_started(self):
        with self.assertRaises(ValueError):
            Timer().elapsed()


class TestJsonFunctions(unittest.TestCase):
    """Test cases for JSON functions."""

    def test_json_serialize(self):
        """Numpy scalars, complex values and arrays become plain JSON."""
        obj = {
            "integer": np.int64(7),
            "float": np.float64(0.25),
            "complex": 1.5 - 2.0j,
            "vector": np.array([1.0, 2.0]),
            "matrix": np.array([[1 + 1j, 0], [0, 2 - 1j]]),
            "flag": np.bool_(True),
        }

        parsed = from_json(to_json(obj))

        self.assertEqual(parsed["integer"], 7)
        self.assertEqual(parsed["float"], 0.25)
        self.assertEqual(parsed["complex"], [1.5, -2.0])
        self.assertEqual(parsed["vector"], [1.0, 2.0])
        self.assertEqual(parsed["matrix"][0][0], [1.0, 1.0])
        self.assertEqual(parsed["matrix"][1][1], [2.0, -1.0])
        self.assertIs(parsed["flag"], True)

    def test_sorted_keys(self):
        self.assertEqual(to_json({"b": 1, "a": 2}), '{"a": 2, "b": 1}')


class TestEnvironment(unittest.TestCase):
    """Test cases for environment lookups and thread resolution."""

    def test_get_environment_variable(self):
        with mock.patch.dict(os.environ, {"MESSKIT_TEST_VAR": "value"}):
            self.assertEqual(get_environment_variable("MESSKIT_TEST_VAR"), "value")
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(get_environment_variable("MESSKIT_TEST_VAR", default="fallback"), "fallback")
            self.assertIsNone(get_environment_variable("MESSKIT_TEST_VAR"))
            with self.assertRaises(SchemaError):
                get_environment_variable("MESSKIT_TEST_VAR", required=True)

    def test_thread_count_precedence(self):
        with mock.patch.dict(os.environ, {"MESSKIT_THREADS": "3"}):
            self.assertEqual(resolve_thread_count(), 3)
            self.assertEqual(resolve_thread_count(5), 5)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(resolve_thread_count(), 1)

    def test_thread_count_invalid(self):
        with mock.patch.dict(os.environ, {"MESSKIT_THREADS": "many"}):
            with self.assertRaises(SchemaError):
                resolve_thread_count()
        with self.assertRaises(SchemaError):
            resolve_thread_count(0)


class TestSequences(unittest.TestCase):
    """Test cases for the ordered reduction."""

    def test_pairwise_reduce_shape(self):
        """The combination tree depends only on the length."""
        order = pairwise_reduce(["a", "b", "c", "d", "e"], lambda x, y: f"({x}{y})")
        self.assertEqual(order, "(((ab)(cd))e)")
        self.assertEqual(pairwise_reduce([4], lambda x, y: x + y), 4)

    def test_pairwise_reduce_empty(self):
        with self.assertRaises(SchemaError):
            pairwise_reduce([], lambda x, y: x + y)


if __name__ == '__main__':
    unittest.main()
