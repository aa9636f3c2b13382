#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Core Utilities Module

Logging setup, wall-clock timing, JSON helpers for numpy payloads,
environment lookups and the order-independent reduction used by ensembles.

Author: messkit developers
"""

import os
import json
import logging
import time
from datetime import datetime, timezone
from typing import Any, Callable, List, Optional, Sequence, TypeVar

import numpy as np

from core.utils.errors import (
    AccuracyError,
    ConditioningError,
    ConstructionError,
    ConvergenceError,
    DecompositionError,
    DimensionError,
    DomainError,
    InstabilityError,
    MesskitError,
    PreconditionError,
    SchemaError,
    StructuralError,
)

# Setup logger
logger = logging.getLogger("core.utils")

T = TypeVar('T')

THREADS_ENV_VAR = "MESSKIT_THREADS"
DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class Timer:
    """
    Wall-clock timer for solver stages.

    Used as a context manager around assembly and propagation; the elapsed
    time is logged on exit unless ``log`` is False.
    """

    def __init__(self, name: Optional[str] = None, log: bool = True):
        self.name = name or "Timer"
        self.log = log
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None

    def __enter__(self) -> 'Timer':
        self.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.stop()

    def start(self) -> None:
        self.start_time = time.perf_counter()
        self.end_time = None

    def stop(self) -> float:
        """Stop the timer and return the elapsed seconds."""
        if self.start_time is None:
            raise ValueError("Timer not started")
        self.end_time = time.perf_counter()
        elapsed = self.end_time - self.start_time
        if self.log:
            logger.info(f"{self.name}: {elapsed:.3f}s")
        return elapsed

    def elapsed(self) -> float:
        """Seconds since start; frozen once stopped."""
        if self.start_time is None:
            raise ValueError("Timer not started")
        end = self.end_time if self.end_time is not None else time.perf_counter()
        return end - self.start_time


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    log_format: Optional[str] = None,
) -> None:
    """
    Configure the root logger.

    Args:
        log_level: DEBUG, INFO, WARNING, ERROR or CRITICAL
        log_file: Optional log file next to the console handler
        log_format: Record format (default timestamp - logger - level - message)
    """
    level = getattr(logging, log_level.upper(), logging.INFO)
    formatter = logging.Formatter(log_format or DEFAULT_LOG_FORMAT)

    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)

    logging.basicConfig(level=level, handlers=handlers, force=True)
    logger.debug(f"Logging configured with level {log_level}")


def utc_timestamp() -> str:
    """Current UTC time in ISO-8601 format."""
    return datetime.now(timezone.utc).isoformat()


def json_serialize(obj: Any) -> Any:
    """
    ``json.dumps`` fallback for numpy values and pydantic models.

    Complex numbers become ``[re, im]`` pairs; complex arrays gain a trailing
    axis of length 2.
    """
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return np.stack([obj.real, obj.imag], axis=-1).tolist()
        return obj.tolist()
    if hasattr(obj, "model_dump"):
        return obj.model_dump(mode="json")
    return str(obj)


def to_json(obj: Any, indent: Optional[int] = None) -> str:
    """Deterministic JSON text: sorted keys, numpy-aware."""
    return json.dumps(obj, default=json_serialize, indent=indent, sort_keys=True)


def from_json(json_str: str) -> Any:
    return json.loads(json_str)


def get_environment_variable(
    name: str,
    default: Optional[str] = None,
    required: bool = False,
) -> Optional[str]:
    """
    Read an environment variable (``.env`` values are loaded by the config manager).

    Raises:
        SchemaError: If ``required`` and the variable is unset
    """
    value = os.environ.get(name, default)
    if required and value is None:
        raise SchemaError(f"Required environment variable {name} not found")
    return value


def resolve_thread_count(threads: Optional[int] = None) -> int:
    """
    Resolve the worker count for parallel sections.

    Explicit values win, then ``MESSKIT_THREADS``, then 1.

    Raises:
        SchemaError: If the resolved value is not a positive integer
    """
    if threads is None:
        raw = get_environment_variable(THREADS_ENV_VAR)
        if raw is None or raw.strip() == "":
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise SchemaError(f"{THREADS_ENV_VAR} must be an integer", {"value": raw})
    if threads < 1:
        raise SchemaError("thread count must be positive", {"threads": threads})
    return threads


def pairwise_reduce(items: Sequence[T], combine: Callable[[T, T], T]) -> T:
    """
    Reduce a sequence with a fixed balanced binary tree.

    The tree shape depends only on ``len(items)``, so floating point results
    do not depend on the order in which the items were produced.

    Raises:
        SchemaError: If ``items`` is empty
    """
    if len(items) == 0:
        raise SchemaError("cannot reduce an empty sequence")
    level = list(items)
    while len(level) > 1:
        paired = [combine(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


__all__ = [
    "AccuracyError",
    "ConditioningError",
    "ConstructionError",
    "ConvergenceError",
    "DecompositionError",
    "DimensionError",
    "DomainError",
    "InstabilityError",
    "MesskitError",
    "PreconditionError",
    "SchemaError",
    "StructuralError",
    "THREADS_ENV_VAR",
    "Timer",
    "from_json",
    "get_environment_variable",
    "json_serialize",
    "pairwise_reduce",
    "resolve_thread_count",
    "setup_logging",
    "to_json",
    "utc_timestamp",
]
