#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Seeded trajectory ensembles

Trajectory i draws from its own counter-based stream (seed, i, 0). Trajectories
are grouped into fixed blocks by index, blocks run on a thread pool and the
block sums are combined with a fixed pairwise tree, so the mean does not
depend on the number of threads.

Author: messkit developers
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.solvers.results import FLAG_TRACE_DRIFT, FLAG_VARIANCE, PropagationResult
from core.utils import SchemaError, Timer, pairwise_reduce, resolve_thread_count

# Setup logger
logger = logging.getLogger("core.stochastic")

BLOCK_SIZE = 32
DEFAULT_STDERR_BOUND = 0.05

# Maps a list of generators (one per trajectory) to samples of shape (B, n_t, d, d)
BlockTask = Callable[[List[np.random.Generator]], np.ndarray]


def trajectory_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index), int(stream)])))


class _Moments(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    count: int
    total: np.ndarray
    squares_re: np.ndarray
    squares_im: np.ndarray

    def merge(self, other: "_Moments") -> "_Moments":
        return _Moments(
            count=self.count + other.count,
            total=self.total + other.total,
            squares_re=self.squares_re + other.squares_re,
            squares_im=self.squares_im + other.squares_im,
        )


class TrajectoryEnsemble(BaseModel):
    """
    Ensemble mean and standard error of ρ_s(t).

    Attributes:
        seed: Master seed
        count: Number of trajectories
        times: Output grid
        mean: ρ̄_s(t), shape (n_t, d, d)
        stderr: Standard error of Re ρ̄ (real part) and Im ρ̄ (imaginary part)
        samples: Per-trajectory ρ_s(t) when requested
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    seed: int
    count: int
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    samples: Optional[np.ndarray] = None
    backend: str = "ensemble"
    flags: Tuple[str, ...] = ()
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    def trace_stderr(self) -> np.ndarray:
        """Standard error of Re Tr ρ̄, treating diagonal errors as independent."""
        diag = np.real(np.diagonal(self.stderr, axis1=1, axis2=2))
        return np.sqrt(np.sum(diag ** 2, axis=1))

    def as_result(self) -> PropagationResult:
        return PropagationResult(
            times=self.times,
            states=self.mean,
            stderr=self.stderr,
            backend=self.backend,
            diagnostics=dict(self.diagnostics),
            flags=self.flags,
            metadata={**self.metadata, "seed": self.seed, "trajectories": self.count},
        )


def run_ensemble(
    task: BlockTask,
    count: int,
    seed: int,
    times: np.ndarray,
    threads: Optional[int] = None,
    backend: str = "ensemble",
    stderr_bound: float = DEFAULT_STDERR_BOUND,
    keep_samples: bool = False,
    metadata: Optional[Dict[str, Any]] = None,
) -> TrajectoryEnsemble:
    """
    Run ``count`` trajectories in blocks and reduce them deterministically.

    Raises:
        SchemaError: If fewer than two trajectories are requested
    """
    if count < 2:
        raise SchemaError("an ensemble needs at least two trajectories", {"count": count})
    workers = resolve_thread_count(threads)
    blocks = [list(range(start, min(start + BLOCK_SIZE, count))) for start in range(0, count, BLOCK_SIZE)]

    def run_block(indices: List[int]) -> Tuple[_Moments, Optional[np.ndarray]]:
        samples = task([trajectory_rng(seed, i) for i in indices])
        moments = _Moments(
            count=len(indices),
            total=samples.sum(axis=0),
            squares_re=(samples.real ** 2).sum(axis=0),
            squares_im=(samples.imag ** 2).sum(axis=0),
        )
        return moments, samples if keep_samples else None

    with Timer(backend, log=False) as timer:
        if workers == 1:
            outputs = [run_block(b) for b in blocks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outputs = list(pool.map(run_block, blocks))

    moments = pairwise_reduce([m for m, _ in outputs], lambda a, b: a.merge(b))
    n = moments.count
    mean = moments.total / n
    var_re = np.clip(moments.squares_re / n - mean.real ** 2, 0.0, None) * n / (n - 1)
    var_im = np.clip(moments.squares_im / n - mean.imag ** 2, 0.0, None) * n / (n - 1)
    stderr = np.sqrt(var_re / n) + 1j * np.sqrt(var_im / n)
    samples = np.concatenate([s for _, s in outputs], axis=0) if keep_samples else None

    flags = []
    final_error = float(max(np.abs(stderr[-1].real).max(), np.abs(stderr[-1].imag).max()))
    if final_error > stderr_bound:
        logger.warning(f"{backend}: standard error {final_error:.3e} at t_max exceeds {stderr_bound:.2e}")
        flags.append(FLAG_VARIANCE)
    ensemble = TrajectoryEnsemble(
        seed=seed,
        count=n,
        times=np.asarray(times, dtype=float),
        mean=mean,
        stderr=stderr,
        samples=samples,
        backend=backend,
        diagnostics={"wall_time": timer.elapsed(), "threads": workers, "final_stderr": final_error},
        metadata=dict(metadata or {}),
    )
    trace_error = np.abs(np.real(np.trace(mean, axis1=1, axis2=2)) - 1.0)
    band = 3.0 * ensemble.trace_stderr() + 1e-10
    if np.any(trace_error > band):
        flags.append(FLAG_TRACE_DRIFT)
    logger.info(f"{backend}: {n} trajectories on {workers} thread(s) in {timer.elapsed():.3f}s")
    return ensemble.model_copy(update={"flags": tuple(flags)})
