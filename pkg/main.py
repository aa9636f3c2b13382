#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Main entry point: configuration-driven fits, propagation, comparisons and checks
Author: messkit developers
"""

import logging
import os
from datetime import datetime
from typing import Annotated, List, Optional, Tuple, Union

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from core.baths import DensityKind
from core.config import (
    RunConfig, SolverConfig, apply_overrides, config_record, get_config_manager, validation_messages
)
from core.data import emit_timeseries, write_modes, write_modeset_text
from core.modes import (
    ChainCoefficients,
    EffectiveModeSet,
    ExponentialModes,
    IkedaModes,
    QuasiThermalModes,
    brownian_ikeda_modes,
    build_star_modeset,
    chain_map,
    chain_modeset,
    fit_exponential_modes,
    ikeda_split,
    lindblad_gauge,
    quasi_thermal_fit,
    tridiagonalize,
)
from core.oracles import (
    DiscreteBath,
    SuiteSettings,
    cross_compare,
    dephasing_oracle,
    discretized_bath_oracle,
    run_suite,
)
from core.solvers import (
    HeomVariant,
    IntegratorOptions,
    PropagationResult,
    convergence_check,
    cutoff_convergence,
    heom_propagate,
    pseudomode_propagate,
    tcl2_propagate,
    thermofield_transform,
)
from core.stochastic import hops_propagate_ensemble, sln_propagate_ensemble
from core.utils import MesskitError, SchemaError, Timer, resolve_thread_count, setup_logging

logger = logging.getLogger("messkit")
console = Console(stderr=True)

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_FLAGGED = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

Decomposition = Union[ExponentialModes, IkedaModes, QuasiThermalModes, ChainCoefficients]


class FitOutcome:
    """Result of the decomposition stage."""

    def __init__(self, modes: Decomposition, modeset: Optional[EffectiveModeSet], flags: Tuple[str, ...]):
        self.modes = modes
        self.modeset = modeset
        self.flags = flags


class Messkit:
    """Runs one configuration through fit, build, propagate and emit"""

    def __init__(self, config: RunConfig, threads: Optional[int] = None, allow_flagged: bool = False):
        """
        Initialize the runner.

        Args:
            config: Validated run configuration (overrides already applied)
            threads: Worker count for ensembles (MESSKIT_THREADS if None)
            allow_flagged: Exit 0 even if results carry convergence flags
        """
        self.start_time = datetime.now()
        self.version = __version__
        self.config = config
        self.threads = resolve_thread_count(threads)
        self.allow_flagged = allow_flagged
        self.flags: List[str] = []
        self.out_dir = config.output.directory
        self._fit: Optional[FitOutcome] = None
        logger.info(f"messkit v{self.version}: output in {self.out_dir}, {self.threads} thread(s)")

    # Decomposition

    def fit(self) -> FitOutcome:
        """Decompose the bath as configured; the outcome is cached per run."""
        if self._fit is not None:
            return self._fit
        dec = self.config.decomposition
        bath = self.config.bath
        with Timer(f"Decomposition ({dec.method})", log=False) as timer:
            modeset: Optional[EffectiveModeSet] = None
            if dec.method == "aaa":
                _, modes = fit_exponential_modes(
                    bath.correlation(), dec.tol, dec.m_max, dec.n_samples, dec.t_max, dec.certify
                )
                modeset = build_star_modeset(modes)
                if dec.lindblad_gauge:
                    modeset = lindblad_gauge(modeset)
                if dec.topology == "chain":
                    modeset = tridiagonalize(modeset)
                flags = modes.flags
            elif dec.method == "chain":
                modes = chain_map(bath.noise(), dec.K, dec.l)
                if modes.l == 1:
                    modeset = chain_modeset(modes, dec.terminal.gamma)
                flags = modes.flags
            elif dec.method == "quasi-thermal":
                modes = quasi_thermal_fit(
                    bath.correlation(), dec.K, dec.tol, dec.t_max, multi_starts=dec.multi_starts, seed=dec.seed
                )
                flags = modes.flags
            else:
                if bath.kind != DensityKind.BROWNIAN:
                    raise SchemaError("brownian-ikeda decomposition needs bath.kind: brownian")
                modes = brownian_ikeda_modes(bath.c0, bath.omega0, bath.gamma0, bath.beta, dec.regime)
                flags = ()
        size = modes.length if isinstance(modes, ChainCoefficients) else modes.count
        logger.info(f"Decomposition {dec.method}: {size} modes ({timer.elapsed():.2f}s)")
        self._record(flags)
        self._fit = FitOutcome(modes, modeset, tuple(flags))
        return self._fit

    def write_fit(self, prefix: str) -> List[str]:
        """Write the decomposition as JSON and, when a mode set exists, as a delimited table."""
        outcome = self.fit()
        paths = [write_modes(outcome.modes, os.path.join(self.out_dir, f"{prefix}_modes.json"))]
        if outcome.modeset is not None:
            tolerance = getattr(outcome.modes, "residual_bound", 0.0)
            paths.append(
                write_modeset_text(outcome.modeset, os.path.join(self.out_dir, f"{prefix}_modes.txt"), tolerance)
            )
        return paths

    def _exponential(self) -> ExponentialModes:
        modes = self.fit().modes
        if isinstance(modes, QuasiThermalModes):
            return modes.to_exponential()
        if not isinstance(modes, ExponentialModes):
            raise SchemaError(
                "this backend needs exponential modes",
                {"decomposition": self.config.decomposition.method},
            )
        return modes

    def _ikeda(self) -> IkedaModes:
        modes = self.fit().modes
        if isinstance(modes, IkedaModes):
            return modes
        return ikeda_split(self._exponential())

    def _pseudomodes(self):
        outcome = self.fit()
        if isinstance(outcome.modes, QuasiThermalModes):
            return outcome.modes
        if outcome.modeset is None:
            raise SchemaError("no mode set is available for the pseudomode backend")
        return outcome.modeset

    # Propagation

    def propagate(self, solver: Optional[SolverConfig] = None) -> PropagationResult:
        """Run one backend and return its reduced trajectory."""
        solver = solver or self.config.solver
        model = self.config.system.build()
        rho0 = self.config.system.initial_state(model.dim)
        times = solver.grid()
        trunc = solver.truncation()
        options = IntegratorOptions(method=solver.method, rtol=solver.rtol, atol=solver.atol, max_step=solver.max_step)
        backend = solver.backend
        logger.info(f"Propagating with {backend} on {times.size} points up to t={solver.t_max}")

        if backend.startswith("heom-"):
            variant = HeomVariant(backend[len("heom-"):])
            modes = self._ikeda() if variant == HeomVariant.IKEDA else self._exponential()
            if solver.convergence_check:
                result = convergence_check(model, modes, trunc, times, rho0, variant, solver.convergence_tol, options)
            else:
                result = heom_propagate(model, modes, trunc, times, rho0, variant, options, solver.rescaled)
        elif backend == "pseudomode":
            modes = self._pseudomodes()
            if solver.convergence_check:
                result = cutoff_convergence(
                    model, modes, trunc, times, rho0, solver.form, solver.convergence_tol, options
                )
            else:
                result = pseudomode_propagate(
                    model, modes, trunc, times, rho0, solver.form, options, solver.gamma_s, solver.pure_state
                )
        elif backend == "tcl2":
            result = tcl2_propagate(
                model,
                self.config.bath.correlation(),
                times,
                rho0,
                max_step=solver.tcl2_step,
                memory_time=solver.memory_time,
                accuracy_tol=solver.accuracy_tol,
            )
        elif backend == "sln":
            outcome = self.fit()
            modes = outcome.modeset if outcome.modeset is not None else self._exponential()
            result = sln_propagate_ensemble(
                model,
                modes,
                times,
                solver.trajectories,
                solver.seed,
                rho0,
                construction=solver.construction,
                substeps=solver.substeps,
                white_scale=solver.white_scale,
                threads=self.threads,
                stderr_bound=solver.stderr_bound,
            ).as_result()
        elif backend == "hops":
            result = hops_propagate_ensemble(
                model,
                self._exponential(),
                solver.depth,
                times,
                solver.trajectories,
                solver.seed,
                rho0,
                substeps=solver.substeps,
                threads=self.threads,
                stderr_bound=solver.stderr_bound,
                depth_check=solver.convergence_check,
            ).as_result()
        else:
            modes = self.fit().modes
            if not isinstance(modes, QuasiThermalModes):
                raise SchemaError("the thermofield backend needs a quasi-thermal decomposition")
            report = thermofield_transform(
                model,
                modes,
                tuple(solver.cutoffs),
                solver.one_mode_cutoff,
                times=times,
                rho0=rho0,
                tol=solver.thermofield_tol,
                options=options,
            )
            if report.one_mode_result is None:
                raise SchemaError(
                    "one-mode cutoff is below the two-mode cutoffs; the thermofield runs are not comparable",
                    {"one_mode_cutoff": solver.one_mode_cutoff, "cutoffs": solver.cutoffs},
                )
            result = report.one_mode_result.with_flags(*report.flags, thermofield_deviation=report.max_deviation)

        self._record(result.flags)
        return result

    def emit(self, result: PropagationResult, prefix: str) -> str:
        out = self.config.output
        paths = emit_timeseries(
            result,
            self.out_dir,
            prefix,
            observables=out.observables,
            plot_stub=out.plot_stub,
            extra={"config": config_record(self.config), "version": self.version},
        )
        return paths.csv

    # Subcommands

    def run_fit(self) -> int:
        self.fit()
        for path in self.write_fit(self.config.output.prefix):
            console.print(path)
        return self.exit_code()

    def run_chainmap(self) -> int:
        dec = self.config.decomposition
        coeffs = chain_map(self.config.bath.noise(), dec.K, dec.l)
        self._record(coeffs.flags)
        prefix = self.config.output.prefix
        console.print(write_modes(coeffs, os.path.join(self.out_dir, f"{prefix}_chain.json")))
        if coeffs.l == 1:
            table = os.path.join(self.out_dir, f"{prefix}_chain.txt")
            console.print(write_modeset_text(chain_modeset(coeffs, dec.terminal.gamma), table, coeffs.orthogonality_error))
        return self.exit_code()

    def run_propagate(self) -> int:
        """fit → build → propagate → emit."""
        prefix = self.config.output.prefix
        needs_fit = self.config.solver.backend != "tcl2"
        if needs_fit and self.config.output.write_modes:
            self.write_fit(prefix)
        result = self.propagate()
        console.print(self.emit(result, prefix))
        return self.exit_code()

    def run_compare(self) -> int:
        cmp = self.config.compare
        if cmp.a is None or cmp.b is None:
            raise SchemaError("compare needs compare.a and compare.b solver sections")
        prefix = self.config.output.prefix
        results = []
        for side, solver in (("a", cmp.a), ("b", cmp.b)):
            result = self.propagate(solver)
            self.emit(result, f"{prefix}_{side}")
            results.append(result)
        report = cross_compare(results[0], results[1], tolerance=cmp.tolerance, sigma=cmp.sigma)
        lines = report.lines()
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, f"{prefix}_compare.txt")
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        self._print_lines("Comparison", lines)
        if not report.passed:
            self._record(("comparison-failed",))
        return self.exit_code()

    def run_oracle(self) -> int:
        oracle = self.config.oracle
        model = self.config.system.build()
        rho0 = self.config.system.initial_state(model.dim)
        times = self.config.solver.grid()
        if oracle.kind == "dephasing":
            result = dephasing_oracle(model, self.config.bath.correlation(), times, rho0)
        else:
            bath = DiscreteBath(g=oracle.g, omega=oracle.omega, beta=self.config.bath.beta)
            cutoffs = oracle.cutoffs[0] if len(oracle.cutoffs) == 1 else oracle.cutoffs
            result = discretized_bath_oracle(
                model, bath, cutoffs, times, rho0, oracle.max_dimension, oracle.recurrence_fraction
            )
        self._record(result.flags)
        console.print(self.emit(result, f"{self.config.output.prefix}_oracle"))
        return self.exit_code()

    def run_suite(self) -> int:
        suite = self.config.suite
        settings = SuiteSettings(
            seed=suite.seed,
            trajectories=suite.trajectories,
            noise_samples=suite.noise_samples,
            threads=self.threads,
            out_dir=self.out_dir,
        )
        report = run_suite(suite.checks, settings)
        self._print_lines("Acceptance suite", report.lines())
        if not report.passed:
            self._record(("suite-failed",))
        return self.exit_code()

    # Helpers

    def _record(self, flags) -> None:
        for flag in flags:
            if flag not in self.flags:
                logger.warning(f"Flag raised: {flag}")
                self.flags.append(flag)

    def _print_lines(self, title: str, lines: List[str]) -> None:
        table = Table(title=title)
        for column in ("check", "metric", "tolerance", "verdict"):
            table.add_column(column)
        for line in lines:
            table.add_row(*line.split(" ", 3))
        console.print(table)

    def exit_code(self) -> int:
        elapsed = (datetime.now() - self.start_time).total_seconds()
        if self.flags and not self.allow_flagged:
            logger.warning(f"Finished with flags {self.flags} after {elapsed:.2f}s")
            return EXIT_FLAGGED
        logger.info(f"Finished after {elapsed:.2f}s")
        return EXIT_OK


app = typer.Typer(name="messkit", help="Open-quantum-system toolkit: mode fits, solvers and checks.", add_completion=False)

ConfigOption = Annotated[Optional[str], typer.Option("--config", "-c", help="YAML run configuration")]
SeedOption = Annotated[Optional[int], typer.Option("--seed-override", help="Replace every seed in the configuration")]
OutDirOption = Annotated[Optional[str], typer.Option("--out-dir", help="Output directory")]
FlaggedOption = Annotated[bool, typer.Option("--allow-flagged", help="Exit 0 even with convergence flags")]
ThreadsOption = Annotated[Optional[int], typer.Option("--threads", help="Worker threads (default MESSKIT_THREADS or 1)")]
LogLevelOption = Annotated[str, typer.Option("--log-level", help="DEBUG, INFO, WARNING or ERROR")]


def _execute(
    action: str,
    config_path: Optional[str],
    seed: Optional[int],
    out_dir: Optional[str],
    allow_flagged: bool,
    threads: Optional[int],
    log_level: str,
) -> None:
    """Load the configuration, run one subcommand and exit with its code."""
    setup_logging(log_level)
    try:
        manager = get_config_manager()
        if config_path is None:
            config = manager.default()
            if seed is not None or out_dir is not None:
                config = apply_overrides(config, seed=seed, out_dir=out_dir)
        else:
            config = manager.get(config_path, seed=seed, out_dir=out_dir)
        runner = Messkit(config, threads=threads, allow_flagged=allow_flagged)
        code = getattr(runner, f"run_{action}")()
    except ValidationError as e:
        for message in validation_messages(e):
            logger.error(message)
        code = EXIT_INPUT
    except MesskitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        code = EXIT_INPUT
    except Exception as e:
        logger.exception(f"Internal error: {e}")
        code = EXIT_INTERNAL
    raise typer.Exit(code)


@app.command()
def fit(
    config: ConfigOption = None,
    seed_override: SeedOption = None,
    out_dir: OutDirOption = None,
    allow_flagged: FlaggedOption = False,
    threads: ThreadsOption = None,
    log_level: LogLevelOption = "INFO",
) -> None:
    """Decompose the bath and write mode files."""
    _execute("fit", config, seed_override, out_dir, allow_flagged, threads, log_level)


@app.command()
def chainmap(
    config: ConfigOption = None,
    seed_override: SeedOption = None,
    out_dir: OutDirOption = None,
    allow_flagged: FlaggedOption = False,
    threads: ThreadsOption = None,
    log_level: LogLevelOption = "INFO",
) -> None:
    """Map the bath onto a chain and write its coefficients."""
    _execute("chainmap", config, seed_override, out_dir, allow_flagged, threads, log_level)


@app.command()
def propagate(
    config: ConfigOption = None,
    seed_override: SeedOption = None,
    out_dir: OutDirOption = None,
    allow_flagged: FlaggedOption = False,
    threads: ThreadsOption = None,
    log_level: LogLevelOption = "INFO",
) -> None:
    """Fit, build, propagate and write the time series."""
    _execute("propagate", config, seed_override, out_dir, allow_flagged, threads, log_level)


@app.command()
def compare(
    config: ConfigOption = None,
    seed_override: SeedOption = None,
    out_dir: OutDirOption = None,
    allow_flagged: FlaggedOption = False,
    threads: ThreadsOption = None,
    log_level: LogLevelOption = "INFO",
) -> None:
    """Run two solver sections and compare their reduced dynamics."""
    _execute("compare", config, seed_override, out_dir, allow_flagged, threads, log_level)


@app.command()
def oracle(
    config: ConfigOption = None,
    seed_override: SeedOption = None,
    out_dir: OutDirOption = None,
    allow_flagged: FlaggedOption = False,
    threads: ThreadsOption = None,
    log_level: LogLevelOption = "INFO",
) -> None:
    """Run the dephasing or discretized-bath oracle."""
    _execute("oracle", config, seed_override, out_dir, allow_flagged, threads, log_level)


@app.command()
def suite(
    config: ConfigOption = None,
    seed_override: SeedOption = None,
    out_dir: OutDirOption = None,
    allow_flagged: FlaggedOption = False,
    threads: ThreadsOption = None,
    log_level: LogLevelOption = "INFO",
) -> None:
    """Run the acceptance checks and write suite_report.txt."""
    _execute("suite", config, seed_override, out_dir, allow_flagged, threads, log_level)


@app.command()
def version() -> None:
    """Show version information."""
    console.print(f"messkit v{__version__}")


def cli_entry_point() -> None:
    """Entry point for the command-line interface"""
    app()


if __name__ == "__main__":
    cli_entry_point()
