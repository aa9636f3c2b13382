#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Acceptance suite

Every check builds its own fixture, runs the backends involved and reports
one line per metric: name, value, tolerance, verdict.

Author: messkit developers
"""

import filecmp
import logging
import math
import os
import tempfile
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.baths import BETA_INF, CorrelationFunction, NoisePower, SpectralDensity
from core.data import emit_timeseries
from core.modes import (
    ChainCoefficients,
    ExponentialModes,
    QuasiThermalModes,
    TerminalBathSpec,
    TerminalKind,
    aaa_fit,
    build_star_modeset,
    chain_closure_spectrum,
    extract_exponential_modes,
    fit_exponential_modes,
    tridiagonalize,
)
from core.oracles.compare import cross_compare
from core.oracles.dephasing import dephasing_oracle
from core.oracles.discretized import DiscreteBath, discretized_bath_oracle
from core.solvers import (
    HeomVariant,
    IntegratorOptions,
    heom_propagate,
    propagate_generator,
    pseudomode_propagate,
    tcl2_propagate,
    thermofield_transform,
)
from core.statespace import GeneratorForm, SystemModel, TruncationSpec, build_extended_generator
from core.stochastic import NoiseConstruction, generate_sln_noise, hops_propagate_ensemble, sln_propagate_ensemble
from core.stochastic.ensemble import trajectory_rng
from core.utils import SchemaError, Timer

# Setup logger
logger = logging.getLogger("core.oracles")

TIGHT = IntegratorOptions(rtol=1e-10, atol=1e-12)


class CheckOutcome(BaseModel):
    """One reported metric."""

    model_config = ConfigDict(frozen=True)

    name: str
    metric: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name} {self.metric:.6e} {self.tolerance:.3e} {verdict}"


class SuiteSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 1234
    trajectories: int = 10_000
    noise_samples: int = 100_000
    threads: Optional[int] = None
    out_dir: Optional[str] = None


class SuiteReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcomes: List[CheckOutcome]

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def lines(self) -> List[str]:
        return [o.line() for o in self.outcomes]


def _outcome(name: str, metric: float, tolerance: float) -> CheckOutcome:
    return CheckOutcome(name=name, metric=float(metric), tolerance=tolerance, passed=bool(metric <= tolerance))


def _ground(dim: int = 2) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def lorentzian_fixture() -> ExponentialModes:
    """Single zero-temperature Lorentzian line: C(t) = g² e^{−(γ + iω0)t}."""
    return ExponentialModes.single(0.04, 0.5 + 1.0j)


# Checks


def check_detailed_balance(settings: SuiteSettings) -> List[CheckOutcome]:
    beta = 1.0
    omega = np.linspace(0.05, 10.0, 200)
    densities = {
        "ohmic": SpectralDensity.ohmic(0.1, 5.0),
        "subohmic": SpectralDensity.subohmic(0.05, 0.5, 1.0),
        "brownian": SpectralDensity.brownian(1.0, 1.0, 0.2),
    }
    out = []
    for name, density in densities.items():
        noise = NoisePower(density=density, beta=beta)
        forward = np.asarray(noise.evaluate(omega))
        backward = np.asarray(noise.evaluate(-omega))
        error = np.abs(backward - np.exp(-beta * omega) * forward) / np.maximum(1.0, np.abs(forward))
        out.append(_outcome(f"detailed-balance:{name}", error.max(), 1e-12))

    # line sums are defined through S_β; only their odd part is fixed
    lines = NoisePower(density=SpectralDensity.lorentzian([(0.3, 1.0, 0.2)]), beta=beta)
    odd = np.asarray(lines.evaluate(omega)) - np.asarray(lines.evaluate(-omega))
    error = np.abs(odd - lines.density.evaluate(omega)) / np.maximum(1.0, np.abs(odd))
    out.append(_outcome("odd-part:lorentzian", error.max(), 1e-12))
    return out


def check_subohmic_anchor(settings: SuiteSettings) -> List[CheckOutcome]:
    correlation = CorrelationFunction(source=NoisePower(density=SpectralDensity.subohmic(0.05, 0.5, 1.0)))
    _, modes = fit_exponential_modes(correlation, tol=1e-4)
    return [_outcome("subohmic-mode-count", modes.count, 40)]


def check_decomposition_roundtrip(settings: SuiteSettings) -> List[CheckOutcome]:
    fixtures = {
        "ohmic-beta1": NoisePower(density=SpectralDensity.ohmic(0.1, 5.0), beta=1.0),
        "ohmic-beta-inf": NoisePower(density=SpectralDensity.ohmic(0.1, 5.0), beta=BETA_INF),
        "subohmic-beta-inf": NoisePower(density=SpectralDensity.subohmic(0.05, 0.5, 1.0), beta=BETA_INF),
    }
    out = []
    for name, noise in fixtures.items():
        correlation = CorrelationFunction(source=noise)
        _, modes = fit_exponential_modes(correlation, tol=1e-4)
        out.append(_outcome(f"roundtrip:{name}", modes.residual_bound / abs(correlation.c0), 1e-3))
    return out


def check_backend_equivalence(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.spin_boson(0.0, 1.0)
    modes = lorentzian_fixture()
    times = np.linspace(0.0, 20.0, 101)
    rho0 = _ground()
    trunc = TruncationSpec(cutoffs=(8,), depth=8)
    results = {
        "generalized": heom_propagate(model, modes, trunc, times, rho0, HeomVariant.GENERALIZED, TIGHT),
        "ikeda": heom_propagate(model, modes, trunc, times, rho0, HeomVariant.IKEDA, TIGHT),
        "quasi-lindblad": pseudomode_propagate(
            model, modes, trunc, times, rho0, GeneratorForm.QUASI_LINDBLAD, TIGHT
        ),
    }
    names = list(results)
    out = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            report = cross_compare(results[a], results[b], tolerance=1e-4)
            out.append(_outcome(f"equivalence:{a}~{b}", report.max_deviation, 1e-4))
    _save(settings, "equivalence_heom", results["generalized"])
    return out


def check_dephasing(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.dephasing(1.0)
    modes = lorentzian_fixture()
    times = np.linspace(0.0, 10.0, 51)
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    heom = heom_propagate(model, modes, TruncationSpec(depth=10), times, rho0, HeomVariant.GENERALIZED, TIGHT)
    oracle = dephasing_oracle(model, modes, times, rho0)
    deviation = float(np.max(np.abs(heom.element(0, 1) - oracle.element(0, 1))))
    return [_outcome("dephasing:heom~oracle", deviation, 1e-6)]


def check_brute_force(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.spin_boson(1.0, 0.5)
    bath = DiscreteBath(g=[0.1, 0.1], omega=[1.0, 1.5])
    window = 0.3 * bath.recurrence_time()
    times = np.linspace(0.0, window, 41)
    rho0 = _ground()
    oracle = discretized_bath_oracle(model, bath, 8, times, rho0)
    modes = bath.to_exponential(damping=1e-6)
    trunc = TruncationSpec(cutoffs=(8,), depth=8)
    backends = {
        "heom-generalized": heom_propagate(model, modes, trunc, times, rho0, HeomVariant.GENERALIZED, TIGHT),
        "quasi-lindblad": pseudomode_propagate(
            model, modes, trunc, times, rho0, GeneratorForm.QUASI_LINDBLAD, TIGHT
        ),
    }
    return [
        _outcome(f"brute-force:{name}", cross_compare(result, oracle).max_deviation, 1e-3)
        for name, result in backends.items()
    ]


def check_tcl2(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.spin_boson(1.0, 1.0)
    modes = ExponentialModes.single(0.01, 0.5 + 1.0j)
    times = np.linspace(0.0, 5.0, 51)
    rho0 = _ground()
    heom = heom_propagate(
        model, modes, TruncationSpec(depth=1), times, rho0, HeomVariant.GENERALIZED,
        IntegratorOptions(rtol=1e-12, atol=1e-14),
    )
    tcl2 = tcl2_propagate(model, modes, times, rho0, max_step=0.005)
    return [_outcome("tcl2~heom-depth-1", heom.max_deviation(tcl2), 1e-6)]


def noise_correlator_scores(
    modes: ExponentialModes,
    samples: int,
    seed: int,
    construction: NoiseConstruction,
    lags: int = 20,
    step: float = 0.05,
) -> Dict[str, np.ndarray]:
    """
    Standard scores of the estimated non-conjugated correlators at lags 1..``lags``.

    Returns arrays of |estimate − target|/stderr for the real and imaginary
    parts of ⟨Z_c(t)Z_c(0)⟩, ⟨Z_c(t)Z_q(0)⟩, ⟨Z_q(t)Z_c(0)⟩ and ⟨Z_q(t)Z_q(0)⟩.
    """
    grid = step * np.arange(lags + 1)
    z_c = np.empty((samples, grid.size), dtype=complex)
    z_q = np.empty_like(z_c)
    for i in range(samples):
        pair = generate_sln_noise(modes, grid, construction=construction, rng=trajectory_rng(seed, i))
        z_c[i], z_q[i] = pair.z_c, pair.z_q
    c = modes.correlation(grid[1:])
    targets = {
        "cc": (z_c[:, 1:] * z_c[:, :1], 2.0 * c.real),
        "cq": (z_c[:, 1:] * z_q[:, :1], 2.0j * c.imag),
        "qc": (z_q[:, 1:] * z_c[:, :1], np.zeros(lags)),
        "qq": (z_q[:, 1:] * z_q[:, :1], np.zeros(lags)),
    }
    scores = {}
    for name, (products, target) in targets.items():
        mean = products.mean(axis=0)
        err_re = products.real.std(axis=0, ddof=1) / math.sqrt(samples)
        err_im = products.imag.std(axis=0, ddof=1) / math.sqrt(samples)
        scores[name] = np.concatenate(
            [np.abs(mean.real - target.real) / err_re, np.abs(mean.imag - target.imag) / err_im]
        )
    return scores


def check_stochastic(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.spin_boson(0.0, 1.0)
    modes = lorentzian_fixture()
    times = np.linspace(0.0, 5.0, 21)
    rho0 = _ground()
    heom = heom_propagate(model, modes, TruncationSpec(depth=8), times, rho0, HeomVariant.GENERALIZED, TIGHT)
    white = math.sqrt(math.sqrt(abs(complex(modes.correlation(0.0)))))
    sln = sln_propagate_ensemble(
        model, modes, times, settings.trajectories, settings.seed, rho0,
        substeps=5, white_scale=white, threads=settings.threads,
    )
    hops = hops_propagate_ensemble(
        model, modes, 6, times, settings.trajectories, settings.seed, rho0, substeps=5, threads=settings.threads
    )
    out = []
    for name, ensemble in (("sln", sln), ("hops", hops)):
        report = cross_compare(ensemble, heom)
        out.append(_outcome(f"stochastic:{name}~heom:sigma_z", report.element_max["rho_00"], 3.0))
        _save(settings, f"stochastic_{name}", ensemble.as_result())
    for construction in NoiseConstruction:
        scores = noise_correlator_scores(modes, settings.noise_samples, settings.seed, construction)
        for name, values in scores.items():
            # fraction of lags outside 3σ
            outside = float(np.mean(values > 3.0))
            out.append(_outcome(f"noise:{construction.value}:{name}", outside, 0.05))
    return out


def check_thermofield(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.spin_boson(0.0, 1.0)
    modes = QuasiThermalModes.single(g=0.1, n=0.5, omega=1.0, gamma=0.2)
    times = np.linspace(0.0, 10.0, 51)
    report = thermofield_transform(
        model, modes, (6, 6), 24, times=times, rho0=_ground(), tol=1e-8, options=TIGHT
    )
    deviation = report.max_deviation if report.max_deviation is not None else math.inf
    return [_outcome("thermofield:one-mode~two-mode", deviation, 1e-8)]


def check_chain_closure(settings: SuiteSettings) -> List[CheckOutcome]:
    g, w0, gamma = 0.3, 1.0, 0.2
    coeffs = ChainCoefficients(l=1, site_energies=np.array([w0]), hoppings=np.array([g]))
    omega = np.linspace(-3.0, 5.0, 401)
    spectrum = chain_closure_spectrum(coeffs, TerminalBathSpec(kind=TerminalKind.WIDE_BAND, gamma=gamma))(omega)
    target = 2.0 * g ** 2 * gamma / ((omega - w0) ** 2 + gamma ** 2)
    lorentz = float(np.max(np.abs(spectrum - target)))

    g0, gamma_rc = 0.5, 0.1
    rc = ChainCoefficients(l=2, site_energies=np.array([w0 ** 2]), hoppings=np.array([g0]))
    omega = np.linspace(0.01, 3.0, 300)
    shape = chain_closure_spectrum(
        rc, TerminalBathSpec(kind=TerminalKind.OHMIC, gamma=gamma_rc, cutoff=100.0 * w0, renormalize="full")
    )(omega)
    reference = 4.0 * g0 ** 2 * gamma_rc * omega / ((omega ** 2 - w0 ** 2) ** 2 + 4.0 * gamma_rc ** 2 * omega ** 2)
    rc_error = float(np.max(np.abs(shape / shape.max() - reference / reference.max())))
    return [_outcome("chain-closure:lorentzian", lorentz, 1e-10), _outcome("chain-closure:reaction-coordinate", rc_error, 0.01)]


def check_chain_vs_star(settings: SuiteSettings) -> List[CheckOutcome]:
    reference = ExponentialModes(d=[0.02, 0.01], z=[0.5 + 1.0j, 0.4 - 0.6j])
    omega = np.linspace(-8.0, 8.0, 801)
    rational = aaa_fit(omega, reference.spectrum(omega), tol=1e-12)
    modes = extract_exponential_modes(rational)
    star = build_star_modeset(modes)
    chain = tridiagonalize(star)
    model = SystemModel.spin_boson(0.5, 1.0)
    times = np.linspace(0.0, 10.0, 51)
    trunc = TruncationSpec(cutoffs=(6,))
    results = [
        propagate_generator(
            build_extended_generator(model, modeset, trunc, GeneratorForm.FIRST), times, _ground(), TIGHT
        )
        for modeset in (star, chain)
    ]
    return [_outcome("chain~star", results[0].max_deviation(results[1]), 1e-3)]


def check_reproducibility(settings: SuiteSettings) -> List[CheckOutcome]:
    model = SystemModel.spin_boson(0.0, 1.0)
    modes = lorentzian_fixture()
    times = np.linspace(0.0, 2.0, 11)
    mismatches = 0
    with tempfile.TemporaryDirectory() as scratch:
        paths = []
        for run, threads in enumerate((1, 2)):
            ensemble = sln_propagate_ensemble(model, modes, times, 96, settings.seed, substeps=4, threads=threads)
            paths.append(emit_timeseries(ensemble.as_result(), os.path.join(scratch, str(run)), "sln").csv)
        mismatches += 0 if filecmp.cmp(paths[0], paths[1], shallow=False) else 1
    return [_outcome("reproducibility:csv-mismatches", mismatches, 0)]


CHECKS: Dict[str, Callable[[SuiteSettings], List[CheckOutcome]]] = {
    "detailed-balance": check_detailed_balance,
    "subohmic-anchor": check_subohmic_anchor,
    "decomposition-roundtrip": check_decomposition_roundtrip,
    "backend-equivalence": check_backend_equivalence,
    "dephasing": check_dephasing,
    "brute-force": check_brute_force,
    "tcl2": check_tcl2,
    "stochastic": check_stochastic,
    "thermofield": check_thermofield,
    "chain-closure": check_chain_closure,
    "chain-vs-star": check_chain_vs_star,
    "reproducibility": check_reproducibility,
}


def _save(settings: SuiteSettings, name: str, result) -> None:
    if settings.out_dir is not None:
        emit_timeseries(result, settings.out_dir, name, plot_stub=False)


def run_suite(checks: Optional[Sequence[str]] = None, settings: Optional[SuiteSettings] = None) -> SuiteReport:
    """
    Run the named checks (all when empty) and write ``suite_report.txt``
    into ``settings.out_dir`` when set.

    Raises:
        SchemaError: On unknown check names
    """
    settings = settings or SuiteSettings()
    names = list(checks) if checks else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise SchemaError("unknown checks", {"unknown": unknown, "known": list(CHECKS)})
    outcomes: List[CheckOutcome] = []
    for name in names:
        with Timer(f"check {name}", log=False) as timer:
            results = CHECKS[name](settings)
        for outcome in results:
            level = logging.INFO if outcome.passed else logging.WARNING
            logger.log(level, outcome.line())
        logger.info(f"{name}: {timer.elapsed():.2f}s")
        outcomes.extend(results)
    report = SuiteReport(outcomes=outcomes)
    if settings.out_dir is not None:
        os.makedirs(settings.out_dir, exist_ok=True)
        with open(os.path.join(settings.out_dir, "suite_report.txt"), "w") as f:
            f.write("\n".join(report.lines()) + "\n")
    return report
