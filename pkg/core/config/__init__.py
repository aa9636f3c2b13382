#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Run configuration

A run is described by one YAML file with ``schema_version: 1`` and the
sections ``system``, ``bath``, ``decomposition``, ``solver``, ``output``,
``compare``, ``oracle`` and ``suite``. Validation errors name the field
path and the YAML line it came from.

Author: messkit developers
"""

import copy
import logging
import math
import os
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.baths import BETA_INF, CorrelationFunction, DensityKind, NoisePower, SpectralDensity, load_tabulated_density
from core.modes import BrownianRegime, TerminalBathSpec
from core.statespace import GeneratorForm, SystemModel, TruncationSpec
from core.utils import SchemaError

# Setup logger
logger = logging.getLogger("core.config")

SCHEMA_VERSION = 1

Backend = Literal[
    "heom-generalized",
    "heom-ikeda",
    "heom-standard",
    "pseudomode",
    "tcl2",
    "sln",
    "hops",
    "thermofield",
]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MatrixSpec(_Section):
    """Dense matrix given as real and (optional) imaginary parts."""

    real: List[List[float]]
    imag: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _check(self) -> "MatrixSpec":
        rows = len(self.real)
        if rows == 0 or any(len(r) != rows for r in self.real):
            raise ValueError("matrix must be square and non-empty")
        if self.imag is not None and (len(self.imag) != rows or any(len(r) != rows for r in self.imag)):
            raise ValueError("imaginary part must match the real part")
        return self

    def to_array(self) -> np.ndarray:
        out = np.asarray(self.real, dtype=complex)
        if self.imag is not None:
            out = out + 1j * np.asarray(self.imag, dtype=float)
        return out


class SystemConfig(_Section):
    kind: Literal["spin-boson", "dephasing", "matrix"] = "spin-boson"
    epsilon: float = 0.0
    delta: float = 1.0
    H: Optional[MatrixSpec] = None
    S: Optional[MatrixSpec] = None
    rho0: Optional[MatrixSpec] = None

    @model_validator(mode="after")
    def _check(self) -> "SystemConfig":
        if self.kind == "matrix" and (self.H is None or self.S is None):
            raise ValueError("matrix systems need H and S")
        return self

    def build(self) -> SystemModel:
        if self.kind == "spin-boson":
            return SystemModel.spin_boson(self.epsilon, self.delta)
        if self.kind == "dephasing":
            return SystemModel.dephasing(self.epsilon)
        return SystemModel(H=self.H.to_array(), S=self.S.to_array())

    def initial_state(self, dim: int) -> np.ndarray:
        if self.rho0 is None:
            rho = np.zeros((dim, dim), dtype=complex)
            rho[0, 0] = 1.0
            return rho
        rho = self.rho0.to_array()
        if rho.shape != (dim, dim):
            raise SchemaError("system.rho0 does not match the system dimension", {"dim": dim})
        return rho


class BathConfig(_Section):
    kind: DensityKind = DensityKind.OHMIC
    alpha: float = Field(default=0.1, ge=0.0)
    s: float = Field(default=1.0, gt=0.0)
    omega_c: float = Field(default=5.0, gt=0.0)
    c0: float = 0.0
    omega0: float = 0.0
    gamma0: float = 0.0
    terms: List[Tuple[float, float, float]] = Field(default_factory=list)
    table: Optional[str] = None
    beta: float = Field(default=BETA_INF, gt=0.0)
    high_temperature: bool = False
    tail_tol: float = Field(default=1e-8, gt=0.0)

    @field_validator("beta", mode="before")
    @classmethod
    def _beta(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return value

    def density(self) -> SpectralDensity:
        if self.kind == DensityKind.TABULATED:
            if self.table is None:
                raise SchemaError("bath.table is required for tabulated densities")
            return load_tabulated_density(self.table)
        if self.kind == DensityKind.LORENTZIAN:
            return SpectralDensity.lorentzian(list(self.terms))
        if self.kind == DensityKind.BROWNIAN:
            return SpectralDensity.brownian(self.c0, self.omega0, self.gamma0)
        if self.kind == DensityKind.SUBOHMIC:
            return SpectralDensity.subohmic(self.alpha, self.s, self.omega_c)
        return SpectralDensity.ohmic(self.alpha, self.omega_c)

    def noise(self) -> NoisePower:
        return NoisePower(density=self.density(), beta=self.beta)

    def correlation(self) -> CorrelationFunction:
        return CorrelationFunction(
            source=self.noise(), high_temperature=self.high_temperature, tail_tol=self.tail_tol
        )


class DecompositionConfig(_Section):
    method: Literal["aaa", "chain", "quasi-thermal", "brownian-ikeda"] = "aaa"
    tol: float = Field(default=1e-4, gt=0.0)
    m_max: int = Field(default=120, ge=2)
    n_samples: int = Field(default=2000, ge=16)
    t_max: Optional[float] = Field(default=None, gt=0.0)
    certify: bool = True
    topology: Literal["star", "chain"] = "star"
    lindblad_gauge: bool = False
    K: int = Field(default=4, ge=1)
    l: int = Field(default=1, ge=1, le=2)
    terminal: TerminalBathSpec = Field(default_factory=TerminalBathSpec)
    multi_starts: int = Field(default=16, ge=1)
    seed: int = 0
    regime: BrownianRegime = BrownianRegime.UNDERDAMPED


class SolverConfig(_Section):
    backend: Backend = "heom-generalized"
    form: GeneratorForm = GeneratorForm.QUASI_LINDBLAD
    t_max: float = Field(default=10.0, gt=0.0)
    n_points: int = Field(default=201, ge=2)
    # truncation
    cutoffs: List[int] = Field(default_factory=lambda: [4])
    depth: int = Field(default=4, ge=1)
    filter_threshold: float = Field(default=0.0, ge=0.0)
    max_dimension: int = Field(default=1_000_000, ge=1)
    rescaled: bool = True
    convergence_check: bool = False
    convergence_tol: float = Field(default=1e-4, gt=0.0)
    gamma_s: float = 0.0
    pure_state: bool = False
    # integrator
    method: Literal["dopri5", "expm"] = "dopri5"
    rtol: float = Field(default=1e-8, gt=0.0)
    atol: float = Field(default=1e-10, gt=0.0)
    max_step: Optional[float] = Field(default=None, gt=0.0)
    # tcl2
    tcl2_step: float = Field(default=0.01, gt=0.0)
    memory_time: Optional[float] = Field(default=None, gt=0.0)
    accuracy_tol: float = Field(default=1e-4, gt=0.0)
    # stochastic
    trajectories: int = Field(default=1000, ge=2)
    seed: int = 0
    construction: Literal["ou-unraveling", "fft-filter"] = "ou-unraveling"
    substeps: int = Field(default=1, ge=1)
    white_scale: float = Field(default=1.0, gt=0.0)
    stderr_bound: float = Field(default=0.05, gt=0.0)
    # thermofield
    one_mode_cutoff: int = Field(default=24, ge=1)
    thermofield_tol: float = Field(default=1e-8, gt=0.0)

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_points)

    def truncation(self) -> TruncationSpec:
        return TruncationSpec(
            cutoffs=tuple(self.cutoffs),
            depth=self.depth,
            filter_threshold=self.filter_threshold,
            max_dimension=self.max_dimension,
        )


class OutputConfig(_Section):
    directory: str = "results"
    prefix: str = "run"
    observables: List[str] = Field(default_factory=lambda: ["sigma_z", "rho_01"])
    plot_stub: bool = True
    write_modes: bool = True


class CompareConfig(_Section):
    a: Optional[SolverConfig] = None
    b: Optional[SolverConfig] = None
    tolerance: float = Field(default=1e-4, gt=0.0)
    sigma: float = Field(default=3.0, gt=0.0)


class OracleConfig(_Section):
    kind: Literal["dephasing", "discretized"] = "dephasing"
    g: List[float] = Field(default_factory=list)
    omega: List[float] = Field(default_factory=list)
    cutoffs: List[int] = Field(default_factory=lambda: [8])
    max_dimension: int = Field(default=1_000_000, ge=1)
    recurrence_fraction: float = Field(default=0.3, gt=0.0)


class SuiteConfig(_Section):
    checks: List[str] = Field(default_factory=list)
    seed: int = 1234
    trajectories: int = Field(default=10_000, ge=2)
    noise_samples: int = Field(default=100_000, ge=2)


class RunConfig(_Section):
    """Top-level run configuration."""

    schema_version: Literal[1] = SCHEMA_VERSION
    system: SystemConfig = Field(default_factory=SystemConfig)
    bath: BathConfig = Field(default_factory=BathConfig)
    decomposition: DecompositionConfig = Field(default_factory=DecompositionConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    compare: CompareConfig = Field(default_factory=CompareConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    suite: SuiteConfig = Field(default_factory=SuiteConfig)


# YAML with line locations


def _line_index(node: yaml.Node, path: Tuple[Any, ...] = ()) -> Dict[Tuple[Any, ...], int]:
    """Map every key path of a composed YAML tree to its 1-based line."""
    index = {path: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            child = path + (key_node.value,)
            index.update(_line_index(value_node, child))
            index[child] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            index.update(_line_index(item, path + (i,)))
    return index


def _locate(loc: Tuple[Any, ...], lines: Dict[Tuple[Any, ...], int]) -> Optional[int]:
    for cut in range(len(loc), -1, -1):
        if tuple(loc[:cut]) in lines:
            return lines[tuple(loc[:cut])]
    return None


def validation_messages(error: ValidationError, lines: Optional[Dict[Tuple[Any, ...], int]] = None) -> List[str]:
    """One message per error: dotted field path, YAML line when known, reason."""
    messages = []
    for item in error.errors():
        loc = tuple(p for p in item["loc"] if not (isinstance(p, str) and p.startswith("function-")))
        field = ".".join(str(p) for p in loc) or "<root>"
        line = _locate(loc, lines) if lines else None
        where = f" (line {line})" if line is not None else ""
        messages.append(f"{field}{where}: {item['msg']}")
    return messages


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """
    Parse and validate YAML text.

    Raises:
        SchemaError: On YAML syntax errors or schema violations
    """
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = f" line {mark.line + 1}" if mark is not None else ""
        raise SchemaError(f"{source}:{line} invalid YAML", {"error": str(e)})
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise SchemaError(f"{source}: top level must be a mapping")
    if "schema_version" not in data:
        raise SchemaError(f"{source}: schema_version is required", {"expected": SCHEMA_VERSION})
    lines = _line_index(node) if node is not None else {}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        messages = validation_messages(e, lines)
        raise SchemaError(f"{source}: " + "; ".join(messages), {"errors": messages})


def load_config(path: str) -> RunConfig:
    """Read and validate a YAML run configuration."""
    if not os.path.exists(path):
        raise SchemaError(f"configuration file {path} not found")
    with open(path, "r") as f:
        text = f.read()
    logger.info(f"Loading configuration: {path}")
    return parse_config(text, source=path)


def apply_overrides(
    config: RunConfig,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> RunConfig:
    """Command-line overrides; the seed applies to the solver, decomposition and suite."""
    update = config.model_dump()
    if seed is not None:
        update["solver"]["seed"] = seed
        update["decomposition"]["seed"] = seed
        update["suite"]["seed"] = seed
        for side in ("a", "b"):
            if update["compare"][side] is not None:
                update["compare"][side]["seed"] = seed
    if out_dir is not None:
        update["output"]["directory"] = out_dir
    return RunConfig.model_validate(update)


def config_record(config: RunConfig) -> Dict[str, Any]:
    """JSON-safe dump of a configuration; an infinite beta is written as the string ``inf``."""
    data = copy.deepcopy(config.model_dump(mode="json"))
    if math.isinf(config.bath.beta):
        data["bath"]["beta"] = "inf"
    return data


class ConfigManager:
    """Loads run configurations and keeps them by path."""

    def __init__(self, env_file: Optional[str] = None):
        """
        Initialize the configuration manager.

        Args:
            env_file: ``.env`` file to load (searched from the working directory if None)
        """
        self.configs: Dict[str, RunConfig] = {}
        load_dotenv(env_file, override=False)

    def load(self, path: str) -> RunConfig:
        key = os.path.abspath(path)
        if key not in self.configs:
            self.configs[key] = load_config(path)
        return self.configs[key]

    def get(self, path: str, seed: Optional[int] = None, out_dir: Optional[str] = None) -> RunConfig:
        return apply_overrides(self.load(path), seed=seed, out_dir=out_dir)

    def default(self) -> RunConfig:
        return RunConfig()

    def dump(self, config: RunConfig, path: str) -> None:
        """Write a configuration back as YAML."""
        data = config_record(config)
        with open(path, "w") as f:
            yaml.safe_dump(data, f, sort_keys=False)
        logger.info(f"Configuration written to {path}")


# Singleton instance of ConfigManager
_config_manager = None


def get_config_manager(env_file: Optional[str] = None) -> ConfigManager:
    """
    Get the singleton instance of ConfigManager.

    Args:
        env_file: ``.env`` file loaded on first use

    Returns:
        ConfigManager: Singleton instance of ConfigManager
    """
    global _config_manager

    if _config_manager is None:
        _config_manager = ConfigManager(env_file)

    return _config_manager


__all__ = [
    "SCHEMA_VERSION",
    "BathConfig",
    "CompareConfig",
    "ConfigManager",
    "DecompositionConfig",
    "MatrixSpec",
    "OracleConfig",
    "OutputConfig",
    "RunConfig",
    "SolverConfig",
    "SuiteConfig",
    "SystemConfig",
    "apply_overrides",
    "config_record",
    "get_config_manager",
    "load_config",
    "parse_config",
    "validation_messages",
]
