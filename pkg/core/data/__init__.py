#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Data files: time-series CSV, metadata sidecar, mode-set files, plot stubs

CSV layout: header row, comma delimiter, columns ``t``, ``trace`` and one
column per observable (``Re_``/``Im_`` pairs for complex ones). Ensemble
results add a ``<column>_stderr`` next to every column but ``t``. Numbers are
printed with 17 significant digits.

Author: messkit developers
"""

import logging
import os
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from core.modes import ChainCoefficients, EffectiveModeSet, ExponentialModes, IkedaModes, QuasiThermalModes
from core.solvers.results import PropagationResult
from core.utils import SchemaError, from_json, to_json, utc_timestamp

# Setup logger
logger = logging.getLogger("core.data")

FLOAT_FORMAT = "%.17g"
PAULI = {
    "sigma_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma_y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sigma_z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_ELEMENT = re.compile(r"^rho_(\d)(\d)$")
_POPULATION = re.compile(r"^pop_(\d+)$")

ModeFileInput = Union[ExponentialModes, EffectiveModeSet, QuasiThermalModes, IkedaModes, ChainCoefficients]


class ArtifactPaths(BaseModel):
    """Files written for one result."""

    model_config = ConfigDict(frozen=True)

    csv: str
    metadata: str
    plot: Optional[str] = None


def _observable_columns(
    name: str, result: PropagationResult
) -> List[Tuple[str, np.ndarray, Optional[np.ndarray]]]:
    """(column, values, stderr) triples for one observable name."""
    d = result.dim
    err = result.stderr
    if name in PAULI:
        if d != 2:
            raise SchemaError(f"observable {name} needs a two-level system", {"dim": d})
        values = np.real(result.expectation(PAULI[name]))
        stderr = None
        if err is not None:
            if name == "sigma_z":
                stderr = np.hypot(err[:, 0, 0].real, err[:, 1, 1].real)
            elif name == "sigma_x":
                stderr = 2.0 * np.abs(err[:, 0, 1].real)
            else:
                stderr = 2.0 * np.abs(err[:, 0, 1].imag)
        return [(name, values, stderr)]
    match = _ELEMENT.match(name)
    if match:
        i, j = int(match.group(1)), int(match.group(2))
        if i >= d or j >= d:
            raise SchemaError(f"observable {name} is outside the system dimension", {"dim": d})
        values = result.element(i, j)
        return [
            (f"Re_{name}", values.real, None if err is None else err[:, i, j].real),
            (f"Im_{name}", values.imag, None if err is None else err[:, i, j].imag),
        ]
    match = _POPULATION.match(name)
    if match:
        i = int(match.group(1))
        if i >= d:
            raise SchemaError(f"observable {name} is outside the system dimension", {"dim": d})
        return [(name, result.populations()[:, i], None if err is None else err[:, i, i].real)]
    raise SchemaError(f"unknown observable {name}", {"known": sorted(PAULI) + ["rho_ij", "pop_i"]})


def timeseries_frame(result: PropagationResult, observables: Sequence[str]) -> pd.DataFrame:
    """Tabulate a result in CSV column order."""
    columns: Dict[str, np.ndarray] = {"t": result.times}
    trace = np.real(result.trace())
    columns["trace"] = trace
    if result.stderr is not None:
        diag = np.real(np.diagonal(result.stderr, axis1=1, axis2=2))
        columns["trace_stderr"] = np.sqrt(np.sum(diag ** 2, axis=1))
    for name in observables:
        for column, values, stderr in _observable_columns(name, result):
            columns[column] = np.asarray(values, dtype=float)
            if result.stderr is not None and stderr is not None:
                columns[f"{column}_stderr"] = np.asarray(stderr, dtype=float)
    return pd.DataFrame(columns)


def _metadata_record(result: PropagationResult, extra: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    return {
        "backend": result.backend,
        "flags": list(result.flags),
        "diagnostics": result.diagnostics,
        "metadata": result.metadata,
        "extra": extra or {},
        "points": int(result.times.size),
        "timestamp": utc_timestamp(),
    }


def _plot_stub(csv_name: str, frame: pd.DataFrame) -> str:
    lines = [
        "# gnuplot script",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't'",
    ]
    plotted = [c for c in frame.columns if c != "t" and not c.endswith("_stderr")]
    parts = [f"'{csv_name}' using 1:{frame.columns.get_loc(c) + 1} with lines" for c in plotted]
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def emit_timeseries(
    result: PropagationResult,
    directory: str,
    prefix: str = "run",
    observables: Sequence[str] = ("sigma_z", "rho_01"),
    plot_stub: bool = True,
    extra: Optional[Dict[str, Any]] = None,
) -> ArtifactPaths:
    """
    Write ``<prefix>.csv``, ``<prefix>.json`` and optionally ``<prefix>.gp``.

    Raises:
        SchemaError: If the directory cannot be written
    """
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise SchemaError(f"cannot create output directory {directory}", {"error": str(e)})
    frame = timeseries_frame(result, observables)
    csv_path = os.path.join(directory, f"{prefix}.csv")
    meta_path = os.path.join(directory, f"{prefix}.json")
    plot_path = os.path.join(directory, f"{prefix}.gp") if plot_stub else None
    try:
        frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        with open(meta_path, "w") as f:
            f.write(to_json(_metadata_record(result, extra), indent=2))
        if plot_path is not None:
            with open(plot_path, "w") as f:
                f.write(_plot_stub(os.path.basename(csv_path), frame))
    except OSError as e:
        raise SchemaError(f"cannot write to {directory}", {"error": str(e)})
    logger.info(f"Wrote {csv_path} ({len(frame)} rows, {len(frame.columns)} columns)")
    return ArtifactPaths(csv=csv_path, metadata=meta_path, plot=plot_path)


def read_timeseries(path: str) -> pd.DataFrame:
    """Read a time-series CSV back at full precision."""
    if not os.path.exists(path):
        raise SchemaError(f"file {path} not found")
    return pd.read_csv(path, float_precision="round_trip")


def read_metadata(path: str) -> Dict[str, Any]:
    with open(path, "r") as f:
        return from_json(f.read())


def _pair(values: np.ndarray) -> List[List[float]]:
    arr = np.asarray(values, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _unpair(values: Any) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def modes_record(modes: ModeFileInput) -> Dict[str, Any]:
    """JSON-ready record of a mode decomposition; complex values as [re, im] pairs."""
    if isinstance(modes, ExponentialModes):
        return {
            "type": "exponential",
            "d": _pair(modes.d),
            "z": _pair(modes.z),
            "residual_bound": modes.residual_bound,
            "t_max": modes.t_max,
            "flags": list(modes.flags),
        }
    if isinstance(modes, EffectiveModeSet):
        return {
            "type": "modeset",
            "E": _pair(modes.E),
            "kappa": _pair(modes.kappa),
            "eta": _pair(modes.eta),
            "topology": modes.topology.value,
            "tolerance": modes.tolerance,
        }
    if isinstance(modes, QuasiThermalModes):
        return {
            "type": "quasi-thermal",
            "g": modes.g.tolist(),
            "n": modes.n.tolist(),
            "omega": modes.omega.tolist(),
            "gamma": modes.gamma.tolist(),
            "residual": modes.residual,
            "flags": list(modes.flags),
        }
    if isinstance(modes, IkedaModes):
        return {
            "type": "ikeda",
            "E": _pair(modes.E),
            "kappa": _pair(modes.kappa),
            "eta_re": _pair(modes.eta_re),
            "eta_im": _pair(modes.eta_im),
        }
    if isinstance(modes, ChainCoefficients):
        return {
            "type": "chain",
            "l": modes.l,
            "site_energies": modes.site_energies.tolist(),
            "hoppings": modes.hoppings.tolist(),
            "orthogonality_error": modes.orthogonality_error,
            "flags": list(modes.flags),
        }
    raise SchemaError(f"cannot write modes of type {type(modes).__name__}")


def write_modes(modes: ModeFileInput, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        f.write(to_json(modes_record(modes), indent=2))
    logger.info(f"Wrote mode file {path}")
    return path


def read_modes(path: str) -> ModeFileInput:
    """
    Read a mode file written by ``write_modes``.

    Raises:
        SchemaError: On unknown record types
    """
    with open(path, "r") as f:
        record = from_json(f.read())
    kind = record.get("type")
    if kind == "exponential":
        return ExponentialModes(
            d=_unpair(record["d"]),
            z=_unpair(record["z"]),
            residual_bound=record.get("residual_bound", 0.0),
            t_max=record.get("t_max", 0.0),
            flags=tuple(record.get("flags", ())),
        )
    if kind == "modeset":
        return EffectiveModeSet(
            E=_unpair(record["E"]),
            kappa=_unpair(record["kappa"]),
            eta=_unpair(record["eta"]),
            topology=record.get("topology", "general"),
            tolerance=record.get("tolerance", 0.0),
        )
    if kind == "quasi-thermal":
        return QuasiThermalModes(
            g=record["g"],
            n=record["n"],
            omega=record["omega"],
            gamma=record["gamma"],
            residual=record.get("residual", 0.0),
            flags=tuple(record.get("flags", ())),
        )
    if kind == "ikeda":
        return IkedaModes(
            E=_unpair(record["E"]),
            kappa=_unpair(record["kappa"]),
            eta_re=_unpair(record["eta_re"]),
            eta_im=_unpair(record["eta_im"]),
        )
    if kind == "chain":
        return ChainCoefficients(
            l=record["l"],
            site_energies=np.asarray(record["site_energies"], dtype=float),
            hoppings=np.asarray(record["hoppings"], dtype=float),
            orthogonality_error=record.get("orthogonality_error", 0.0),
            flags=tuple(record.get("flags", ())),
        )
    raise SchemaError(f"unknown mode file type {kind!r}", {"path": path})


def write_modeset_text(modeset: EffectiveModeSet, path: str, tolerance: float) -> str:
    """
    Delimited mode-set file.

    Three ``#`` header lines (K, topology, achieved tolerance), then one
    comma-separated row per entry: ``E,i,j,re,im`` for the non-zero entries of
    E, ``kappa,i,re,im`` and ``eta,i,re,im``.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    rows = [
        f"# K={modeset.count}",
        f"# topology={modeset.topology.value}",
        f"# tolerance={tolerance:.17g}",
    ]
    for i, j in zip(*np.nonzero(modeset.E)):
        value = modeset.E[i, j]
        rows.append(f"E,{i},{j},{value.real:.17g},{value.imag:.17g}")
    for name in ("kappa", "eta"):
        for i, value in enumerate(getattr(modeset, name)):
            rows.append(f"{name},{i},{value.real:.17g},{value.imag:.17g}")
    with open(path, "w") as f:
        f.write("\n".join(rows) + "\n")
    logger.info(f"Wrote mode-set table {path} (K={modeset.count})")
    return path


def read_modeset_text(path: str) -> Tuple[EffectiveModeSet, float]:
    """
    Read a file written by ``write_modeset_text``.

    Raises:
        SchemaError: On missing headers or malformed rows
    """
    header: Dict[str, str] = {}
    entries: List[List[str]] = []
    with open(path, "r") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key] = value
            else:
                entries.append(line.split(","))
    try:
        K = int(header["K"])
        E = np.zeros((K, K), dtype=complex)
        vectors = {"kappa": np.zeros(K, dtype=complex), "eta": np.zeros(K, dtype=complex)}
        for row in entries:
            if row[0] == "E":
                E[int(row[1]), int(row[2])] = float(row[3]) + 1j * float(row[4])
            else:
                vectors[row[0]][int(row[1])] = float(row[2]) + 1j * float(row[3])
        tolerance = float(header.get("tolerance", "0"))
        modeset = EffectiveModeSet(
            E=E,
            kappa=vectors["kappa"],
            eta=vectors["eta"],
            topology=header.get("topology", "general"),
            tolerance=tolerance,
        )
        return modeset, tolerance
    except (KeyError, IndexError, ValueError) as e:
        raise SchemaError(f"malformed mode-set file {path}", {"error": str(e)})


__all__ = [
    "FLOAT_FORMAT",
    "ArtifactPaths",
    "emit_timeseries",
    "modes_record",
    "read_metadata",
    "read_modes",
    "read_modeset_text",
    "read_timeseries",
    "timeseries_frame",
    "write_modes",
    "write_modeset_text",
]
