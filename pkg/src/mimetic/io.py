"""Scenario files, diagnostics tables and field dumps.

Scenario files are flat `key = value` text (one entry per line, `#`
comments).  Tables are CSV written with pandas at full precision; field
dumps are one CSV per field (kind,index,value) plus a JSON sidecar
describing the mesh and spaces.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from src.mimetic.errors import ConfigError
from src.mimetic.models import DIAGNOSTIC_COLUMNS, DiagnosticRecord, ScenarioConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

def _parse_lines(text: str) -> tuple[dict[str, str], dict[str, int]]:
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        values[key] = value
        lines[key] = lineno
    return values, lines


def _validate(values: Mapping[str, str], lines: Mapping[str, int]) -> ScenarioConfig:
    known = set(ScenarioConfig.model_fields)
    for key in values:
        if key not in known:
            raise ConfigError("unknown key", key=key, line=lines.get(key))
    try:
        return ScenarioConfig.model_validate(dict(values))
    except ValidationError as exc:
        first = exc.errors()[0]
        key = str(first["loc"][0]) if first.get("loc") else None
        raise ConfigError(first["msg"], key=key, line=lines.get(key)) from exc


def parse_config_text(
    text: str, overrides: Optional[Mapping[str, str]] = None,
) -> ScenarioConfig:
    values, lines = _parse_lines(text)
    for key, value in (overrides or {}).items():
        values[key] = str(value)
        lines.pop(key, None)
    return _validate(values, lines)


def load_config(path: PathLike, overrides: Optional[Mapping[str, str]] = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config_text(text, overrides)


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        out[key] = value
    return out


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(config: ScenarioConfig) -> str:
    data = config.model_dump(exclude_none=True)
    return "".join(f"{key} = {_format_value(value)}\n" for key, value in data.items())


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def records_frame(records: Sequence[DiagnosticRecord]) -> pd.DataFrame:
    rows = [r.model_dump() for r in records]
    return pd.DataFrame(rows, columns=list(DIAGNOSTIC_COLUMNS))


def write_diagnostics(records: Sequence[DiagnosticRecord], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("Wrote %d diagnostic rows to %s", len(records), path)
    return path


def read_diagnostics(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_table(rows: Sequence[Union[BaseModel, Mapping]], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = [r.model_dump() if isinstance(r, BaseModel) else dict(r) for r in rows]
    pd.DataFrame(data).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


# ---------------------------------------------------------------------------
# Field dumps
# ---------------------------------------------------------------------------

def _field_frame(kind: str, coefficients: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({
        "kind": kind,
        "index": np.arange(coefficients.size),
        "value": coefficients,
    })


def write_field_dump(state, directory: PathLike, stem: str) -> list[Path]:
    """Write `<stem>_u.csv`, `<stem>_h.csv` and `<stem>_fields.json`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    mesh = state.spaces.mesh
    fields = {"u": state.u, "h": state.h}
    paths = []
    for name, fn in fields.items():
        path = directory / f"{stem}_{name}.csv"
        _field_frame(fn.space.family, fn.coefficients).to_csv(
            path, index=False, float_format=FLOAT_FORMAT,
        )
        paths.append(path)

    meta = {
        "time": state.t,
        "mesh": {
            "dim": mesh.dim,
            "n_cells": mesh.n_cells,
            **({"length": mesh.length} if mesh.dim == 1 else
               {"lx": mesh.lx, "ly": mesh.ly, "nx": mesh.nx, "ny": mesh.ny}),
        },
        "spaces": {
            name: {"family": fn.space.family, "degree": fn.space.degree, "dim": fn.space.dim}
            for name, fn in fields.items()
        },
    }
    sidecar = directory / f"{stem}_fields.json"
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    paths.append(sidecar)
    logger.debug("Dumped fields to %s/%s_*", directory, stem)
    return paths


def read_field_dump(directory: PathLike, stem: str) -> tuple[dict[str, np.ndarray], dict]:
    directory = Path(directory)
    meta = json.loads((directory / f"{stem}_fields.json").read_text())
    fields = {}
    for name in meta["spaces"]:
        frame = pd.read_csv(directory / f"{stem}_{name}.csv", float_precision="round_trip")
        fields[name] = frame.sort_values("index")["value"].to_numpy(dtype=float)
    return fields, meta
