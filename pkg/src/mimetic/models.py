"""Pydantic v2 data models — physical parameters, diagnostic records and scenario configuration."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ---------------------------------------------------------------------------
# Type aliases
# ---------------------------------------------------------------------------

ModelName = Literal["wave1d", "swe-linear", "swe-nonlinear"]

PresetName = Literal[
    "standing-wave",
    "travelling-wave",
    "geostrophic",
    "gravity-wave",
    "vortex-pair",
]

PRESETS_BY_MODEL: dict[str, tuple[str, ...]] = {
    "wave1d": ("standing-wave", "travelling-wave"),
    "swe-linear": ("geostrophic", "gravity-wave"),
    "swe-nonlinear": ("vortex-pair", "geostrophic"),
}

DIAGNOSTIC_COLUMNS: tuple[str, ...] = (
    "step",
    "time",
    "mass",
    "energy",
    "total_vorticity",
    "enstrophy",
    "balance_residual",
)


# ---------------------------------------------------------------------------
# Physical parameters
# ---------------------------------------------------------------------------

class SWEParams(BaseModel):
    """Constants of the rotating shallow water model on the f-plane."""

    model_config = ConfigDict(frozen=True)

    f: float = 0.0
    g: float = Field(default=1.0, gt=0.0)
    H: float = Field(default=1.0, gt=0.0)
    apvm_tau: float = Field(default=0.0, ge=0.0)


# ---------------------------------------------------------------------------
# Solver / diagnostic records
# ---------------------------------------------------------------------------

class SolveReport(BaseModel):
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True


class DiagnosticRecord(BaseModel):
    step: int = 0
    time: float = 0.0
    mass: float = 0.0
    energy: float = 0.0
    total_vorticity: float = 0.0
    enstrophy: float = 0.0
    balance_residual: float = 0.0

    @model_validator(mode="after")
    def _all_finite(self) -> DiagnosticRecord:
        for name in DIAGNOSTIC_COLUMNS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"diagnostic '{name}' is not finite: {value}")
        return self


class DispersionResult(BaseModel):
    label: str
    frequencies: list[float] = Field(default_factory=list)
    zero_count: int = 0

    @field_validator("frequencies")
    @classmethod
    def _sorted(cls, values: list[float]) -> list[float]:
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError("frequencies must be sorted ascending")
        return values


class ConvergenceRow(BaseModel):
    n_elements: int
    mesh_size: float
    error: float
    order: Optional[float] = None


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

class ScenarioConfig(BaseModel):
    """One run of a time-dependent model, as read from a `key = value` file."""

    model_config = ConfigDict(extra="forbid")

    model: ModelName
    length_x: float = Field(default=1.0, gt=0.0)
    length_y: float = Field(default=1.0, gt=0.0)
    nx: int = Field(default=16, ge=1)
    ny: int = Field(default=16, ge=1)
    degree: int = Field(default=1, ge=1, le=3)

    f: float = 0.0
    g: float = Field(default=1.0, gt=0.0)
    depth: float = Field(default=1.0, gt=0.0)
    apvm: bool = False
    apvm_tau: Optional[float] = Field(default=None, ge=0.0)

    dt: float = Field(default=0.01, gt=0.0)
    n_steps: int = Field(default=100, ge=0)
    n_iter: int = Field(default=4, ge=1)

    preset: PresetName = "standing-wave"
    amplitude: float = 1.0

    output_dir: Optional[Path] = None
    diagnostics_file: str = "diagnostics.csv"
    dump_fields: bool = False

    cg_tol: float = Field(default=1e-12, gt=0.0, lt=1.0)
    cg_max_iter: int = Field(default=2000, ge=1)

    @model_validator(mode="after")
    def _preset_matches_model(self) -> ScenarioConfig:
        allowed = PRESETS_BY_MODEL[self.model]
        if self.preset not in allowed:
            raise ValueError(
                f"preset '{self.preset}' is not available for model "
                f"'{self.model}' (choose from {', '.join(allowed)})"
            )
        if self.model != "wave1d" and self.degree > 2:
            raise ValueError("quadrilateral families support degree 1 or 2")
        return self

    def swe_params(self) -> SWEParams:
        tau = 0.0
        if self.apvm:
            tau = self.apvm_tau if self.apvm_tau is not None else 0.5 * self.dt
        return SWEParams(f=self.f, g=self.g, H=self.depth, apvm_tau=tau)
