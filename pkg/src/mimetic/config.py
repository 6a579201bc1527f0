"""Configuration — solver tolerances, diagnostic thresholds, output paths."""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings


class SolverSettings(BaseModel):
    cg_tol: float = Field(default=1e-12, gt=0.0, lt=1.0)
    cg_max_iter: int = Field(default=2000, ge=1)


class DiagnosticSettings(BaseModel):
    dense_cap: int = Field(default=4096, ge=1)
    zero_frequency_rtol: float = Field(default=1e-8, gt=0.0)
    rank_rtol: float = Field(default=1e-10, gt=0.0)


class Settings(BaseSettings):
    output_dir: Path = Path("output")
    log_level: str = "INFO"

    solver: SolverSettings = SolverSettings()
    diagnostics: DiagnosticSettings = DiagnosticSettings()

    picard_iterations: int = Field(default=4, ge=1)

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "env_prefix": "MIMETIC_",
        "env_nested_delimiter": "__",
    }


settings = Settings()
