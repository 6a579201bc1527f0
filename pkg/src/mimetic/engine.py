"""Top-level orchestrator: scenario runs and convergence studies.

Pipeline for one scenario:
  1. Build mesh and compatible spaces from the config
  2. Set the initial state from the named preset
  3. Advance n_steps with the model's stepper, one diagnostic row per step
  4. Write the diagnostics CSV (and field dumps when requested)
"""

from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from src.mimetic import io
from src.mimetic.config import SolverSettings, settings
from src.mimetic.diagnostics.conserved import (
    linear_swe_record,
    nonlinear_swe_record,
    wave1d_record,
)
from src.mimetic.errors import InvalidArgumentError
from src.mimetic.fem.quadrature import default_quadrature
from src.mimetic.fem.space import FEFunction, physical_points, quadrature_weights, values_at_quadrature
from src.mimetic.models import ConvergenceRow, DiagnosticRecord, ModelName, ScenarioConfig
from src.mimetic.presets import State, exact_solution, initial_state
from src.mimetic.solvers.swe_linear import step_swe_linear
from src.mimetic.solvers.swe_nonlinear import step_swe_nonlinear
from src.mimetic.solvers.wave1d import step_wave1d

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent.parent / "data"


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: list[DiagnosticRecord]
    final_state: State
    outputs: list[Path] = field(default_factory=list)


@contextmanager
def solver_tolerances(tol: float, max_iter: int) -> Iterator[None]:
    previous = settings.solver
    settings.solver = SolverSettings(cg_tol=tol, cg_max_iter=max_iter)
    try:
        yield
    finally:
        settings.solver = previous


def resolve_output_dir(config: ScenarioConfig) -> Path:
    """MIMETIC_OUTPUT_DIR wins over the config's output_dir."""
    if "output_dir" in settings.model_fields_set or config.output_dir is None:
        return Path(settings.output_dir)
    return Path(config.output_dir)


def _stepper(config: ScenarioConfig) -> tuple[Callable[[State], State], Callable[[State, int], DiagnosticRecord]]:
    if config.model == "wave1d":
        return (lambda s: step_wave1d(s, config.dt)), wave1d_record
    params = config.swe_params()
    if config.model == "swe-linear":
        return (
            lambda s: step_swe_linear(s, params, config.dt),
            lambda s, k: linear_swe_record(s, params, k),
        )
    return (
        lambda s: step_swe_nonlinear(s, params, config.dt, config.n_iter),
        lambda s, k: nonlinear_swe_record(s, params, k),
    )


def simulate(config: ScenarioConfig) -> tuple[State, list[DiagnosticRecord]]:
    """Run the time loop in memory."""
    step, record = _stepper(config)
    with solver_tolerances(config.cg_tol, config.cg_max_iter):
        state = initial_state(config)
        records = [record(state, 0)]
        for k in range(1, config.n_steps + 1):
            state = step(state)
            records.append(record(state, k))
    return state, records


def run_scenario(config: ScenarioConfig, output_dir: Optional[Path] = None) -> ScenarioResult:
    out = Path(output_dir) if output_dir is not None else resolve_output_dir(config)
    logger.info(
        "Running %s (%s) on %dx%d, p=%d, %d steps of dt=%g",
        config.model, config.preset, config.nx, config.ny if config.model != "wave1d" else 1,
        config.degree, config.n_steps, config.dt,
    )
    state, records = simulate(config)

    result = ScenarioResult(config=config, records=records, final_state=state)
    result.outputs.append(io.write_diagnostics(records, out / config.diagnostics_file))
    if config.dump_fields:
        stem = Path(config.diagnostics_file).stem
        result.outputs.extend(io.write_field_dump(state, out, stem))
    logger.info("Finished %s at t=%.6g", config.model, state.t)
    return result


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

def l2_error(fn: FEFunction, exact: Callable, extra: int = 2) -> float:
    """L² distance between a discrete field and a callable, by quadrature."""
    space = fn.space
    quad = default_quadrature(space, extra=extra)
    pts = physical_points(space.mesh, quad.points)
    approx = values_at_quadrature(fn, quad)
    ref = exact(*[pts[..., d] for d in range(pts.shape[-1])])
    if space.value_rank == 0:
        diff2 = (approx - np.asarray(ref)) ** 2
    else:
        ref = np.stack([np.broadcast_to(c, approx.shape[:-1]) for c in ref], axis=-1)
        diff2 = np.sum((approx - ref) ** 2, axis=-1)
    return float(np.sqrt(np.sum(quadrature_weights(space.mesh, quad) * diff2)))


def default_reference(model: ModelName) -> ScenarioConfig:
    if model == "wave1d":
        return ScenarioConfig(model="wave1d", preset="travelling-wave", degree=1)
    if model == "swe-linear":
        return ScenarioConfig(model="swe-linear", preset="gravity-wave", f=0.0, degree=1, amplitude=0.1)
    raise InvalidArgumentError(f"no analytic reference for model '{model}'")


def convergence_study(
    model: ModelName,
    levels: Sequence[int],
    *,
    degree: int = 1,
    field_name: str = "h",
    cfl: float = 0.25,
    final_time: float = 0.5,
    base: Optional[ScenarioConfig] = None,
) -> list[ConvergenceRow]:
    """L² errors against the analytic reference on successively finer meshes.

    Each level uses dt = cfl·Δx, rounded so that n_steps·dt = final_time.
    """
    if len(levels) < 3:
        raise InvalidArgumentError(f"a convergence study needs at least 3 levels, got {len(levels)}")
    if field_name not in ("u", "h"):
        raise InvalidArgumentError(f"field must be 'u' or 'h', got '{field_name}'")
    base = default_reference(model) if base is None else base

    rows: list[ConvergenceRow] = []
    for n in levels:
        dx = base.length_x / n
        n_steps = max(1, math.ceil(final_time / (cfl * dx)))
        config = base.model_copy(update={
            "nx": n, "ny": n, "degree": degree,
            "dt": final_time / n_steps, "n_steps": n_steps,
        })
        state, _ = simulate(config)
        reference = exact_solution(config, state.t)
        if reference is None:
            raise InvalidArgumentError(f"preset '{config.preset}' has no closed form")
        exact = reference[0] if field_name == "u" else reference[1]
        error = l2_error(getattr(state, field_name), exact)

        order = None
        if rows:
            prev = rows[-1]
            order = math.log(prev.error / error) / math.log(prev.mesh_size / dx)
        rows.append(ConvergenceRow(n_elements=n, mesh_size=dx, error=error, order=order))
        logger.info("level %d: error %.6e order %s", n, error, format_order(order))
    return rows


def format_order(order: Optional[float]) -> str:
    return "-" if order is None else f"{order:.3f}"
