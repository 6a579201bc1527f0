"""Named initial conditions and their closed-form references.

    standing-wave    wave1d         u = 0, h = A cos(2πx/L)
    travelling-wave  wave1d         u = h = A sin(2π(x - t)/L)
    geostrophic      swe-*          ψ = A sin(2πx/Lx) sin(2πy/Ly), balanced
    gravity-wave     swe-linear     u = (A cos kx, 0), h = (H/c) A cos kx
    vortex-pair      swe-nonlinear  two co-rotating Gaussian vortices

Shallow water presets are built from a streamfunction through
geostrophic_init; the nonlinear model adds the rest depth H to h.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Union

import numpy as np

from src.mimetic.errors import InvalidArgumentError
from src.mimetic.fem.space import (
    CompatibleSpaces,
    FEFunction,
    interpolate,
    make_compatible_spaces,
)
from src.mimetic.mesh import build_interval_mesh, build_periodic_quad_mesh
from src.mimetic.models import ScenarioConfig
from src.mimetic.solvers.operators import SWEState, Wave1DState
from src.mimetic.solvers.swe_linear import geostrophic_init

logger = logging.getLogger(__name__)

State = Union[Wave1DState, SWEState]

VORTEX_CENTRES = ((0.4, 0.5), (0.6, 0.5))
VORTEX_WIDTH = 0.1


def build_spaces(config: ScenarioConfig) -> CompatibleSpaces:
    if config.model == "wave1d":
        mesh = build_interval_mesh(config.length_x, config.nx)
    else:
        mesh = build_periodic_quad_mesh(config.length_x, config.length_y, config.nx, config.ny)
    return make_compatible_spaces(mesh, config.degree)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def streamfunction(config: ScenarioConfig) -> Callable:
    A, lx, ly = config.amplitude, config.length_x, config.length_y
    if config.preset == "geostrophic":
        return lambda x, y: A * np.sin(2 * np.pi * x / lx) * np.sin(2 * np.pi * y / ly)
    if config.preset == "vortex-pair":
        sigma2 = (VORTEX_WIDTH * lx) ** 2
        centres = [(cx * lx, cy * ly) for cx, cy in VORTEX_CENTRES]

        def psi(x, y):
            return A * sum(np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / sigma2) for cx, cy in centres)

        return psi
    raise InvalidArgumentError(f"preset '{config.preset}' has no streamfunction")


def exact_solution(
    config: ScenarioConfig, t: float,
) -> Optional[tuple[Callable, Callable]]:
    """(u, h) callables at time t, or None when no closed form exists."""
    A = config.amplitude
    if config.preset == "travelling-wave":
        k = 2 * np.pi / config.length_x
        wave = lambda x: A * np.sin(k * (x - t))  # noqa: E731
        return wave, wave
    if config.preset == "standing-wave":
        k = 2 * np.pi / config.length_x
        # superposition of the two travelling halves
        return (
            lambda x: A * np.sin(k * x) * np.sin(k * t),
            lambda x: A * np.cos(k * x) * np.cos(k * t),
        )
    if config.preset == "gravity-wave" and config.f == 0.0:
        c = math.sqrt(config.g * config.depth)
        k = 2 * np.pi / config.length_x
        return (
            lambda x, y: (A * np.cos(k * (x - c * t)), np.zeros_like(x)),
            lambda x, y: (config.depth / c) * A * np.cos(k * (x - c * t)),
        )
    return None


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------

def _wave1d_state(config: ScenarioConfig, spaces: CompatibleSpaces) -> Wave1DState:
    u_field, h_field = exact_solution(config, 0.0)
    return Wave1DState(
        spaces=spaces,
        u=interpolate(spaces.V0, u_field),
        h=interpolate(spaces.V1, h_field),
    )


def _gravity_wave_state(config: ScenarioConfig, spaces: CompatibleSpaces) -> SWEState:
    A = config.amplitude
    c = math.sqrt(config.g * config.depth)
    k = 2 * np.pi / config.length_x
    return SWEState(
        spaces=spaces,
        u=interpolate(spaces.V1, lambda x, y: (A * np.cos(k * x), np.zeros_like(x))),
        h=interpolate(spaces.V2, lambda x, y: (config.depth / c) * A * np.cos(k * x)),
    )


def initial_state(config: ScenarioConfig, spaces: Optional[CompatibleSpaces] = None) -> State:
    spaces = build_spaces(config) if spaces is None else spaces
    logger.debug("Initial state: %s / %s", config.model, config.preset)
    if config.model == "wave1d":
        return _wave1d_state(config, spaces)
    if config.preset == "gravity-wave":
        return _gravity_wave_state(config, spaces)

    psi = interpolate(spaces.V0, streamfunction(config))
    state = geostrophic_init(psi, config.swe_params(), spaces)
    if config.model == "swe-nonlinear":
        h = state.h.coefficients + config.depth
        state = SWEState(spaces=spaces, u=state.u, h=FEFunction(spaces.V2, h))
    return state
