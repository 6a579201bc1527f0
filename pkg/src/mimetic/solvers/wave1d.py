"""Compatible CG(p)/DG(p-1) discretisation of the 1D wave equation.

    M0 u̇ - D̃ h = 0,   M1 ḣ + D̃ᵀ u = 0      (u_t + h_x = 0, h_t + u_x = 0)

advanced with the implicit midpoint rule.  The DG unknown is eliminated
with the exact block inverse of M1, leaving one symmetric system for the
half-step increment of u.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

from src.mimetic.errors import InvalidArgumentError
from src.mimetic.linalg import Factorization, factorized
from src.mimetic.solvers.operators import Wave1DOperators, Wave1DState, wave1d_operators

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _midpoint_system(ops: Wave1DOperators, dt: float) -> tuple[Factorization, object]:
    schur = (ops.D.csr @ ops.M1inv.csr @ ops.D.csr.T).tocsr()
    lhs = ops.M0.csr + (0.25 * dt * dt) * schur
    return factorized(lhs), schur


def energy_wave1d(state: Wave1DState) -> float:
    ops = wave1d_operators(state.spaces)
    u, h = state.u.coefficients, state.h.coefficients
    return 0.5 * float(u @ (ops.M0 @ u) + h @ (ops.M1 @ h))


def step_wave1d(state: Wave1DState, dt: float) -> Wave1DState:
    if not dt > 0:
        raise InvalidArgumentError(f"time step must be positive, got {dt}")
    ops = wave1d_operators(state.spaces)
    solver, schur = _midpoint_system(ops, float(dt))
    u0, h0 = state.u.coefficients, state.h.coefficients

    rhs = 0.5 * dt * (ops.D @ h0) - 0.25 * dt * dt * (schur @ u0)
    du = solver.solve(rhs)
    dh = -0.5 * dt * (ops.M1inv @ (ops.D.csr.T @ (u0 + du)))

    logger.debug("wave1d step t=%.6g -> %.6g", state.t, state.t + dt)
    return state.advanced(u0 + 2.0 * du, h0 + 2.0 * dh, dt)


def wave1d_forcing(state: Wave1DState) -> np.ndarray:
    """Right-hand side D̃h seen by the u-equation."""
    ops = wave1d_operators(state.spaces)
    return ops.D @ state.h.coefficients
