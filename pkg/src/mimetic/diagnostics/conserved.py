"""Conserved integrals, geostrophic balance residual and DoF-ratio audit."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from src.mimetic.fem.assembly import assemble_perp_mass
from src.mimetic.fem.quadrature import default_quadrature
from src.mimetic.fem.space import (
    FEFunction,
    FunctionSpace,
    QuadratureField,
    quadrature_weights,
    values_at_quadrature,
)
from src.mimetic.linalg import solve_mass
from src.mimetic.models import DiagnosticRecord, SWEParams
from src.mimetic.solvers.operators import SWEState, Wave1DState, swe_operators, wave1d_operators
from src.mimetic.solvers.swe_nonlinear import diagnose_q

logger = logging.getLogger(__name__)


def conserved_quantities(
    state: SWEState,
    q: Union[FEFunction, QuadratureField],
    params: SWEParams,
    *,
    step: int = 0,
    cells: Optional[np.ndarray] = None,
    extra: int = 0,
) -> DiagnosticRecord:
    """Mass, energy, total vorticity and enstrophy of a nonlinear state.

    `cells` restricts the integrals to a subset of the mesh; `extra` adds
    quadrature points per direction.
    """
    spaces = state.spaces
    if isinstance(q, QuadratureField):
        quad = q.quadrature
        q_vals = q.values
    else:
        quad = default_quadrature(spaces.V0, spaces.V1, spaces.V2, extra=extra)
        q_vals = values_at_quadrature(q, quad)
    dx = quadrature_weights(spaces.mesh, quad)
    h = values_at_quadrature(state.h, quad)
    u = values_at_quadrature(state.u, quad)
    speed2 = np.einsum("eqc,eqc->eq", u, u)

    if cells is not None:
        dx, h, speed2, q_vals = dx[cells], h[cells], speed2[cells], q_vals[cells]

    return DiagnosticRecord(
        step=step,
        time=state.t,
        mass=float(np.sum(dx * h)),
        energy=float(np.sum(dx * 0.5 * h * (speed2 + params.g * h))),
        total_vorticity=float(np.sum(dx * q_vals * h)),
        enstrophy=float(np.sum(dx * q_vals * q_vals * h)),
    )


def balance_residual(state: SWEState, params: SWEParams) -> float:
    """‖M1⁻¹(-C(f)u + g Bᵀh)‖_M1, divided by ‖u‖_M1 unless u = 0."""
    ops = swe_operators(state.spaces)
    u, h = state.u.coefficients, state.h.coefficients
    C = assemble_perp_mass(state.spaces.V1, params.f, quadrature=ops.quadrature)
    r = params.g * (ops.B.csr.T @ h) - C @ u
    x = solve_mass(ops.M1, r)
    residual = float(np.sqrt(max(r @ x, 0.0)))
    u_norm = float(np.sqrt(max(u @ (ops.M1 @ u), 0.0)))
    return residual / u_norm if u_norm > 0.0 else residual


def dof_ratio_audit(V1: FunctionSpace, V2: FunctionSpace) -> Fraction:
    return Fraction(V1.dim, V2.dim)


# ---------------------------------------------------------------------------
# Per-model diagnostic rows
# ---------------------------------------------------------------------------

def wave1d_record(state: Wave1DState, step: int = 0) -> DiagnosticRecord:
    ops = wave1d_operators(state.spaces)
    u, h = state.u.coefficients, state.h.coefficients
    ones = np.ones(h.size)
    return DiagnosticRecord(
        step=step,
        time=state.t,
        mass=float(ones @ (ops.M1 @ h)),
        energy=0.5 * float(u @ (ops.M0 @ u) + h @ (ops.M1 @ h)),
    )


def linear_swe_record(state: SWEState, params: SWEParams, step: int = 0) -> DiagnosticRecord:
    """Row for the linear model; PV uses the total depth H + h."""
    ops = swe_operators(state.spaces)
    u, h = state.u.coefficients, state.h.coefficients
    total = state.h.with_coefficients(h + params.H)
    q = diagnose_q(state.u, total, params, ops=ops)
    quad = ops.quadrature
    dx = quadrature_weights(state.spaces.mesh, quad)
    q_vals = values_at_quadrature(q, quad)
    depth = values_at_quadrature(total, quad)
    return DiagnosticRecord(
        step=step,
        time=state.t,
        mass=float(np.ones(h.size) @ (ops.M2 @ h)),
        energy=0.5 * float(params.H * (u @ (ops.M1 @ u)) + params.g * (h @ (ops.M2 @ h))),
        total_vorticity=float(np.sum(dx * q_vals * depth)),
        enstrophy=float(np.sum(dx * q_vals * q_vals * depth)),
        balance_residual=balance_residual(state, params),
    )


def nonlinear_swe_record(state: SWEState, params: SWEParams, step: int = 0) -> DiagnosticRecord:
    ops = swe_operators(state.spaces)
    q = diagnose_q(state.u, state.h, params, ops=ops)
    return conserved_quantities(state, q, params, step=step)
