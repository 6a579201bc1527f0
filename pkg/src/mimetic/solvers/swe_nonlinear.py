"""Nonlinear vector-invariant shallow water equations.

    M1 u̇ + C(q̃) F - Bᵀ Π = 0,     Π = g h + P2(½|u|²)
    M2 ḣ + B F = 0

with the mass flux F (projection of h u into V1) and the potential
vorticity q diagnosed in V0 from

    ∫ γ q h = -∫ ∇⊥γ·u + ∫ γ f      (M0(h) q = -W u + load(f)).

q̃ is q itself or its APVM-stabilised version q - τ u·∇q.  Steps use the
implicit midpoint rule solved by a fixed number of Picard sweeps.
"""

from __future__ import annotations

import logging
from typing import Optional, Union

import numpy as np

from src.mimetic.config import settings
from src.mimetic.errors import InvalidArgumentError, StateInvalidError
from src.mimetic.fem.assembly import (
    assemble_load,
    assemble_mass,
    assemble_perp_mass,
)
from src.mimetic.fem.space import (
    FEFunction,
    FunctionSpace,
    QuadratureField,
    cell_table,
    gradient_at_quadrature,
    quadrature_weights,
    values_at_quadrature,
)
from src.mimetic.linalg import solve_mass
from src.mimetic.models import SWEParams
from src.mimetic.solvers.operators import SWEOperators, SWEState, swe_operators

logger = logging.getLogger(__name__)

PV = Union[FEFunction, QuadratureField]


def check_positive_depth(h: FEFunction, ops: SWEOperators) -> np.ndarray:
    values = values_at_quadrature(h, ops.quadrature)
    if not np.all(values > 0.0):
        worst = float(values.min())
        logger.warning("Nonpositive depth %.3e at a quadrature point", worst)
        raise StateInvalidError(f"depth must be positive at every quadrature point (min {worst:.3e})")
    return values


def pv_values(q: PV, ops: SWEOperators) -> np.ndarray:
    if isinstance(q, QuadratureField):
        return q.values
    return values_at_quadrature(q, ops.quadrature)


# ---------------------------------------------------------------------------
# Diagnosed fields
# ---------------------------------------------------------------------------

def vorticity_rhs(u: FEFunction, params: SWEParams, ops: SWEOperators) -> np.ndarray:
    """-W u + load(f): the right-hand side a with M0(h) q = a."""
    V0 = ops.spaces.V0
    f_load = assemble_load(
        V0, np.full((V0.mesh.n_cells, ops.quadrature.size), params.f), quadrature=ops.quadrature,
    )
    return -(ops.W @ u.coefficients) + f_load


def diagnose_q(
    u: FEFunction,
    h: FEFunction,
    params: SWEParams,
    V0: Optional[FunctionSpace] = None,
    *,
    ops: SWEOperators,
) -> FEFunction:
    if V0 is None:
        V0 = ops.spaces.V0
    elif V0 is not ops.spaces.V0:
        raise InvalidArgumentError(f"{V0.label} is not the V0 space the operators were assembled on")
    check_positive_depth(h, ops)
    M0h = assemble_mass(V0, h, quadrature=ops.quadrature)
    q = solve_mass(M0h, vorticity_rhs(u, params, ops))
    return FEFunction(V0, q)


def compute_F(u: FEFunction, h: FEFunction, *, ops: SWEOperators) -> FEFunction:
    """Mass flux: M1 F = ∫ w·(h u)."""
    if u.space.mesh is not h.space.mesh:
        raise InvalidArgumentError("u and h live on different meshes")
    hu = values_at_quadrature(h, ops.quadrature)[..., None] * values_at_quadrature(u, ops.quadrature)
    load = assemble_load(u.space, hu, quadrature=ops.quadrature)
    return FEFunction(u.space, solve_mass(ops.M1, load))


def apply_apvm(
    q: FEFunction,
    u: FEFunction,
    dt: float,
    tau: Optional[float] = None,
    *,
    ops: SWEOperators,
) -> QuadratureField:
    """q̃ = q - τ u·∇q at quadrature points; τ defaults to dt/2."""
    tau = 0.5 * dt if tau is None else tau
    if tau < 0:
        raise InvalidArgumentError(f"APVM τ must be non-negative, got {tau}")
    values = values_at_quadrature(q, ops.quadrature)
    if tau > 0.0:
        grad_q = gradient_at_quadrature(q, ops.quadrature)
        vel = values_at_quadrature(u, ops.quadrature)
        values = values - tau * np.einsum("eqc,eqc->eq", vel, grad_q)
    return QuadratureField(values=values, quadrature=ops.quadrature)


def kinetic_energy_projection(u: FEFunction, ops: SWEOperators) -> np.ndarray:
    """DG coefficients of P2(½|u|²)."""
    vel = values_at_quadrature(u, ops.quadrature)
    ke = 0.5 * np.einsum("eqc,eqc->eq", vel, vel)
    return ops.M2inv @ assemble_load(ops.spaces.V2, ke, quadrature=ops.quadrature)


# ---------------------------------------------------------------------------
# Time stepping
# ---------------------------------------------------------------------------

def _tendencies(
    u: FEFunction, h: FEFunction, params: SWEParams, dt: float, ops: SWEOperators,
) -> tuple[np.ndarray, np.ndarray, FEFunction, QuadratureField]:
    q = diagnose_q(u, h, params, ops=ops)
    q_tilde = apply_apvm(q, u, dt, params.apvm_tau, ops=ops)
    F = compute_F(u, h, ops=ops)
    Pi = params.g * h.coefficients + kinetic_energy_projection(u, ops)
    C = assemble_perp_mass(ops.spaces.V1, q_tilde)
    ku = solve_mass(ops.M1, ops.B.csr.T @ Pi - C @ F.coefficients)
    kh = -(ops.M2inv @ (ops.B @ F.coefficients))
    return ku, kh, F, q_tilde


def step_swe_nonlinear(
    state: SWEState,
    params: SWEParams,
    dt: float,
    n_iter: Optional[int] = None,
) -> SWEState:
    if not dt > 0:
        raise InvalidArgumentError(f"time step must be positive, got {dt}")
    n_iter = settings.picard_iterations if n_iter is None else n_iter
    if n_iter < 1:
        raise InvalidArgumentError(f"at least one Picard sweep is required, got {n_iter}")
    ops = swe_operators(state.spaces)
    u0, h0 = state.u.coefficients, state.h.coefficients
    check_positive_depth(state.h, ops)

    u, h = u0, h0
    for sweep in range(n_iter):
        u_mid = state.u.with_coefficients(0.5 * (u0 + u))
        h_mid = state.h.with_coefficients(0.5 * (h0 + h))
        ku, kh, _, _ = _tendencies(u_mid, h_mid, params, dt, ops)
        u_next = u0 + dt * ku
        h_next = h0 + dt * kh
        logger.debug(
            "Picard sweep %d: |du|=%.3e |dh|=%.3e",
            sweep, float(np.abs(u_next - u).max()), float(np.abs(h_next - h).max()),
        )
        u, h = u_next, h_next

    return state.advanced(u, h, dt)


# ---------------------------------------------------------------------------
# Discrete PV law
# ---------------------------------------------------------------------------

def time_centred_fields(
    before: SWEState, after: SWEState, params: SWEParams, dt: float,
) -> tuple[FEFunction, QuadratureField]:
    """Trapezoidal averages of the mass flux and (stabilised) PV over a step."""
    ops = swe_operators(before.spaces)
    fluxes, pvs = [], []
    for state in (before, after):
        q = diagnose_q(state.u, state.h, params, ops=ops)
        pvs.append(apply_apvm(q, state.u, dt, params.apvm_tau, ops=ops).values)
        fluxes.append(compute_F(state.u, state.h, ops=ops).coefficients)
    F_mid = before.u.with_coefficients(0.5 * (fluxes[0] + fluxes[1]))
    q_mid = QuadratureField(values=0.5 * (pvs[0] + pvs[1]), quadrature=ops.quadrature)
    return F_mid, q_mid


def pv_flux_divergence(F: FEFunction, q: PV, ops: SWEOperators) -> np.ndarray:
    """∫ ∇γ_i · F q for every V0 basis function γ_i."""
    V0 = ops.spaces.V0
    flux = values_at_quadrature(F, ops.quadrature) * pv_values(q, ops)[..., None]
    grad = cell_table(V0, ops.quadrature).gradient
    dx = quadrature_weights(V0.mesh, ops.quadrature)
    local = np.einsum("eq,eqid,eqd->ei", dx, grad, flux)
    return np.bincount(V0.cell_dofs.ravel(), weights=local.ravel(), minlength=V0.dim)


def pv_consistency_residual(
    state_before: SWEState,
    state_after: SWEState,
    dt: float,
    F_mid: FEFunction,
    q_mid: PV,
) -> float:
    """max_i |∫γ_i Δ(qh)/dt - ∫∇γ_i·F q| relative to the flux term."""
    ops = swe_operators(state_before.spaces)
    # ∫γ qh = -W u + load(f); the load cancels in the difference
    du = state_after.u.coefficients - state_before.u.coefficients
    rate = -(ops.W @ du) / dt
    flux = pv_flux_divergence(F_mid, q_mid, ops)
    residual = float(np.abs(rate - flux).max())
    scale = max(float(np.abs(flux).max()), float(np.abs(rate).max()))
    return residual / scale if scale > 0.0 else residual
