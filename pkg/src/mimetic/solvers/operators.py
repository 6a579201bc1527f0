"""Matrices shared by the steppers, assembled once per compatible family."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.mimetic.errors import InvalidArgumentError
from src.mimetic.fem.assembly import (
    SparseMatrix,
    assemble_div,
    assemble_grad_1d,
    assemble_inverse_mass,
    assemble_mass,
    assemble_perpgrad,
    assemble_vort_rhs,
)
from src.mimetic.fem.quadrature import Quadrature, default_quadrature
from src.mimetic.fem.space import CompatibleSpaces, FEFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Wave1DOperators:
    spaces: CompatibleSpaces
    M0: SparseMatrix
    M1: SparseMatrix
    M1inv: SparseMatrix
    D: SparseMatrix  # ∫ N_i' Ñ_j


@dataclass(frozen=True, eq=False)
class SWEOperators:
    spaces: CompatibleSpaces
    quadrature: Quadrature
    M0: SparseMatrix
    M1: SparseMatrix
    M2: SparseMatrix
    M2inv: SparseMatrix
    B: SparseMatrix
    G: SparseMatrix
    W: SparseMatrix


@lru_cache(maxsize=16)
def wave1d_operators(spaces: CompatibleSpaces) -> Wave1DOperators:
    if spaces.mesh.dim != 1:
        raise InvalidArgumentError("wave operators need an interval mesh")
    V0, V1 = spaces.V0, spaces.V1
    logger.debug("Assembling wave operators for %s/%s", V0.label, V1.label)
    return Wave1DOperators(
        spaces=spaces,
        M0=assemble_mass(V0),
        M1=assemble_mass(V1),
        M1inv=assemble_inverse_mass(V1),
        D=assemble_grad_1d(V0, V1),
    )


@lru_cache(maxsize=16)
def swe_operators(spaces: CompatibleSpaces) -> SWEOperators:
    if spaces.mesh.dim != 2 or spaces.V2 is None:
        raise InvalidArgumentError("shallow water operators need a quad mesh triple")
    V0, V1, V2 = spaces.V0, spaces.V1, spaces.V2
    logger.debug("Assembling SWE operators for %s/%s/%s", V0.label, V1.label, V2.label)
    return SWEOperators(
        spaces=spaces,
        quadrature=default_quadrature(V0, V1, V2),
        M0=assemble_mass(V0),
        M1=assemble_mass(V1),
        M2=assemble_mass(V2),
        M2inv=assemble_inverse_mass(V2),
        B=assemble_div(V1, V2),
        G=assemble_perpgrad(V0, V1),
        W=assemble_vort_rhs(V0, V1),
    )


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Wave1DState:
    spaces: CompatibleSpaces
    u: FEFunction  # CG(p)
    h: FEFunction  # DG(p-1)
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.u.space.dim != self.spaces.V0.dim or self.h.space.dim != self.spaces.V1.dim:
            raise InvalidArgumentError("wave state does not match its spaces")

    def advanced(self, u: np.ndarray, h: np.ndarray, dt: float) -> Wave1DState:
        return Wave1DState(
            spaces=self.spaces,
            u=self.u.with_coefficients(u),
            h=self.h.with_coefficients(h),
            t=self.t + dt,
        )


@dataclass(frozen=True, eq=False)
class SWEState:
    spaces: CompatibleSpaces
    u: FEFunction  # RT(p-1)
    h: FEFunction  # DG(p-1)
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.u.space.mesh is not self.h.space.mesh:
            raise InvalidArgumentError("u and h live on different meshes")
        if self.u.space.dim != self.spaces.V1.dim or self.h.space.dim != self.spaces.V2.dim:
            raise InvalidArgumentError("shallow water state does not match its spaces")

    def advanced(self, u: np.ndarray, h: np.ndarray, dt: float) -> SWEState:
        return SWEState(
            spaces=self.spaces,
            u=self.u.with_coefficients(u),
            h=self.h.with_coefficients(h),
            t=self.t + dt,
        )


def zero_wave1d_state(spaces: CompatibleSpaces) -> Wave1DState:
    return Wave1DState(
        spaces=spaces,
        u=FEFunction(spaces.V0, np.zeros(spaces.V0.dim)),
        h=FEFunction(spaces.V1, np.zeros(spaces.V1.dim)),
    )


def zero_swe_state(spaces: CompatibleSpaces) -> SWEState:
    return SWEState(
        spaces=spaces,
        u=FEFunction(spaces.V1, np.zeros(spaces.V1.dim)),
        h=FEFunction(spaces.V2, np.zeros(spaces.V2.dim)),
    )
