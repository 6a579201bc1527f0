"""Numerical inf-sup constants of gradient / divergence pairings.

For h in the pressure-type space (constants removed) and w in the
velocity-type space,

    β = min_h max_w  ⟨D w, h⟩ / (|w| ‖h‖)

where |w| is the derivative (1D) or divergence (2D) seminorm.  β is the
smallest singular value of the pairing whitened by the two Gram matrices,
i.e. the square root of the smallest eigenvalue of (P K⁺ Pᵀ) h = λ M h.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Union

from src.mimetic.errors import InvalidArgumentError, UnsupportedSpaceError
from src.mimetic.fem.assembly import (
    SparseMatrix,
    assemble_div,
    assemble_grad_1d,
    assemble_inverse_mass,
    assemble_mass,
    assemble_stiffness,
)
from src.mimetic.fem.space import make_space
from src.mimetic.linalg import whitened_singular_values
from src.mimetic.mesh import Mesh, Mesh1D, Mesh2D, build_interval_mesh, build_periodic_quad_mesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSpec:
    dim: int
    velocity: tuple[str, int]
    pressure: tuple[str, int]
    colocated: bool = False


PAIRS: dict[str, PairSpec] = {
    "cg1-dg0": PairSpec(1, ("CG", 1), ("DG", 0)),
    "cg2-dg1": PairSpec(1, ("CG", 2), ("DG", 1)),
    "cg3-dg2": PairSpec(1, ("CG", 3), ("DG", 2)),
    "colocated-cg1": PairSpec(1, ("CG", 1), ("CG", 1), colocated=True),
    "rt0-dg0": PairSpec(2, ("RT", 0), ("DG", 0)),
    "rt1-dg1": PairSpec(2, ("RT", 1), ("DG", 1)),
}


def pair_spec(pair: str) -> PairSpec:
    try:
        return PAIRS[pair.lower()]
    except KeyError:
        raise UnsupportedSpaceError(
            f"unknown pair '{pair}' (choose from {', '.join(PAIRS)})"
        ) from None


def _matrices(spec: PairSpec, mesh: Mesh) -> tuple[SparseMatrix, SparseMatrix, SparseMatrix]:
    """(pairing P: pressure x velocity, velocity seminorm Gram K, pressure mass M)."""
    V = make_space(mesh, *spec.velocity)
    Q = make_space(mesh, *spec.pressure)
    if spec.dim == 1:
        # ⟨w', h⟩ = hᵀ Pw; colocated: D_ij = ∫ N_i N_j' with i on h
        if spec.colocated:
            P = assemble_grad_1d(Q, V, colocated=True)
        else:
            P = assemble_grad_1d(V, Q).T
        return P, assemble_stiffness(V), assemble_mass(Q)
    B = assemble_div(V, Q)
    K = SparseMatrix.from_csr(B.csr.T @ assemble_inverse_mass(Q).csr @ B.csr)
    return B, K, assemble_mass(Q)


def infsup_for_mesh(pair: str, mesh: Mesh) -> float:
    spec = pair_spec(pair)
    if mesh.dim != spec.dim:
        raise InvalidArgumentError(f"pair '{pair}' needs a {spec.dim}D mesh")
    P, K, M = _matrices(spec, mesh)
    sigma = whitened_singular_values(P, M, K, deflate_constant=True)
    beta = float(sigma[0])
    logger.debug("inf-sup %s on %d cells: %.12f", pair, mesh.n_cells, beta)
    return beta


def infsup_constant(
    pair: str,
    meshes: Iterable[Union[Mesh, int]],
    *,
    length: float = 1.0,
) -> list[float]:
    """Inf-sup constant per mesh; integers are taken as N (N x N in 2D)."""
    spec = pair_spec(pair)
    values = []
    for mesh in meshes:
        if isinstance(mesh, (Mesh1D, Mesh2D)):
            built = mesh
        elif spec.dim == 1:
            built = build_interval_mesh(length, int(mesh))
        else:
            built = build_periodic_quad_mesh(length, length, int(mesh), int(mesh))
        values.append(infsup_for_mesh(pair, built))
    logger.info("inf-sup %s: %s", pair, ", ".join(f"{v:.10f}" for v in values))
    return values
