"""Bilinear forms of the compatible discretisation, assembled into CSR.

Every form is computed cell by cell as a dense local block
(vectorised over cells with einsum), then scattered through the space's
DoF map into a COO matrix and converted to CSR.  Duplicates are summed in
ascending cell order so identical inputs give bit-identical arrays.

    M_ij    = ∫ w φ_i φ_j              assemble_mass
    D̃_ij    = ∫ N_i' Ñ_j               assemble_grad_1d
    D_ij    = ∫ N_i N_j'               assemble_grad_1d(colocated=True)
    B_ij    = ∫ φ_i ∇·w_j              assemble_div
    G       : ψ -> RT coeffs of ∇⊥ψ    assemble_perpgrad
    C(q)_ij = ∫ q w_i·w_j⊥             assemble_perp_mass, w⊥ = (-w_y, w_x)
    W_ij    = ∫ ∇⊥γ_i·w_j              assemble_vort_rhs
    K_ij    = ∫ ∇γ_i·∇γ_j              assemble_stiffness
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse as sps

from src.mimetic.errors import InvalidArgumentError, UnsupportedSpaceError
from src.mimetic.fem.quadrature import Quadrature, default_quadrature
from src.mimetic.fem.space import (
    FEFunction,
    FunctionSpace,
    QuadratureField,
    cell_table,
    quadrature_weights,
    values_at_quadrature,
)

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-13

Weight = Union[None, float, FEFunction, QuadratureField]


# ---------------------------------------------------------------------------
# Sparse matrix container
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SparseMatrix:
    csr: sps.csr_matrix
    symmetric: bool = False

    @classmethod
    def from_csr(cls, matrix: sps.spmatrix) -> SparseMatrix:
        csr = sps.csr_matrix(matrix, dtype=float)
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(csr=csr, symmetric=_is_symmetric(csr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.csr.shape

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    @property
    def indptr(self) -> np.ndarray:
        return self.csr.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.csr.indices

    @property
    def data(self) -> np.ndarray:
        return self.csr.data

    @property
    def T(self) -> SparseMatrix:
        return SparseMatrix.from_csr(self.csr.T)

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def max_abs(self) -> float:
        return float(np.abs(self.csr.data).max()) if self.csr.nnz else 0.0

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            return SparseMatrix.from_csr(self.csr @ other.csr)
        return self.csr @ other


def _is_symmetric(csr: sps.csr_matrix) -> bool:
    if csr.shape[0] != csr.shape[1]:
        return False
    scale = float(np.abs(csr.data).max()) if csr.nnz else 0.0
    if scale == 0.0:
        return True
    diff = (csr - csr.T).tocsr()
    worst = float(np.abs(diff.data).max()) if diff.nnz else 0.0
    return worst <= SYMMETRY_RTOL * scale


def _scatter(
    row_space: FunctionSpace, col_space: FunctionSpace, local: np.ndarray,
) -> SparseMatrix:
    """Sum local blocks (nc, n_row_local, n_col_local) into a global matrix."""
    nc, ni, nj = local.shape
    rows = np.broadcast_to(row_space.cell_dofs[:, :, None], (nc, ni, nj))
    cols = np.broadcast_to(col_space.cell_dofs[:, None, :], (nc, ni, nj))
    coo = sps.coo_matrix(
        (local.ravel(), (rows.ravel(), cols.ravel())),
        shape=(row_space.dim, col_space.dim),
    )
    return SparseMatrix.from_csr(coo.tocsr())


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _check_same_mesh(*spaces: FunctionSpace) -> None:
    mesh = spaces[0].mesh
    for space in spaces[1:]:
        if space.mesh is not mesh:
            raise InvalidArgumentError(
                f"{space.label} and {spaces[0].label} live on different meshes"
            )


def _resolve_quadrature(
    spaces: tuple[FunctionSpace, ...],
    weight: Weight,
    quadrature: Optional[Quadrature],
    extra: int,
) -> Quadrature:
    if isinstance(weight, QuadratureField):
        return weight.quadrature
    if quadrature is not None:
        return quadrature
    if isinstance(weight, FEFunction):
        spaces = spaces + (weight.space,)
    return default_quadrature(*spaces, extra=extra)


def _weight_values(
    weight: Weight, mesh, quadrature: Quadrature,
) -> np.ndarray:
    """Weight times physical quadrature weights: (nc, nq)."""
    dx = quadrature_weights(mesh, quadrature)
    if weight is None:
        return dx
    if isinstance(weight, QuadratureField):
        values = np.asarray(weight.values, dtype=float)
        if values.shape != dx.shape:
            raise InvalidArgumentError(
                f"quadrature field has shape {values.shape}, expected {dx.shape}"
            )
        return dx * values
    if isinstance(weight, FEFunction):
        if weight.space.mesh is not mesh:
            raise InvalidArgumentError("weight lives on a different mesh")
        if weight.space.value_rank != 0:
            raise InvalidArgumentError("weight must be a scalar field")
        return dx * values_at_quadrature(weight, quadrature)
    return dx * float(weight)


# ---------------------------------------------------------------------------
# Forms
# ---------------------------------------------------------------------------

def assemble_mass(
    space: FunctionSpace,
    weight: Weight = None,
    *,
    quadrature: Optional[Quadrature] = None,
    extra: int = 0,
) -> SparseMatrix:
    quad = _resolve_quadrature((space,), weight, quadrature, extra)
    w = _weight_values(weight, space.mesh, quad)
    table = cell_table(space, quad)
    if space.value_rank == 0:
        local = np.einsum("eq,eqi,eqj->eij", w, table.values, table.values)
    else:
        local = np.einsum("eq,eqic,eqjc->eij", w, table.values, table.values)
    matrix = _scatter(space, space, local)
    logger.debug("Assembled %s mass matrix (%d nnz)", space.label, matrix.nnz)
    return matrix


def assemble_grad_1d(
    V0: FunctionSpace,
    V1: FunctionSpace,
    *,
    colocated: bool = False,
    quadrature: Optional[Quadrature] = None,
    extra: int = 0,
) -> SparseMatrix:
    """D̃_ij = ∫ N_i' Ñ_j, or the colocated D_ij = ∫ N_i N_j' when `colocated`."""
    if V0.mesh.dim != 1 or V1.mesh.dim != 1:
        raise UnsupportedSpaceError("assemble_grad_1d needs interval spaces")
    _check_same_mesh(V0, V1)
    quad = _resolve_quadrature((V0, V1), None, quadrature, extra)
    w = quadrature_weights(V0.mesh, quad)
    t0, t1 = cell_table(V0, quad), cell_table(V1, quad)
    if colocated:
        local = np.einsum("eq,eqi,eqj->eij", w, t0.values, t1.gradient[..., 0])
    else:
        local = np.einsum("eq,eqi,eqj->eij", w, t0.gradient[..., 0], t1.values)
    return _scatter(V0, V1, local)


def assemble_div(
    V1: FunctionSpace,
    V2: FunctionSpace,
    *,
    quadrature: Optional[Quadrature] = None,
    extra: int = 0,
) -> SparseMatrix:
    """B_ij = ∫ φ_i ∇·w_j, shape dim(V2) x dim(V1)."""
    if V1.family != "RT" or V2.family != "DG":
        raise UnsupportedSpaceError(f"div pairs RT with DG, got {V1.label}/{V2.label}")
    _check_same_mesh(V1, V2)
    quad = _resolve_quadrature((V1, V2), None, quadrature, extra)
    w = quadrature_weights(V1.mesh, quad)
    t1, t2 = cell_table(V1, quad), cell_table(V2, quad)
    local = np.einsum("eq,eqi,eqj->eij", w, t2.values, t1.divergence)
    return _scatter(V2, V1, local)


def _check_compatible(V0: FunctionSpace, V1: FunctionSpace) -> None:
    if V0.family != "CG" or V1.family != "RT" or V0.mesh.dim != 2 or V1.degree != V0.degree - 1:
        raise UnsupportedSpaceError(
            f"{V0.label}/{V1.label} is not a compatible (CG(p), RT(p-1)) pair"
        )
    _check_same_mesh(V0, V1)


def assemble_perpgrad(V0: FunctionSpace, V1: FunctionSpace) -> SparseMatrix:
    """G with G @ psi = RT coefficients of ∇⊥psi (exact for psi in V0).

    On an axis-aligned cell the inverse Piola pull-back of ∇⊥psi is the
    reference ∇⊥ of the reference function, so the local block
    L_ij = ℓ_i(∇̂⊥N̂_j) is the same for every cell.
    """
    _check_compatible(V0, V1)
    rt = V1.element
    table = V0.element.tabulate(rt.dual_points)
    perp = np.stack([-table.derivatives[..., 1], table.derivatives[..., 0]], axis=-1)
    block = np.einsum("ipc,pjc->ij", rt.dual_matrix, perp)

    # each RT DoF is written once, from its owning cell
    owned = np.flatnonzero(V1.owner[0])
    nc = V1.mesh.n_cells
    n_own, n0 = owned.size, V0.n_local
    rows = np.broadcast_to(V1.cell_dofs[:, owned, None], (nc, n_own, n0))
    cols = np.broadcast_to(V0.cell_dofs[:, None, :], (nc, n_own, n0))
    vals = V1.cell_signs[:, owned, None] * block[None, owned, :]
    coo = sps.coo_matrix(
        (vals.ravel(), (rows.ravel(), cols.ravel())), shape=(V1.dim, V0.dim),
    )
    return SparseMatrix.from_csr(coo.tocsr())


def assemble_perp_mass(
    V1: FunctionSpace,
    weight: Weight = None,
    *,
    quadrature: Optional[Quadrature] = None,
    extra: int = 0,
) -> SparseMatrix:
    """C(q)_ij = ∫ q w_i·w_j⊥; skew-symmetric for any weight."""
    if V1.family != "RT":
        raise UnsupportedSpaceError(f"perp mass needs an RT space, got {V1.label}")
    quad = _resolve_quadrature((V1,), weight, quadrature, extra)
    w = _weight_values(weight, V1.mesh, quad)
    vals = cell_table(V1, quad).values
    a = np.einsum("eq,eqi,eqj->eij", w, vals[..., 0], vals[..., 1])
    local = a.transpose(0, 2, 1) - a
    return _scatter(V1, V1, local)


def assemble_vort_rhs(
    V0: FunctionSpace,
    V1: FunctionSpace,
    *,
    quadrature: Optional[Quadrature] = None,
    extra: int = 0,
) -> SparseMatrix:
    """W_ij = ∫ ∇⊥γ_i·w_j, equal to Gᵀ M1."""
    _check_compatible(V0, V1)
    quad = _resolve_quadrature((V0, V1), None, quadrature, extra)
    w = quadrature_weights(V0.mesh, quad)
    grad = cell_table(V0, quad).gradient
    perp = np.stack([-grad[..., 1], grad[..., 0]], axis=-1)
    local = np.einsum("eq,eqic,eqjc->eij", w, perp, cell_table(V1, quad).values)
    return _scatter(V0, V1, local)


def assemble_stiffness(
    V0: FunctionSpace,
    *,
    quadrature: Optional[Quadrature] = None,
    extra: int = 0,
) -> SparseMatrix:
    if V0.value_rank != 0:
        raise UnsupportedSpaceError(f"stiffness needs a scalar space, got {V0.label}")
    quad = _resolve_quadrature((V0,), None, quadrature, extra)
    w = quadrature_weights(V0.mesh, quad)
    grad = cell_table(V0, quad).gradient
    local = np.einsum("eq,eqid,eqjd->eij", w, grad, grad)
    return _scatter(V0, V0, local)


def assemble_load(
    space: FunctionSpace,
    values: Union[QuadratureField, np.ndarray],
    *,
    quadrature: Optional[Quadrature] = None,
) -> np.ndarray:
    """b_i = ∫ φ_i g for g sampled at quadrature points.

    `values` is (nc, nq) for scalar spaces or (nc, nq, 2) for RT.
    """
    if isinstance(values, QuadratureField):
        quad, data = values.quadrature, values.values
    else:
        quad = quadrature if quadrature is not None else default_quadrature(space)
        data = np.asarray(values, dtype=float)
    dx = quadrature_weights(space.mesh, quad)
    table = cell_table(space, quad)
    if space.value_rank == 0:
        if data.shape != dx.shape:
            raise InvalidArgumentError(f"scalar load has shape {data.shape}, expected {dx.shape}")
        local = np.einsum("eq,eqi->ei", dx * data, table.values)
    else:
        if data.shape != dx.shape + (2,):
            raise InvalidArgumentError(f"vector load has shape {data.shape}, expected {dx.shape + (2,)}")
        local = np.einsum("eq,eqic,eqc->ei", dx, table.values, data)
    return np.bincount(space.cell_dofs.ravel(), weights=local.ravel(), minlength=space.dim)


def assemble_inverse_mass(space: FunctionSpace) -> SparseMatrix:
    """Exact inverse of a DG mass matrix, one dense block per cell."""
    if space.family != "DG":
        raise UnsupportedSpaceError(f"block inverse needs a DG space, got {space.label}")
    quad = default_quadrature(space)
    w = quadrature_weights(space.mesh, quad)
    vals = cell_table(space, quad).values
    blocks = np.einsum("eq,eqi,eqj->eij", w, vals, vals)
    inverse = np.linalg.inv(blocks)
    # exact symmetry of each block
    inverse = 0.5 * (inverse + inverse.transpose(0, 2, 1))
    return _scatter(space, space, inverse)
