"""Finite element spaces, coefficient functions and pointwise evaluation.

Supported spaces:

* interval: CG(1..3) (periodic, one coefficient per shared node), DG(0..3)
* periodic quads: CG1, CG2, RT0, RT1, DG0, DG1

Physical basis functions are obtained from the reference ones by a change
of coordinates (CG/DG) or by the contravariant Piola map (RT), which on an
axis-aligned dx-by-dy cell scales the x-component by 1/dy, the
y-component by 1/dx and the divergence by 1/(dx*dy).  RT edge coefficients
are fluxes through the edge with respect to its global normal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from src.mimetic.errors import InvalidArgumentError, UnsupportedSpaceError
from src.mimetic.fem.quadrature import Quadrature
from src.mimetic.fem.reference import (
    BasisTable,
    LagrangeElement,
    RaviartThomasElement,
    check_reference_points,
    lagrange_element,
    raviart_thomas_element,
)
from src.mimetic.mesh import Mesh, Mesh1D, Mesh2D

logger = logging.getLogger(__name__)

Element = Union[LagrangeElement, RaviartThomasElement]

_SUPPORTED_1D = {"CG": (1, 2, 3), "DG": (0, 1, 2, 3)}
_SUPPORTED_2D = {"CG": (1, 2), "RT": (0, 1), "DG": (0, 1)}


# ---------------------------------------------------------------------------
# Space and function containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FunctionSpace:
    mesh: Mesh
    family: str
    degree: int
    element: Element
    dim: int
    cell_dofs: np.ndarray          # (n_cells, n_local) global indices
    cell_signs: np.ndarray         # (n_cells, n_local) +-1
    owner: np.ndarray              # (n_cells, n_local) True where the cell defines the DoF
    node_coords: Optional[np.ndarray] = None  # (dim, mesh.dim) for nodal spaces

    @property
    def value_rank(self) -> int:
        return self.element.value_rank

    @property
    def max_degree(self) -> int:
        """Highest polynomial degree per coordinate direction of the basis."""
        return self.element.max_degree

    @property
    def n_local(self) -> int:
        return self.element.n_local

    @property
    def label(self) -> str:
        return f"{self.family}{self.degree}"

    def __repr__(self) -> str:
        return f"FunctionSpace({self.label}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class FEFunction:
    space: FunctionSpace
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.shape != (self.space.dim,):
            raise InvalidArgumentError(
                f"{self.space.label} expects {self.space.dim} coefficients, got {coeffs.shape}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    def with_coefficients(self, coefficients: np.ndarray) -> FEFunction:
        return FEFunction(self.space, coefficients)


@dataclass(frozen=True, eq=False)
class QuadratureField:
    """Scalar values at the quadrature points of every cell: (n_cells, nq)."""

    values: np.ndarray
    quadrature: Quadrature


@dataclass(frozen=True, eq=False)
class CellTable:
    """Physical basis data per cell; signs already applied.

    values:     (nc, np, nl) scalar or (nc, np, nl, 2) vector
    gradient:   (nc, np, nl, dim) for scalar spaces
    divergence: (nc, np, nl) for RT spaces
    """

    values: np.ndarray
    gradient: Optional[np.ndarray] = None
    divergence: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class CompatibleSpaces:
    """(CG(p), RT(p-1), DG(p-1)) on quads, or (CG(p), DG(p-1)) on an interval."""

    mesh: Mesh
    degree: int
    V0: FunctionSpace
    V1: FunctionSpace
    V2: Optional[FunctionSpace] = None


# ---------------------------------------------------------------------------
# Space construction
# ---------------------------------------------------------------------------

def _interval_space(mesh: Mesh1D, family: str, degree: int) -> FunctionSpace:
    element = lagrange_element(1, degree)
    ne = mesh.n_elements
    local = np.arange(element.n_local)
    cells = np.arange(ne)[:, None]
    nodes = element.nodes_1d
    coords = mesh.cell_origins + nodes[None, :] * mesh.cell_extents  # (ne, nl)

    if family == "CG":
        dim = degree * ne
        cell_dofs = (degree * cells + local[None, :]) % dim
        owner = np.broadcast_to(local < degree, cell_dofs.shape).copy()
        node_coords = np.empty(dim)
        node_coords[cell_dofs[owner]] = coords[owner]
    else:
        dim = (degree + 1) * ne
        cell_dofs = (degree + 1) * cells + local[None, :]
        owner = np.ones(cell_dofs.shape, dtype=bool)
        node_coords = coords.ravel()

    return FunctionSpace(
        mesh=mesh,
        family=family,
        degree=degree,
        element=element,
        dim=dim,
        cell_dofs=cell_dofs,
        cell_signs=np.ones(cell_dofs.shape),
        owner=owner,
        node_coords=node_coords[:, None],
    )


def _quad_cg_space(mesh: Mesh2D, degree: int) -> FunctionSpace:
    element = lagrange_element(2, degree)
    n = mesh.n_cells
    cells = np.arange(n)
    i, j = cells % mesh.nx, cells // mesh.nx
    ip, jp = (i + 1) % mesh.nx, (j + 1) % mesh.ny

    def vid(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return b * mesh.nx + a

    if degree == 1:
        cell_dofs = mesh.cell_vertices.copy()
        owner = np.zeros(cell_dofs.shape, dtype=bool)
        owner[:, 0] = True
        node_coords = mesh.vertices.copy()
        dim = n
    else:
        n_v, n_e = n, 2 * n
        cell_dofs = np.stack([
            vid(i, j), n_v + n + vid(i, j), vid(ip, j),
            n_v + vid(i, j), n_v + n_e + cells, n_v + vid(ip, j),
            vid(i, jp), n_v + n + vid(i, jp), vid(ip, jp),
        ], axis=1)
        # bottom-left vertex, bottom edge, left edge, interior
        owner = np.zeros(cell_dofs.shape, dtype=bool)
        owner[:, [0, 1, 3, 4]] = True
        dim = 4 * n
        node_coords = np.empty((dim, 2))
        origins = mesh.cell_origins
        ext = np.array([mesh.dx, mesh.dy])
        local_nodes = element.nodes
        # owned nodes only; seam images carry wrapped coordinates
        for a in np.flatnonzero(owner[0]):
            node_coords[cell_dofs[:, a]] = origins + local_nodes[a] * ext

    return FunctionSpace(
        mesh=mesh,
        family="CG",
        degree=degree,
        element=element,
        dim=dim,
        cell_dofs=cell_dofs,
        cell_signs=np.ones(cell_dofs.shape),
        owner=owner,
        node_coords=node_coords,
    )


def _quad_dg_space(mesh: Mesh2D, degree: int) -> FunctionSpace:
    element = lagrange_element(2, degree)
    nl = element.n_local
    cell_dofs = np.arange(mesh.n_cells * nl).reshape(mesh.n_cells, nl)
    coords = mesh.cell_origins[:, None, :] + element.nodes[None] * np.array([mesh.dx, mesh.dy])
    return FunctionSpace(
        mesh=mesh,
        family="DG",
        degree=degree,
        element=element,
        dim=cell_dofs.size,
        cell_dofs=cell_dofs,
        cell_signs=np.ones(cell_dofs.shape),
        owner=np.ones(cell_dofs.shape, dtype=bool),
        node_coords=coords.reshape(-1, 2),
    )


def _quad_rt_space(mesh: Mesh2D, k: int) -> FunctionSpace:
    element = raviart_thomas_element(k)
    n = mesh.n_cells
    per_edge = element.n_edge_dofs
    moments = np.arange(per_edge)

    edge_dofs = mesh.cell_edges[:, :, None] * per_edge + moments[None, None, :]
    edge_signs = np.repeat(mesh.cell_edge_signs[:, :, None], per_edge, axis=2)
    n_edge_total = mesh.n_edges * per_edge
    interior = n_edge_total + np.arange(n)[:, None] * element.n_interior + np.arange(element.n_interior)

    cell_dofs = np.concatenate([edge_dofs.reshape(n, -1), interior], axis=1)
    cell_signs = np.concatenate([edge_signs.reshape(n, -1), np.ones(interior.shape)], axis=1)

    # left and bottom edges plus the interior belong to the cell
    owner = np.zeros(cell_dofs.shape, dtype=bool)
    owner[:, 0:per_edge] = True
    owner[:, 2 * per_edge:3 * per_edge] = True
    owner[:, 4 * per_edge:] = True

    return FunctionSpace(
        mesh=mesh,
        family="RT",
        degree=k,
        element=element,
        dim=n_edge_total + n * element.n_interior,
        cell_dofs=cell_dofs,
        cell_signs=cell_signs,
        owner=owner,
    )


def make_space(mesh: Mesh, family: str, degree: int) -> FunctionSpace:
    family = family.upper()
    supported = _SUPPORTED_1D if mesh.dim == 1 else _SUPPORTED_2D
    if degree not in supported.get(family, ()):
        raise UnsupportedSpaceError(
            f"{family}{degree} is not available on a {mesh.dim}D mesh"
        )
    if mesh.dim == 1:
        space = _interval_space(mesh, family, degree)
    elif family == "CG":
        space = _quad_cg_space(mesh, degree)
    elif family == "DG":
        space = _quad_dg_space(mesh, degree)
    else:
        space = _quad_rt_space(mesh, degree)
    logger.debug("Created %s on %dD mesh (dim=%d)", space.label, mesh.dim, space.dim)
    return space


def make_compatible_spaces(mesh: Mesh, degree: int) -> CompatibleSpaces:
    if mesh.dim == 1:
        return CompatibleSpaces(
            mesh=mesh,
            degree=degree,
            V0=make_space(mesh, "CG", degree),
            V1=make_space(mesh, "DG", degree - 1),
        )
    return CompatibleSpaces(
        mesh=mesh,
        degree=degree,
        V0=make_space(mesh, "CG", degree),
        V1=make_space(mesh, "RT", degree - 1),
        V2=make_space(mesh, "DG", degree - 1),
    )


# ---------------------------------------------------------------------------
# Tabulation and DoF maps
# ---------------------------------------------------------------------------

def tabulate(space: FunctionSpace, reference_points: np.ndarray) -> BasisTable:
    return space.element.tabulate(reference_points)


def dof_map(space: FunctionSpace, element: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= element < space.mesh.n_cells:
        raise InvalidArgumentError(
            f"element {element} out of range [0, {space.mesh.n_cells})"
        )
    return space.cell_dofs[element].copy(), space.cell_signs[element].copy()


def _jacobians(mesh: Mesh, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    extents = mesh.cell_extents[cells]
    return extents, np.prod(extents, axis=1)


def push_forward(
    space: FunctionSpace, table: BasisTable, cells: Optional[np.ndarray] = None,
) -> CellTable:
    if cells is None:
        cells = np.arange(space.mesh.n_cells)
    extents, det = _jacobians(space.mesh, cells)
    signs = space.cell_signs[cells]
    if space.value_rank == 0:
        values = np.broadcast_to(table.values[None], (len(cells),) + table.values.shape)
        gradient = table.derivatives[None] / extents[:, None, None, :]
        return CellTable(values=values, gradient=gradient)
    piola = extents / det[:, None]  # (nc, 2): (dx/det, dy/det) = (1/dy, 1/dx)
    values = table.values[None] * piola[:, None, None, :] * signs[:, None, :, None]
    divergence = table.divergence[None] / det[:, None, None] * signs[:, None, :]
    return CellTable(values=values, divergence=divergence)


@lru_cache(maxsize=64)
def cell_table(space: FunctionSpace, quadrature: Quadrature) -> CellTable:
    """Physical basis data at the quadrature points of every cell (cached)."""
    return push_forward(space, space.element.tabulate(quadrature.points))


def physical_points(mesh: Mesh, reference_points: np.ndarray,
                    cells: Optional[np.ndarray] = None) -> np.ndarray:
    """Map reference points into each cell: (nc, np, dim)."""
    if cells is None:
        cells = np.arange(mesh.n_cells)
    pts = check_reference_points(reference_points, mesh.dim)
    return mesh.cell_origins[cells][:, None, :] + pts[None] * mesh.cell_extents[cells][:, None, :]


def quadrature_weights(mesh: Mesh, quadrature: Quadrature) -> np.ndarray:
    """Physical weights per cell and point: (nc, nq)."""
    det = np.prod(mesh.cell_extents, axis=1)
    return det[:, None] * quadrature.weights[None, :]


# ---------------------------------------------------------------------------
# Interpolation and evaluation
# ---------------------------------------------------------------------------

def _components(result, shape: tuple[int, ...]) -> list[np.ndarray]:
    if isinstance(result, (tuple, list)):
        return [np.broadcast_to(np.asarray(c, dtype=float), shape) for c in result]
    arr = np.asarray(result, dtype=float)
    if arr.ndim == 0 or arr.shape == shape:
        return [np.broadcast_to(arr, shape)]
    if arr.shape == (2,) + shape:
        return [arr[0], arr[1]]
    if arr.shape == shape + (2,):
        return [arr[..., 0], arr[..., 1]]
    raise InvalidArgumentError(f"field returned shape {arr.shape}, expected {shape}")


def _call_field(field: Callable, coords: np.ndarray) -> list[np.ndarray]:
    shape = coords.shape[:-1]
    args = [coords[..., d] for d in range(coords.shape[-1])]
    return _components(field(*args), shape)


def interpolate(space: FunctionSpace, analytic_field: Callable) -> FEFunction:
    """Apply the DoF functionals of `space` to a callable field.

    Scalar fields are called as f(x) on intervals and f(x, y) on quads;
    vector fields (RT only) return a pair (u_x, u_y).
    """
    if space.value_rank == 0:
        comps = _call_field(analytic_field, space.node_coords)
        if len(comps) != 1:
            raise InvalidArgumentError(f"{space.label} needs a scalar field, got a vector")
        return FEFunction(space, np.array(comps[0], dtype=float))

    mesh = space.mesh
    element = space.element
    coords = physical_points(mesh, element.dual_points)
    comps = _call_field(analytic_field, coords)
    if len(comps) != 2:
        raise InvalidArgumentError(f"{space.label} needs a vector field, got a scalar")
    extents, det = _jacobians(mesh, np.arange(mesh.n_cells))
    # inverse Piola: u_hat_c = det / extent_c * u_c
    pulled = np.stack(
        [comps[c] * (det / extents[:, c])[:, None] for c in range(2)], axis=-1,
    )
    local = np.einsum("ipc,epc->ei", element.dual_matrix, pulled)
    coeffs = np.zeros(space.dim)
    own = space.owner
    coeffs[space.cell_dofs[own]] = local[own] * space.cell_signs[own]
    return FEFunction(space, coeffs)


def evaluate(f: FEFunction, element: int, reference_points: np.ndarray) -> np.ndarray:
    """Values of f at reference points of one element: (np,) or (np, 2)."""
    space = f.space
    dofs, _ = dof_map(space, element)
    table = push_forward(space, space.element.tabulate(reference_points), np.array([element]))
    local = f.coefficients[dofs]
    if space.value_rank == 0:
        return table.values[0] @ local
    return np.einsum("pic,i->pc", table.values[0], local)


def evaluate_gradient(f: FEFunction, element: int, reference_points: np.ndarray) -> np.ndarray:
    space = f.space
    if space.value_rank != 0:
        raise InvalidArgumentError("gradient is defined for scalar spaces only")
    dofs, _ = dof_map(space, element)
    table = push_forward(space, space.element.tabulate(reference_points), np.array([element]))
    return np.einsum("pid,i->pd", table.gradient[0], f.coefficients[dofs])


def evaluate_divergence(f: FEFunction, element: int, reference_points: np.ndarray) -> np.ndarray:
    space = f.space
    if space.family != "RT":
        raise InvalidArgumentError("divergence is defined for RT spaces only")
    dofs, _ = dof_map(space, element)
    table = push_forward(space, space.element.tabulate(reference_points), np.array([element]))
    return table.divergence[0] @ f.coefficients[dofs]


def values_at_quadrature(f: FEFunction, quadrature: Quadrature) -> np.ndarray:
    """(nc, nq) for scalar functions, (nc, nq, 2) for RT functions."""
    table = cell_table(f.space, quadrature)
    local = f.coefficients[f.space.cell_dofs]
    if f.space.value_rank == 0:
        return np.einsum("eqi,ei->eq", table.values, local)
    return np.einsum("eqic,ei->eqc", table.values, local)


def gradient_at_quadrature(f: FEFunction, quadrature: Quadrature) -> np.ndarray:
    table = cell_table(f.space, quadrature)
    return np.einsum("eqid,ei->eqd", table.gradient, f.coefficients[f.space.cell_dofs])


def divergence_at_quadrature(f: FEFunction, quadrature: Quadrature) -> np.ndarray:
    table = cell_table(f.space, quadrature)
    return np.einsum("eqi,ei->eq", table.divergence, f.coefficients[f.space.cell_dofs])


def same_mesh(*spaces: FunctionSpace) -> bool:
    return all(s.mesh is spaces[0].mesh for s in spaces)
