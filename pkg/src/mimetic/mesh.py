"""Periodic structured meshes: 1D intervals and 2D quadrilateral grids.

Entity numbering is a pure function of the constructor arguments:

* 1D: vertex k sits at x_k, element e spans [x_e, x_{e+1}], and vertex Ne
  is identified with vertex 0.
* 2D: vertices and cells are row-major (index = j*Nx + i).  Edges are
  numbered vertical-then-horizontal; vertical edge (i, j) lies on
  x = i*dx and carries the global normal +x, horizontal edge (i, j) lies on
  y = j*dy and carries +y.  Each cell lists its edges as
  [left, right, bottom, top] with sign +1 where the outward normal agrees
  with the global one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from src.mimetic.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

_WIDTH_RTOL = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


# ---------------------------------------------------------------------------
# 1D periodic interval
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Mesh1D:
    length: float
    n_elements: int
    vertices: np.ndarray
    widths: np.ndarray
    cell_vertices: np.ndarray

    dim = 1

    @property
    def n_cells(self) -> int:
        return self.n_elements

    @property
    def n_vertices(self) -> int:
        return self.n_elements

    @property
    def cell_origins(self) -> np.ndarray:
        return self.vertices[:-1, None]

    @property
    def cell_extents(self) -> np.ndarray:
        return self.widths[:, None]

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.widths, self.widths[0], rtol=1e-14, atol=0.0))


def build_interval_mesh(
    length: float,
    n_elements: int,
    widths: Optional[Sequence[float]] = None,
) -> Mesh1D:
    """Partition [0, L] into Ne periodic elements (uniform unless `widths`)."""
    if not length > 0:
        raise InvalidArgumentError(f"interval length must be positive, got {length}")
    if int(n_elements) != n_elements or n_elements < 1:
        raise InvalidArgumentError(f"element count must be a positive integer, got {n_elements}")
    n_elements = int(n_elements)

    if widths is None:
        w = np.full(n_elements, length / n_elements)
    else:
        w = np.asarray(widths, dtype=float)
        if w.shape != (n_elements,):
            raise InvalidArgumentError(
                f"expected {n_elements} element widths, got {w.size}"
            )
        if np.any(w <= 0):
            raise InvalidArgumentError("element widths must be positive")
        if abs(w.sum() - length) > _WIDTH_RTOL * length:
            raise InvalidArgumentError(
                f"element widths sum to {w.sum()!r}, expected {length!r}"
            )

    vertices = np.concatenate([[0.0], np.cumsum(w)])
    vertices[-1] = length
    left = np.arange(n_elements)
    cell_vertices = np.stack([left, (left + 1) % n_elements], axis=1)

    logger.debug("Built interval mesh L=%g Ne=%d", length, n_elements)
    return Mesh1D(
        length=float(length),
        n_elements=n_elements,
        vertices=_frozen(vertices),
        widths=_frozen(w.copy()),
        cell_vertices=_frozen(cell_vertices),
    )


# ---------------------------------------------------------------------------
# 2D doubly periodic quadrilateral grid
# ---------------------------------------------------------------------------

LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3


@dataclass(frozen=True, eq=False)
class Mesh2D:
    lx: float
    ly: float
    nx: int
    ny: int
    vertices: np.ndarray
    edge_vertices: np.ndarray
    edge_normals: np.ndarray
    cell_vertices: np.ndarray
    cell_edges: np.ndarray
    cell_edge_signs: np.ndarray

    dim = 2

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_vertices(self) -> int:
        return self.nx * self.ny

    @property
    def n_edges(self) -> int:
        return 2 * self.nx * self.ny

    @property
    def cell_origins(self) -> np.ndarray:
        cells = np.arange(self.n_cells)
        i, j = cells % self.nx, cells // self.nx
        return np.stack([i * self.dx, j * self.dy], axis=1)

    @property
    def cell_extents(self) -> np.ndarray:
        return np.tile([self.dx, self.dy], (self.n_cells, 1))

    def vertex_index(self, i: int, j: int) -> int:
        return (j % self.ny) * self.nx + (i % self.nx)

    def vertical_edge(self, i: int, j: int) -> int:
        return (j % self.ny) * self.nx + (i % self.nx)

    def horizontal_edge(self, i: int, j: int) -> int:
        return self.nx * self.ny + (j % self.ny) * self.nx + (i % self.nx)

    def signed_boundary(self, cells: Optional[np.ndarray] = None) -> np.ndarray:
        """Sum of signed edge incidences over `cells` (all cells by default)."""
        if cells is None:
            cells = np.arange(self.n_cells)
        out = np.zeros(self.n_edges)
        np.add.at(out, self.cell_edges[cells].ravel(), self.cell_edge_signs[cells].ravel())
        return out


def build_periodic_quad_mesh(lx: float, ly: float, nx: int, ny: int) -> Mesh2D:
    for name, value in (("Lx", lx), ("Ly", ly)):
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {value}")
    for name, value in (("Nx", nx), ("Ny", ny)):
        if int(value) != value or value < 1:
            raise InvalidArgumentError(f"{name} must be a positive integer, got {value}")
    nx, ny = int(nx), int(ny)
    n = nx * ny
    dx, dy = lx / nx, ly / ny

    idx = np.arange(n)
    i, j = idx % nx, idx // nx
    ip, jp = (i + 1) % nx, (j + 1) % ny

    def vid(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return b * nx + a

    vertices = np.stack([i * dx, j * dy], axis=1)

    vertical = np.stack([vid(i, j), vid(i, jp)], axis=1)
    horizontal = np.stack([vid(i, j), vid(ip, j)], axis=1)
    edge_vertices = np.concatenate([vertical, horizontal])
    edge_normals = np.concatenate([np.tile([1.0, 0.0], (n, 1)), np.tile([0.0, 1.0], (n, 1))])

    cell_vertices = np.stack([vid(i, j), vid(ip, j), vid(i, jp), vid(ip, jp)], axis=1)
    cell_edges = np.stack(
        [vid(i, j), vid(ip, j), n + vid(i, j), n + vid(i, jp)], axis=1,
    )
    cell_edge_signs = np.tile(np.array([-1.0, 1.0, -1.0, 1.0]), (n, 1))

    logger.debug("Built periodic quad mesh %dx%d on %gx%g", nx, ny, lx, ly)
    return Mesh2D(
        lx=float(lx),
        ly=float(ly),
        nx=nx,
        ny=ny,
        vertices=_frozen(vertices),
        edge_vertices=_frozen(edge_vertices),
        edge_normals=_frozen(edge_normals),
        cell_vertices=_frozen(cell_vertices),
        cell_edges=_frozen(cell_edges),
        cell_edge_signs=_frozen(cell_edge_signs),
    )


Mesh = Union[Mesh1D, Mesh2D]
