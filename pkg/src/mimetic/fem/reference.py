"""Reference elements on [0, 1]^d: Lagrange (CG/DG) and Raviart–Thomas.

Each element exposes its basis through `tabulate` and its degrees of
freedom through a pair (`dual_points`, `dual_matrix`): applying DoF i to a
field v means  sum_p dual_matrix[i, p] . v(dual_points[p]).  For Lagrange
elements these are point values at the nodes.  For RT(k) they are normal
flux moments against shifted Legendre polynomials of degree <= k on each
edge (outward normal, edges ordered left, right, bottom, top) followed by
interior moments of the x-component against x^a y^b (a < k, b <= k) and
of the y-component against x^a y^b (a <= k, b < k).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from src.mimetic.errors import DomainError
from src.mimetic.fem.quadrature import gauss_legendre

_REFERENCE_TOL = 1e-14

_EDGE_NORMALS = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class BasisTable:
    """Reference basis data at a set of points.

    values:      (npts, nloc) scalar or (npts, nloc, 2) vector values
    derivatives: (npts, nloc, dim) gradient for scalar elements, None for RT
    divergence:  (npts, nloc) for RT elements, None otherwise
    """

    points: np.ndarray
    values: np.ndarray
    derivatives: Optional[np.ndarray] = None
    divergence: Optional[np.ndarray] = None


def check_reference_points(points: np.ndarray, dim: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
        pts = pts.T
    if pts.shape[1] != dim:
        raise DomainError(f"expected reference points of dimension {dim}, got shape {pts.shape}")
    if np.any(pts < -_REFERENCE_TOL) or np.any(pts > 1.0 + _REFERENCE_TOL):
        raise DomainError("reference points must lie in [0, 1]^d")
    return pts


def _monomial_1d(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of 1, x, ..., x^(n-1) at x; shapes (npts, n)."""
    powers = np.arange(n)
    vals = x[:, None] ** powers
    ders = np.zeros_like(vals)
    ders[:, 1:] = powers[1:] * x[:, None] ** (powers[1:] - 1)
    return vals, ders


def lagrange_nodes_1d(degree: int) -> np.ndarray:
    if degree == 0:
        return np.array([0.5])
    return np.linspace(0.0, 1.0, degree + 1)


# ---------------------------------------------------------------------------
# Lagrange (tensor-product Q_p) elements
# ---------------------------------------------------------------------------

class LagrangeElement:
    """Tensor-product Lagrange element; local index b*(p+1) + a for node (a, b)."""

    value_rank = 0

    def __init__(self, dim: int, degree: int) -> None:
        self.dim = dim
        self.degree = degree
        self.max_degree = degree
        self.nodes_1d = lagrange_nodes_1d(degree)
        n = degree + 1
        vandermonde, _ = _monomial_1d(self.nodes_1d, n)
        self._coeffs = np.linalg.inv(vandermonde)
        if dim == 1:
            self.nodes = self.nodes_1d[:, None]
        else:
            nx, ny = np.meshgrid(self.nodes_1d, self.nodes_1d, indexing="xy")
            self.nodes = np.stack([nx.ravel(), ny.ravel()], axis=1)
        self.n_local = self.nodes.shape[0]
        self.dual_points = self.nodes
        self.dual_matrix = np.eye(self.n_local)

    def _tabulate_1d(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        vals, ders = _monomial_1d(x, self.degree + 1)
        return vals @ self._coeffs, ders @ self._coeffs

    def tabulate(self, points: np.ndarray) -> BasisTable:
        pts = check_reference_points(points, self.dim)
        if self.dim == 1:
            v, d = self._tabulate_1d(pts[:, 0])
            return BasisTable(points=pts, values=v, derivatives=d[:, :, None])
        vx, dx = self._tabulate_1d(pts[:, 0])
        vy, dy = self._tabulate_1d(pts[:, 1])
        npts = pts.shape[0]
        values = (vy[:, :, None] * vx[:, None, :]).reshape(npts, -1)
        grad_x = (vy[:, :, None] * dx[:, None, :]).reshape(npts, -1)
        grad_y = (dy[:, :, None] * vx[:, None, :]).reshape(npts, -1)
        return BasisTable(
            points=pts, values=values, derivatives=np.stack([grad_x, grad_y], axis=-1),
        )


# ---------------------------------------------------------------------------
# Raviart–Thomas elements on the unit square
# ---------------------------------------------------------------------------

def _shifted_legendre(s: np.ndarray, m: int) -> np.ndarray:
    coeffs = np.zeros(m + 1)
    coeffs[m] = 1.0
    return np.polynomial.legendre.legval(2.0 * s - 1.0, coeffs)


class RaviartThomasElement:
    """RT(k) on [0,1]^2: x-component in Q_{k+1,k}, y-component in Q_{k,k+1}."""

    value_rank = 1
    dim = 2

    def __init__(self, k: int) -> None:
        self.degree = k
        self.max_degree = k + 1
        # (component, a, b): monomial x^a y^b in that component
        self._monomials = [(0, a, b) for b in range(k + 1) for a in range(k + 2)]
        self._monomials += [(1, a, b) for b in range(k + 2) for a in range(k + 1)]
        self.n_local = len(self._monomials)
        self.n_edge_dofs = k + 1
        self.n_interior = self.n_local - 4 * self.n_edge_dofs

        self.dual_points, self.dual_matrix = self._build_functionals()
        vandermonde = np.einsum(
            "ipc,pmc->im", self.dual_matrix, self._monomial_values(self.dual_points)[0],
        )
        self._coeffs = np.linalg.inv(vandermonde)

    def _build_functionals(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.degree
        edge_rule = gauss_legendre(k + 3, 1)
        s = edge_rule.points[:, 0]
        w = edge_rule.weights
        ns = s.size
        cell_rule = gauss_legendre(k + 3, 2)

        edge_points = np.concatenate([
            np.stack([np.zeros(ns), s], axis=1),
            np.stack([np.ones(ns), s], axis=1),
            np.stack([s, np.zeros(ns)], axis=1),
            np.stack([s, np.ones(ns)], axis=1),
        ])
        points = np.concatenate([edge_points, cell_rule.points])
        n_points = points.shape[0]

        rows = []
        for edge in range(4):
            for m in range(k + 1):
                row = np.zeros((n_points, 2))
                sl = slice(edge * ns, (edge + 1) * ns)
                row[sl] = (w * _shifted_legendre(s, m))[:, None] * _EDGE_NORMALS[edge]
                rows.append(row)

        cx, cy = cell_rule.points[:, 0], cell_rule.points[:, 1]
        offset = 4 * ns
        interior = [(0, a, b) for b in range(k + 1) for a in range(k)]
        interior += [(1, a, b) for b in range(k) for a in range(k + 1)]
        for comp, a, b in interior:
            row = np.zeros((n_points, 2))
            row[offset:, comp] = cell_rule.weights * cx ** a * cy ** b
            rows.append(row)
        return points, np.array(rows)

    def _monomial_values(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Monomial values (npts, nmono, 2) and their divergences (npts, nmono)."""
        x, y = pts[:, 0], pts[:, 1]
        npts = pts.shape[0]
        vals = np.zeros((npts, self.n_local, 2))
        div = np.zeros((npts, self.n_local))
        for m, (comp, a, b) in enumerate(self._monomials):
            vals[:, m, comp] = x ** a * y ** b
            if comp == 0 and a > 0:
                div[:, m] = a * x ** (a - 1) * y ** b
            elif comp == 1 and b > 0:
                div[:, m] = b * x ** a * y ** (b - 1)
        return vals, div

    def tabulate(self, points: np.ndarray) -> BasisTable:
        pts = check_reference_points(points, 2)
        vals, div = self._monomial_values(pts)
        return BasisTable(
            points=pts,
            values=np.einsum("pmc,mi->pic", vals, self._coeffs),
            divergence=div @ self._coeffs,
        )


@lru_cache(maxsize=None)
def lagrange_element(dim: int, degree: int) -> LagrangeElement:
    return LagrangeElement(dim, degree)


@lru_cache(maxsize=None)
def raviart_thomas_element(k: int) -> RaviartThomasElement:
    return RaviartThomasElement(k)
