"""Tensor-product Gauss–Legendre rules on the reference element [0, 1]^d."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.mimetic.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class Quadrature:
    points: np.ndarray   # (nq, dim)
    weights: np.ndarray  # (nq,)
    n_per_direction: int

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.weights.size


@lru_cache(maxsize=None)
def gauss_legendre(n: int, dim: int) -> Quadrature:
    """n points per direction, exact for polynomials of degree 2n-1 per direction."""
    if n < 1 or dim not in (1, 2):
        raise InvalidArgumentError(f"unsupported quadrature n={n} dim={dim}")
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    if dim == 1:
        points = x[:, None]
        weights = w
    else:
        # x runs fastest
        px, py = np.meshgrid(x, x, indexing="xy")
        wx, wy = np.meshgrid(w, w, indexing="xy")
        points = np.stack([px.ravel(), py.ravel()], axis=1)
        weights = (wx * wy).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    return Quadrature(points=points, weights=weights, n_per_direction=n)


def points_for_degree(max_degree: int) -> int:
    """Points per direction for integrands built from degree-`max_degree` factors."""
    return math.ceil((2 * max_degree + 1) / 2) + 1


def default_quadrature(*spaces, extra: int = 0) -> Quadrature:
    """Rule shared by every form assembled over `spaces` (plus `extra` points)."""
    if not spaces:
        raise InvalidArgumentError("at least one space is required")
    dim = spaces[0].mesh.dim
    max_degree = max(space.max_degree for space in spaces)
    return gauss_legendre(points_for_degree(max_degree) + extra, dim)
