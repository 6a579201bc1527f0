"""Tests for function spaces, DoF maps, interpolation and evaluation."""

from __future__ import annotations

import numpy as np
import pytest

from src.mimetic.errors import DomainError, InvalidArgumentError, UnsupportedSpaceError
from src.mimetic.fem.space import (
    FEFunction,
    dof_map,
    evaluate,
    evaluate_divergence,
    evaluate_gradient,
    interpolate,
    make_compatible_spaces,
    make_space,
    tabulate,
)
from src.mimetic.mesh import build_interval_mesh, build_periodic_quad_mesh


def _make_quad(n: int = 4, lx: float = 1.0, ly: float = 1.0):
    return build_periodic_quad_mesh(lx, ly, n, n)


def _interior_cells(mesh):
    """Cells away from the periodic seam, where global polynomials stay continuous."""
    cells = np.arange(mesh.n_cells)
    i, j = cells % mesh.nx, cells // mesh.nx
    return cells[(i < mesh.nx - 1) & (j < mesh.ny - 1)]


_SAMPLE_POINTS = np.array([[0.1, 0.2], [0.5, 0.5], [0.9, 0.3], [0.25, 0.8], [0.7, 0.95]])


class TestSpaceDimensions:
    @pytest.mark.parametrize("family, degree, expected", [
        ("CG", 1, 10), ("CG", 2, 20), ("CG", 3, 30), ("DG", 0, 10), ("DG", 1, 20), ("DG", 3, 40),
    ])
    def test_interval(self, family, degree, expected):
        mesh = build_interval_mesh(1.0, 10)
        assert make_space(mesh, family, degree).dim == expected

    @pytest.mark.parametrize("family, degree, expected", [
        ("CG", 1, 16), ("CG", 2, 64), ("RT", 0, 32), ("RT", 1, 128), ("DG", 0, 16), ("DG", 1, 64),
    ])
    def test_quad(self, family, degree, expected):
        assert make_space(_make_quad(4), family, degree).dim == expected

    def test_compatible_triple(self):
        spaces = make_compatible_spaces(_make_quad(4), 2)
        assert (spaces.V0.label, spaces.V1.label, spaces.V2.label) == ("CG2", "RT1", "DG1")

    def test_compatible_interval_pair(self):
        spaces = make_compatible_spaces(build_interval_mesh(1.0, 8), 1)
        assert (spaces.V0.label, spaces.V1.label) == ("CG1", "DG0")
        assert spaces.V2 is None

    @pytest.mark.parametrize("family, degree, two_d", [
        ("RT", 2, True), ("DG", 2, True), ("CG", 3, True), ("CG", 4, False), ("RT", 0, False),
    ])
    def test_unsupported(self, family, degree, two_d):
        mesh = _make_quad(2) if two_d else build_interval_mesh(1.0, 4)
        with pytest.raises(UnsupportedSpaceError):
            make_space(mesh, family, degree)


class TestTabulate:
    def test_cg1_interval_midpoint(self):
        space = make_space(build_interval_mesh(1.0, 4), "CG", 1)
        table = tabulate(space, np.array([0.5]))
        assert np.allclose(table.values[0], [0.5, 0.5])
        assert np.allclose(table.derivatives[0, :, 0], [-1.0, 1.0])

    def test_dg0_is_constant(self):
        space = make_space(_make_quad(2), "DG", 0)
        table = tabulate(space, _SAMPLE_POINTS)
        assert np.allclose(table.values, 1.0)

    @pytest.mark.parametrize("degree", [1, 2])
    def test_lagrange_partition_of_unity(self, degree):
        space = make_space(_make_quad(2), "CG", degree)
        table = tabulate(space, _SAMPLE_POINTS)
        assert np.allclose(table.values.sum(axis=1), 1.0, atol=1e-14)
        assert np.allclose(table.derivatives.sum(axis=1), 0.0, atol=1e-12)

    def test_rt0_left_edge_basis_at_centre(self):
        space = make_space(_make_quad(2), "RT", 0)
        table = tabulate(space, np.array([[0.5, 0.5]]))
        assert np.allclose(table.values[0, 0], [-0.5, 0.0])

    def test_rt_basis_is_dual_to_dofs(self):
        element = make_space(_make_quad(2), "RT", 1).element
        table = element.tabulate(element.dual_points)
        gram = np.einsum("ipc,pjc->ij", element.dual_matrix, table.values)
        assert np.allclose(gram, np.eye(element.n_local), atol=1e-12)

    def test_point_outside_reference_cell(self):
        space = make_space(_make_quad(2), "CG", 1)
        with pytest.raises(DomainError):
            tabulate(space, np.array([[1.5, 0.5]]))


class TestDofMap:
    def test_dg0(self):
        space = make_space(_make_quad(3), "DG", 0)
        for e in range(space.mesh.n_cells):
            dofs, signs = dof_map(space, e)
            assert list(dofs) == [e] and list(signs) == [1.0]

    @pytest.mark.parametrize("degree", [0, 1])
    def test_rt_edge_dofs_shared_with_opposite_signs(self, degree):
        space = make_space(_make_quad(3), "RT", degree)
        totals = np.zeros(space.dim)
        counts = np.zeros(space.dim, dtype=int)
        for e in range(space.mesh.n_cells):
            dofs, signs = dof_map(space, e)
            np.add.at(totals, dofs, signs)
            np.add.at(counts, dofs, 1)
        n_edge = space.mesh.n_edges * (degree + 1)
        assert np.all(counts[:n_edge] == 2)
        assert np.allclose(totals[:n_edge], 0.0)
        assert np.all(counts[n_edge:] == 1)

    def test_cg1_vertex_shared_by_four_cells(self):
        space = make_space(_make_quad(4), "CG", 1)
        counts = np.bincount(space.cell_dofs.ravel(), minlength=space.dim)
        assert np.all(counts == 4)

    def test_every_dof_owned_once(self):
        for family, degree in (("CG", 2), ("RT", 1), ("DG", 1)):
            space = make_space(_make_quad(3), family, degree)
            owned = np.bincount(space.cell_dofs[space.owner], minlength=space.dim)
            assert np.all(owned == 1), space.label

    def test_cg2_node_coordinates_lie_in_the_fundamental_domain(self):
        mesh = _make_quad(4, lx=1.0, ly=2.0)
        cg1, cg2 = make_space(mesh, "CG", 1), make_space(mesh, "CG", 2)
        assert np.allclose(cg2.node_coords[: mesh.n_cells], cg1.node_coords, atol=1e-15)
        assert np.allclose(cg2.node_coords[0], [0.0, 0.0], atol=1e-15)
        assert np.all(cg2.node_coords >= 0.0)
        assert np.all(cg2.node_coords[:, 0] < 1.0) and np.all(cg2.node_coords[:, 1] < 2.0)

    def test_out_of_range(self):
        space = make_space(_make_quad(2), "CG", 1)
        with pytest.raises(InvalidArgumentError):
            dof_map(space, 4)
        with pytest.raises(InvalidArgumentError):
            dof_map(space, -1)


class TestInterpolate:
    def test_constant_into_dg0(self):
        space = make_space(_make_quad(3), "DG", 0)
        fn = interpolate(space, lambda x, y: 2.5)
        assert np.allclose(fn.coefficients, 2.5)

    def test_uniform_flow_into_rt0(self):
        mesh = _make_quad(4)
        fn = interpolate(make_space(mesh, "RT", 0), lambda x, y: (np.ones_like(x), np.zeros_like(x)))
        n = mesh.n_cells
        assert np.allclose(fn.coefficients[:n], mesh.dy)
        assert np.allclose(fn.coefficients[n:], 0.0, atol=1e-15)

    def test_sine_into_cg1(self):
        space = make_space(build_interval_mesh(1.0, 4), "CG", 1)
        fn = interpolate(space, lambda x: np.sin(2 * np.pi * x))
        assert np.allclose(fn.coefficients, [0.0, 1.0, 0.0, -1.0], atol=1e-15)

    def test_scalar_field_into_rt(self):
        with pytest.raises(InvalidArgumentError):
            interpolate(make_space(_make_quad(2), "RT", 0), lambda x, y: x + y)

    def test_vector_field_into_cg(self):
        with pytest.raises(InvalidArgumentError):
            interpolate(make_space(_make_quad(2), "CG", 1), lambda x, y: (x, y))

    def test_coefficient_length_checked(self):
        space = make_space(_make_quad(2), "DG", 0)
        with pytest.raises(InvalidArgumentError):
            FEFunction(space, np.zeros(3))


class TestPolynomialReproduction:
    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_interval_cg(self, degree):
        mesh = build_interval_mesh(1.0, 6)
        poly = lambda x: 1.0 + 0.5 * x - 2.0 * x ** degree  # noqa: E731
        fn = interpolate(make_space(mesh, "CG", degree), poly)
        pts = np.array([0.13, 0.5, 0.77])
        for e in range(mesh.n_elements - 1):
            x = mesh.vertices[e] + pts * mesh.widths[e]
            assert np.allclose(evaluate(fn, e, pts), poly(x), atol=1e-12)

    @pytest.mark.parametrize("degree", [0, 1, 2, 3])
    def test_interval_dg(self, degree):
        mesh = build_interval_mesh(1.0, 5)
        poly = lambda x: 0.3 + 1.5 * x ** degree  # noqa: E731
        fn = interpolate(make_space(mesh, "DG", degree), poly)
        pts = np.array([0.0, 0.4, 1.0])
        for e in range(mesh.n_elements):
            x = mesh.vertices[e] + pts * mesh.widths[e]
            assert np.allclose(evaluate(fn, e, pts), poly(x), atol=1e-12)

    @pytest.mark.parametrize("family, degree, field", [
        ("CG", 1, lambda x, y: 1.0 + 2.0 * x - y + 3.0 * x * y),
        ("CG", 2, lambda x, y: x * x * y - 2.0 * y * y + x),
        ("DG", 0, lambda x, y: 0.7 + 0.0 * x),
        ("DG", 1, lambda x, y: 2.0 - x + 4.0 * x * y),
    ])
    def test_quad_scalar(self, family, degree, field):
        mesh = _make_quad(4)
        fn = interpolate(make_space(mesh, family, degree), field)
        for e in _interior_cells(mesh):
            xy = mesh.cell_origins[e] + _SAMPLE_POINTS * [mesh.dx, mesh.dy]
            assert np.allclose(evaluate(fn, e, _SAMPLE_POINTS), field(xy[:, 0], xy[:, 1]), atol=1e-12)

    @pytest.mark.parametrize("degree, field", [
        (0, lambda x, y: (1.0 + 2.0 * x, 0.5 - y)),
        (1, lambda x, y: (x * x * y + x, x * y * y + y * y)),
    ])
    def test_quad_rt(self, degree, field):
        mesh = _make_quad(4)
        fn = interpolate(make_space(mesh, "RT", degree), field)
        for e in _interior_cells(mesh):
            xy = mesh.cell_origins[e] + _SAMPLE_POINTS * [mesh.dx, mesh.dy]
            expected = np.stack(field(xy[:, 0], xy[:, 1]), axis=-1)
            assert np.allclose(evaluate(fn, e, _SAMPLE_POINTS), expected, atol=1e-12)


class TestEvaluation:
    def test_ones_everywhere(self):
        space = make_space(_make_quad(3), "CG", 2)
        fn = FEFunction(space, np.ones(space.dim))
        for e in range(space.mesh.n_cells):
            assert np.allclose(evaluate(fn, e, _SAMPLE_POINTS), 1.0)
            assert np.allclose(evaluate_gradient(fn, e, _SAMPLE_POINTS), 0.0, atol=1e-12)

    def test_zigzag_at_vertices(self):
        mesh = build_interval_mesh(1.0, 8)
        space = make_space(mesh, "CG", 1)
        fn = FEFunction(space, (-1.0) ** np.arange(space.dim))
        for e in range(mesh.n_elements):
            assert evaluate(fn, e, np.array([0.0]))[0] == pytest.approx((-1.0) ** e)

    def test_gradient_of_linear_field(self):
        mesh = _make_quad(4, lx=2.0)
        fn = interpolate(make_space(mesh, "CG", 1), lambda x, y: 3.0 * x - 2.0 * y)
        for e in _interior_cells(mesh):
            assert np.allclose(evaluate_gradient(fn, e, _SAMPLE_POINTS), [3.0, -2.0])

    def test_rt0_divergence_is_cellwise_constant(self):
        space = make_space(_make_quad(4), "RT", 0)
        rng = np.random.default_rng(3)
        fn = FEFunction(space, rng.standard_normal(space.dim))
        for e in range(space.mesh.n_cells):
            div = evaluate_divergence(fn, e, _SAMPLE_POINTS)
            assert np.allclose(div, div[0])

    def test_rt1_divergence_is_bilinear(self):
        space = make_space(_make_quad(3), "RT", 1)
        rng = np.random.default_rng(5)
        fn = FEFunction(space, rng.standard_normal(space.dim))
        corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        for e in range(space.mesh.n_cells):
            c00, c10, c01, c11 = evaluate_divergence(fn, e, corners)
            x, y = _SAMPLE_POINTS[:, 0], _SAMPLE_POINTS[:, 1]
            bilinear = c00 * (1 - x) * (1 - y) + c10 * x * (1 - y) + c01 * (1 - x) * y + c11 * x * y
            assert np.allclose(evaluate_divergence(fn, e, _SAMPLE_POINTS), bilinear, atol=1e-10)

    def test_divergence_needs_rt(self):
        space = make_space(_make_quad(2), "DG", 0)
        with pytest.raises(InvalidArgumentError):
            evaluate_divergence(FEFunction(space, np.zeros(space.dim)), 0, _SAMPLE_POINTS)

    def test_divergence_theorem(self):
        mesh = _make_quad(4)
        space = make_space(mesh, "RT", 0)
        rng = np.random.default_rng(11)
        coeffs = rng.standard_normal(space.dim)
        fn = FEFunction(space, coeffs)
        e = 5
        dofs, signs = dof_map(space, e)
        # integral of the divergence equals the net outward flux
        div = evaluate_divergence(fn, e, np.array([[0.5, 0.5]]))[0]
        assert div * mesh.cell_area == pytest.approx(np.sum(signs * coeffs[dofs]))
