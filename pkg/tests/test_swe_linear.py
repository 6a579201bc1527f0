"""Tests for the linear rotating shallow water stepper and geostrophic balance."""

from __future__ import annotations

import numpy as np
import pytest

from src.mimetic.diagnostics.conserved import balance_residual
from src.mimetic.errors import InvalidArgumentError
from src.mimetic.fem.space import FEFunction, interpolate, make_compatible_spaces
from src.mimetic.mesh import build_periodic_quad_mesh
from src.mimetic.models import SWEParams
from src.mimetic.solvers.operators import SWEState, swe_operators, zero_swe_state
from src.mimetic.solvers.swe_linear import energy_swe_linear, geostrophic_init, step_swe_linear


def _make_spaces(n: int = 8, degree: int = 1):
    return make_compatible_spaces(build_periodic_quad_mesh(1.0, 1.0, n, n), degree)


def _random_psi(spaces, seed: int) -> FEFunction:
    rng = np.random.default_rng(seed)
    return FEFunction(spaces.V0, 0.01 * rng.standard_normal(spaces.V0.dim))


def _smooth_psi(spaces, amplitude: float = 0.01) -> FEFunction:
    return interpolate(
        spaces.V0,
        lambda x, y: amplitude * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y),
    )


def _mass(state: SWEState) -> float:
    ops = swe_operators(state.spaces)
    return float(np.ones(state.h.space.dim) @ (ops.M2 @ state.h.coefficients))


class TestGeostrophicInit:
    def test_constant_streamfunction(self):
        spaces = _make_spaces(4)
        params = SWEParams(f=2.0, g=4.0)
        psi = FEFunction(spaces.V0, np.full(spaces.V0.dim, 3.0))
        state = geostrophic_init(psi, params, spaces)
        assert np.allclose(state.u.coefficients, 0.0, atol=1e-12)
        assert np.allclose(state.h.coefficients, 2.0 * 3.0 / 4.0)

    @pytest.mark.parametrize("degree", [1, 2])
    def test_velocity_is_divergence_free(self, degree):
        spaces = _make_spaces(8, degree)
        state = geostrophic_init(_random_psi(spaces, 0), SWEParams(f=10.0), spaces)
        ops = swe_operators(spaces)
        assert np.abs(ops.B @ state.u.coefficients).max() <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_balanced_cg1(self, seed):
        spaces = _make_spaces(16, 1)
        params = SWEParams(f=10.0, g=1.0, H=1.0)
        state = geostrophic_init(_random_psi(spaces, seed), params, spaces)
        assert balance_residual(state, params) <= 1e-10

    def test_balanced_cg2(self):
        spaces = _make_spaces(8, 2)
        params = SWEParams(f=3.0, g=9.81, H=0.5)
        state = geostrophic_init(_random_psi(spaces, 11), params, spaces)
        assert balance_residual(state, params) <= 1e-10

    def test_balance_survives_rescaling(self):
        spaces = _make_spaces(8, 1)
        psi = _random_psi(spaces, 3)
        params = SWEParams(f=20.0)
        state = geostrophic_init(psi, params, spaces)
        reference = geostrophic_init(psi, SWEParams(f=10.0), spaces)
        assert np.allclose(state.h.coefficients, 2.0 * reference.h.coefficients)
        assert balance_residual(state, params) <= 1e-10

    def test_unbalanced_depth(self):
        spaces = _make_spaces(8, 1)
        state = SWEState(
            spaces=spaces,
            u=FEFunction(spaces.V1, np.zeros(spaces.V1.dim)),
            h=interpolate(spaces.V2, lambda x, y: 0.1 * np.cos(2 * np.pi * x)),
        )
        assert balance_residual(state, SWEParams(f=1.0)) > 1e-3

    def test_psi_from_other_family(self):
        spaces = _make_spaces(4, 1)
        other = _make_spaces(4, 2)
        with pytest.raises(InvalidArgumentError):
            geostrophic_init(FEFunction(other.V0, np.zeros(other.V0.dim)), SWEParams(), spaces)


class TestLinearStep:
    def test_zero_state_stays_zero(self):
        state = zero_swe_state(_make_spaces(4))
        params = SWEParams(f=1.0)
        for _ in range(3):
            state = step_swe_linear(state, params, 0.05)
        assert np.all(state.u.coefficients == 0.0)
        assert np.all(state.h.coefficients == 0.0)

    def test_geostrophic_state_is_steady(self):
        spaces = _make_spaces(16, 1)
        params = SWEParams(f=10.0, g=1.0, H=1.0)
        state = geostrophic_init(_smooth_psi(spaces), params, spaces)
        u0, h0 = state.u.coefficients.copy(), state.h.coefficients.copy()
        for _ in range(100):
            state = step_swe_linear(state, params, 0.01)
        assert np.linalg.norm(state.u.coefficients - u0) <= 1e-10 * np.linalg.norm(u0)
        assert np.linalg.norm(state.h.coefficients - h0) <= 1e-10 * np.linalg.norm(h0)

    @pytest.mark.parametrize("f", [0.0, 5.0])
    def test_energy_conserved(self, f):
        spaces = _make_spaces(8, 1)
        params = SWEParams(f=f, g=1.0, H=1.0)
        state = SWEState(
            spaces=spaces,
            u=FEFunction(spaces.V1, np.zeros(spaces.V1.dim)),
            h=interpolate(spaces.V2, lambda x, y: 0.1 * np.exp(-20 * ((x - 0.5) ** 2 + (y - 0.5) ** 2))),
        )
        e0 = energy_swe_linear(state, params)
        for _ in range(20):
            previous = energy_swe_linear(state, params)
            state = step_swe_linear(state, params, 0.02)
            assert abs(energy_swe_linear(state, params) - previous) <= 1e-11 * e0
        assert np.abs(state.u.coefficients).max() > 0.0

    def test_mass_conserved(self):
        spaces = _make_spaces(8, 2)
        params = SWEParams(f=2.0)
        rng = np.random.default_rng(9)
        state = SWEState(
            spaces=spaces,
            u=FEFunction(spaces.V1, 0.1 * rng.standard_normal(spaces.V1.dim)),
            h=FEFunction(spaces.V2, 0.1 * rng.standard_normal(spaces.V2.dim)),
        )
        m0 = _mass(state)
        for _ in range(10):
            state = step_swe_linear(state, params, 0.01)
        assert _mass(state) == pytest.approx(m0, abs=1e-13)

    def test_non_positive_dt(self):
        state = zero_swe_state(_make_spaces(2))
        with pytest.raises(InvalidArgumentError):
            step_swe_linear(state, SWEParams(), 0.0)
