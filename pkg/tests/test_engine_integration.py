"""Integration-level tests — bundled scenarios, full runs and refinement studies."""

from pathlib import Path

import numpy as np
import pytest

from src.mimetic import engine, io
from src.mimetic.config import Settings
from src.mimetic.engine import DATA_DIR, convergence_study, format_order, resolve_output_dir, run_scenario
from src.mimetic.errors import InvalidArgumentError
from src.mimetic.models import PRESETS_BY_MODEL

SCENARIOS = ("standing_wave.cfg", "geostrophic.cfg", "gravity_wave.cfg", "vortex_pair.cfg")


@pytest.mark.parametrize("name", SCENARIOS)
def test_bundled_scenarios_load(name):
    path = DATA_DIR / name
    assert path.exists(), f"Missing {path}"
    config = io.load_config(path)
    assert config.preset in PRESETS_BY_MODEL[config.model]


def test_standing_wave_run(tmp_path):
    config = io.load_config(DATA_DIR / "standing_wave.cfg")
    result = run_scenario(config, tmp_path)
    assert len(result.records) == config.n_steps + 1
    energy = np.array([r.energy for r in result.records])
    assert np.abs(energy - energy[0]).max() <= 1e-10 * energy[0]
    assert result.final_state.t == pytest.approx(config.n_steps * config.dt)
    assert (tmp_path / "standing_wave.csv").exists()


def test_geostrophic_run_stays_balanced(tmp_path):
    config = io.load_config(DATA_DIR / "geostrophic.cfg")
    result = run_scenario(config, tmp_path)
    frame = io.read_diagnostics(tmp_path / config.diagnostics_file)
    assert len(frame) == 101
    assert frame["balance_residual"].max() <= 1e-10
    assert np.abs(frame["mass"] - frame["mass"][0]).max() <= 1e-13
    assert np.abs(frame["energy"] - frame["energy"][0]).max() <= 1e-11 * frame["energy"][0]
    assert result.records[-1].step == 100


def test_vortex_pair_short_run_dumps_fields(tmp_path):
    config = io.load_config(DATA_DIR / "vortex_pair.cfg", {"nx": "8", "ny": "8", "n_steps": "5"})
    result = run_scenario(config, tmp_path)
    masses = [r.mass for r in result.records]
    assert np.allclose(masses, masses[0], rtol=1e-12, atol=0.0)

    fields, meta = io.read_field_dump(tmp_path, "vortex_pair")
    assert np.array_equal(fields["u"], result.final_state.u.coefficients)
    assert np.array_equal(fields["h"], result.final_state.h.coefficients)
    assert meta["time"] == pytest.approx(0.05)


def test_output_dir_environment_wins(tmp_path, monkeypatch):
    config = io.parse_config_text(f"model = wave1d\noutput_dir = {tmp_path / 'from_config'}\n")
    monkeypatch.setattr(engine, "settings", Settings(output_dir=tmp_path / "from_env"))
    assert resolve_output_dir(config) == tmp_path / "from_env"


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.delenv("MIMETIC_OUTPUT_DIR", raising=False)
    monkeypatch.setattr(engine, "settings", Settings())
    config = io.parse_config_text(f"model = wave1d\noutput_dir = {tmp_path}\n")
    assert resolve_output_dir(config) == Path(tmp_path)


def test_convergence_needs_three_levels():
    with pytest.raises(InvalidArgumentError):
        convergence_study("wave1d", [8, 16])


def test_convergence_rejects_nonlinear_model():
    with pytest.raises(InvalidArgumentError):
        convergence_study("swe-nonlinear", [4, 8, 16])


@pytest.mark.parametrize("order, expected", [(None, "-"), (0.0, "0.000"), (-0.5, "-0.500"), (2.0004, "2.000")])
def test_format_order(order, expected):
    assert format_order(order) == expected


@pytest.mark.slow
def test_wave1d_cg2_velocity_converges_at_second_order():
    rows = convergence_study("wave1d", [8, 16, 32], degree=2, field_name="u")
    assert all(row.order >= 1.8 for row in rows[1:])


@pytest.mark.slow
def test_wave1d_cg1_depth_error_decreases():
    rows = convergence_study("wave1d", [8, 16, 32], degree=1, field_name="h")
    errors = [row.error for row in rows]
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.slow
def test_gravity_wave_depth_converges():
    rows = convergence_study("swe-linear", [8, 16, 32], degree=1, field_name="h")
    assert all(row.order >= 0.8 for row in rows[1:])
