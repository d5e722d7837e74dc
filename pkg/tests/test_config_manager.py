import json
from pathlib import Path

import pytest
from pytest import approx

from src.core.config_manager import (
    ConfigLoadError,
    ConfigManager,
    ConfigValidationError,
    RunConfig,
)


def _write(path: Path, data) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_reference_preset():
    geometry = ConfigManager().resolve_geometry("reference")
    assert geometry.bins == 1024
    assert geometry.slit_separation == approx(0.25e-3)
    assert geometry.window == approx(20e-3)


def test_unknown_preset():
    with pytest.raises(ConfigValidationError):
        ConfigManager().resolve_geometry("nonexistent")


def test_bins_override():
    assert ConfigManager().resolve_geometry("reference", bins=512).bins == 512


def test_load_geometry_file(tmp_path):
    path = _write(tmp_path / "g.json", {
        "wavelength_nm": 600, "d_mm": 0.3, "a_mm": 0.06, "L_m": 2.0, "window_mm": 40, "bins": 800,
    })
    geometry = ConfigManager().resolve_geometry(config_path=path)
    assert geometry.bins == 800
    assert geometry.fringe_spacing_analytic == approx(4e-3)


@pytest.mark.parametrize("broken", [
    {"d_mm": 0.25, "a_mm": 0.05, "L_m": 1.0, "window_mm": 20, "bins": 1024},
    {"wavelength_nm": 500, "d_mm": 0.25, "a_mm": 0.05, "L_m": 1.0, "window_mm": 20, "bins": "1024"},
    {"wavelength_nm": 500, "d_mm": 0.25, "a_mm": 0.05, "L_m": 1.0, "window_mm": 20, "bins": True},
    [1, 2, 3],
])
def test_invalid_geometry_file(tmp_path, broken):
    path = _write(tmp_path / "g.json", broken)
    with pytest.raises(ConfigValidationError):
        ConfigManager().resolve_geometry(config_path=path)


def test_physically_invalid_geometry(tmp_path):
    path = _write(tmp_path / "g.json", {
        "wavelength_nm": 500, "d_mm": 0.25, "a_mm": 0.5, "L_m": 1.0, "window_mm": 20, "bins": 1024,
    })
    with pytest.raises(ConfigValidationError):
        ConfigManager().resolve_geometry(config_path=path)


def test_unreadable_geometry_file(tmp_path):
    with pytest.raises(ConfigLoadError):
        ConfigManager().resolve_geometry(config_path=tmp_path / "missing.json")
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigLoadError):
        ConfigManager().resolve_geometry(config_path=corrupt)


def test_save_and_reload_geometry(tmp_path):
    manager = ConfigManager()
    geometry = manager.resolve_geometry("reference")
    path = manager.save_geometry(tmp_path / "saved.json", geometry)
    reloaded = manager.resolve_geometry(config_path=path)
    assert reloaded.bins == geometry.bins
    assert reloaded.wavelength == approx(geometry.wavelength)
    assert not (tmp_path / "saved.json.tmp").exists()


def test_run_config_validation(tmp_path):
    config = RunConfig(command="simulate", out=tmp_path, seeds=(1, 2), fmt="CSV")
    assert config.fmt == "csv"
    assert config.seed_suffix(2) == "_seed2"
    assert RunConfig(command="simulate", out=tmp_path).seed_suffix(0) == ""
    with pytest.raises(ConfigValidationError):
        RunConfig(command="simulate", out=tmp_path, seeds=())
    with pytest.raises(ConfigValidationError):
        RunConfig(command="simulate", out=tmp_path, fmt="xml")
    with pytest.raises(ConfigValidationError):
        RunConfig(command="simulate", out=tmp_path, seeds=(-1,))


def test_prepare_output_creates_directory(tmp_path):
    target = tmp_path / "a" / "b"
    RunConfig(command="simulate", out=target).prepare_output()
    assert target.is_dir()


@pytest.mark.parametrize("field, value", [
    ("n", -1), ("K", -5), ("reds", -2), ("whites", 1.5), ("n", True), ("snapshots", (10, -1)),
])
def test_run_config_rejects_bad_counts(tmp_path, field, value):
    with pytest.raises(ConfigValidationError):
        RunConfig(command="simulate", out=tmp_path, **{field: value})


def test_run_config_accepts_zero_counts(tmp_path):
    config = RunConfig(command="simulate", out=tmp_path, n=0, K=0, snapshots=(1, 10))
    assert config.n == 0
    assert config.K == 0
