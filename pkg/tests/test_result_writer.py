import json

import pytest

from src.core.classical_models import urn_event
from src.core.event_core import run_collective
from src.core.quantum_twoslit import SlitMode, run_intense_beam, run_weak_beam
from src.core.result_writer import (
    PatternFormatError,
    ResultWriter,
    pattern_to_dict,
    read_histogram_json,
)
from src.core.stats_fit import chi_square_gof
from src.core.theorem_suite import check_tsn


def test_histogram_round_trip(tmp_path, geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 10_000, 7)
    path = ResultWriter().write_histogram_json(tmp_path / "histogram.json", pattern)
    assert read_histogram_json(path) == pattern


def test_intense_histogram_round_trip(tmp_path, geometry):
    pattern = run_intense_beam(geometry, SlitMode.ONE)
    path = ResultWriter().write_histogram_json(tmp_path / "histogram.json", pattern)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["beam"] == "intense"
    assert data["K"] == 0
    assert data["bins"][0]["count"] is None
    assert read_histogram_json(path) == pattern


def test_histogram_layout(geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 100, 1)
    data = pattern_to_dict(pattern)
    assert data["mode"] == "both"
    assert len(data["bins"]) == 1024
    assert data["bins"][0]["x_hi"] == data["bins"][1]["x_lo"]
    assert sum(b["count"] for b in data["bins"]) == 100


def test_corrupt_histogram(tmp_path):
    path = tmp_path / "histogram.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(PatternFormatError):
        read_histogram_json(path)
    with pytest.raises(PatternFormatError):
        read_histogram_json(tmp_path / "missing.json")


def test_empty_histogram(tmp_path, geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 100, 1)
    data = pattern_to_dict(pattern)
    data["K"] = 0
    for b in data["bins"]:
        b["count"] = 0
    path = tmp_path / "histogram.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(PatternFormatError):
        read_histogram_json(path)


def test_hits_csv(tmp_path, geometry):
    _, hits = run_weak_beam(geometry, SlitMode.BOTH, 25, 3)
    path = ResultWriter().write_hits_csv(tmp_path / "hits.csv", geometry, hits)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "photon_index,t_omega,bin,x_position_m"
    assert len(lines) == 26
    index, t_omega, bin_index, x = lines[1].split(",")
    assert (index, t_omega) == ("0", "1")
    assert int(bin_index) == hits[0].bin
    assert float(x) == pytest.approx(hits[0].x_position, rel=1e-8)


def test_collective_files(tmp_path):
    collective = run_collective(urn_event(5, 5), 100, 2)
    writer = ResultWriter()
    lines = writer.write_collective_csv(tmp_path / "c.csv", collective).read_text(encoding="utf-8").splitlines()
    assert lines[0] == "trial_index,t_omega,realized"
    assert lines[1].startswith("0,1,")
    assert len(lines) == 101
    data = json.loads(writer.write_collective_json(tmp_path / "c.json", collective).read_text(encoding="utf-8"))
    assert data["model"] == {"red": 0.5, "white": 0.5}
    assert data["n"] == 100
    assert data["seed"] == 2
    assert data["counts"]["red"] + data["counts"]["white"] == 100
    assert data["frequencies"]["red"] == data["counts"]["red"] / 100


def test_report_json(tmp_path):
    report = check_tsn(urn_event(5, 5), 3)
    path = ResultWriter().write_report_json(tmp_path / "report.json", [report])
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["checks"][0]["name"] == "TSN"
    assert set(data["checks"][0]) == {"name", "passed", "statistic", "threshold", "n", "seed", "details"}


def test_comparison_csv(tmp_path, geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 10_000, 4)
    gof = chi_square_gof(pattern.histogram, pattern.expected)
    path = ResultWriter().write_comparison_csv(tmp_path / "report.csv", pattern, gof)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x_position_m,observed_density,expected_density"
    assert len(lines) == 1 + 1024 + 1
    assert lines[-1].startswith("# statistic=")
    assert f"dof={gof.dof}" in lines[-1]


def test_writes_are_byte_identical(tmp_path, geometry):
    writer = ResultWriter()
    a, _ = run_weak_beam(geometry, SlitMode.BOTH, 1000, 8)
    b, _ = run_weak_beam(geometry, SlitMode.BOTH, 1000, 8)
    first = writer.write_histogram_json(tmp_path / "a.json", a).read_bytes()
    second = writer.write_histogram_json(tmp_path / "b.json", b).read_bytes()
    assert first == second
