import json
import math

import pytest

import erwlab


def test_defaults_parse():
    cfg = json.loads(erwlab.defaults())
    assert cfg["model"]["d"] == 2
    assert cfg["model"]["kernel"]["type"] == "excited-nn"
    assert cfg["run"]["replicas"] >= 1


def test_validate_exit_codes():
    good = {"model": {"d": 2, "kernel": {"type": "excited-nn", "p": 0.75}}}
    code, out = erwlab.validate(good)
    assert code == 0
    assert "lambda" in out

    subcritical = {"model": {"kernel": {"type": "excited-nn", "p": 0.4}}}
    code, out = erwlab.validate(subcritical)
    assert code == 1

    broken = {"model": {"kernel": {"type": "excited-nn", "p": 2.0}}}
    code, out = erwlab.validate(broken)
    assert code == 2


def test_certificate_values():
    cert = erwlab.certificate({"model": {"kernel": {"type": "excited-nn", "p": 0.75}}})
    assert cert["has_excited"]
    assert cert["ballistic_ok"]
    assert cert["lambda"] == pytest.approx(0.25)
    assert cert["jump_bound"] == pytest.approx(1.0)
    assert cert["ellipticity_ok"]


def test_simulate_analyze_round_trip(tmp_path):
    cfg = {
        "model": {"d": 2, "kernel": {"type": "excited-nn", "p": 0.75}},
        "run": {"horizon": 1200, "replicas": 30, "seed": 11, "threads": 1},
        "output": {"dir": str(tmp_path)},
    }
    code, out = erwlab.simulate(cfg)
    assert code == 0, out
    assert (tmp_path / "stats.json").exists()
    assert (tmp_path / "blocks.csv").exists()

    code, out = erwlab.analyze(cfg)
    assert code == 0, out
    est = json.loads((tmp_path / "estimators.json").read_text())
    speed = est["reports"]["speed"]
    assert speed["estimate"] > 0.05
    lo, hi = speed["ci"]
    assert lo < speed["estimate"] < hi

    stats = json.loads((tmp_path / "stats.json").read_text())
    rec = stats[0]
    assert set(rec) == {"n", "range", "proj", "min_proj", "max_proj", "local_time"}


def test_analyze_missing_input(tmp_path):
    cfg = {"output": {"dir": str(tmp_path / "never_ran")}}
    code, out = erwlab.analyze(cfg)
    assert code == 3


def test_regeneration_times_fixtures():
    monotone = [float(i) for i in range(11)]
    assert erwlab.regeneration_times(monotone) == list(range(1, 11))
    assert erwlab.oracle_regeneration_times(monotone) == list(range(1, 11))

    back = [0.0, 1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    times = erwlab.regeneration_times(back)
    assert times[0] == 4
    assert times == erwlab.oracle_regeneration_times(back)


def test_azuma_bound_closed_form():
    assert erwlab.azuma_bound(100, 30.0, 1.0) == pytest.approx(
        2 * math.exp(-4.5), abs=1e-15
    )
    one_sided = erwlab.azuma_bound(100, 30.0, 1.0, two_sided=False)
    assert one_sided == pytest.approx(math.exp(-4.5), abs=1e-15)


def test_submartingale_certificate():
    cert = erwlab.submartingale_certificate(b=0.9, radius=50.0)
    assert cert["certified"]
    assert cert["violations"] == 0
    assert cert["min_margin"] > 0
