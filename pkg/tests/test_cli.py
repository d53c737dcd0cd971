import csv
import io
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from projchoice import Project, multi
from projchoice.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_json(capsys):
    code, out, _ = run(capsys, "compute", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["r_s"] == 0.5 and doc["r_m"] == 0.25
    assert doc["top_tier_multi"] == 0.75
    code, out, _ = run(capsys, "compute", "--u-min", "1", "--format", "json")
    doc = json.loads(out)
    assert doc["r_s"] == 0 and doc["r_m"] == 0
    code, out, _ = run(capsys, "compute", "--u-min", "0.2")
    assert "0.444444444444" in out


def test_compute_rejects_out_of_range(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["compute", "--u-min", "1.5"])
    assert exc.value.code == 2


def test_episode_two_projects(capsys):
    code, out, _ = run(capsys, "episode", str(DATA / "two_projects.json"), "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert [d["weight"] for d in doc["distribution"]] == [0.5, 0.5]
    assert doc["regret"] == 0.25


def test_episode_singleton_any_env(capsys, tmp_path):
    f = tmp_path / "one.json"
    f.write_text(json.dumps({"params": {"u_min": 0.3, "v_min": 0.1},
                             "projects": [{"u": 0.3, "v": 1.0}]}))
    for env in ("single", "multi", "partial", "k=2"):
        code, out, _ = run(capsys, "episode", str(f), "--env", env, "--format", "json")
        doc = json.loads(out)
        assert code == 0 and doc["regret"] == 0 and [d["weight"] for d in doc["distribution"]] == [1.0]


def test_episode_multi_beats_two_project(capsys):
    path = str(DATA / "favourite_bottom.json")
    _, out, _ = run(capsys, "episode", path, "--env", "multi", "--format", "json")
    full = json.loads(out)
    _, out, _ = run(capsys, "episode", path, "--env", "k=2", "--format", "json")
    two = json.loads(out)
    assert full["agent_payoff"] == pytest.approx(two["agent_payoff"], abs=1e-9)
    assert full["principal_payoff"] > two["principal_payoff"] + 1e-6


def test_episode_text_output(capsys):
    code, out, _ = run(capsys, "episode", str(DATA / "two_projects.json"))
    assert code == 0 and "regret 0.25" in out


def test_episode_outside_domain(capsys):
    code, _, err = run(capsys, "episode", str(DATA / "outside.json"))
    assert code == 2 and "projects[1].u" in err


def test_episode_bad_files(capsys, tmp_path):
    code, _, err = run(capsys, "episode", str(tmp_path / "missing.json"))
    assert code == 2 and "missing.json" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "episode", str(bad))[0] == 2
    assert run(capsys, "episode", str(DATA / "two_projects.json"), "--env", "k=x")[0] == 2


def _read_curve(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "r_s", "r_m"]
    return [tuple(map(float, r)) for r in rows[1:]]


def test_curves_examples(capsys):
    code, out, _ = run(capsys, "curves", "--axis", "v", "--n", "100")
    rows = _read_curve(out)
    assert code == 0 and len(rows) == 101
    for x, _, r_m in rows:
        expect = 0.25 if x <= 0.5 else x * (1 - x)
        assert r_m == pytest.approx(expect, abs=1e-12)
    _, out, _ = run(capsys, "curves", "--axis", "u", "--n", "100")
    rows = {round(x, 6): (r_s, r_m) for x, r_s, r_m in _read_curve(out)}
    assert rows[1.0] == (0.0, 0.0)
    assert rows[0.5][1] == pytest.approx(0.5 / (1 + math.sqrt(0.5)) ** 2, abs=1e-11)


def test_curves_file_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "curves", "--axis", "u", "--fixed", "0.3", "--out", str(a))[0] == 0
    assert run(capsys, "curves", "--axis", "u", "--fixed", "0.3", "--out", str(b))[0] == 0
    raw = a.read_bytes()
    assert raw == b.read_bytes() and b"\r" not in raw and raw.endswith(b"\n")


def test_curves_errors(capsys, tmp_path):
    assert run(capsys, "curves", "--axis", "u", "--n", "1")[0] == 2
    code, _, err = run(capsys, "curves", "--axis", "u", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 1 and "cannot write" in err


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--env", "single", "--grid-n", "21",
                       "--refine-rounds", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["mechanism"] == "alpha_s@single"
    assert abs(doc["wcr"] - 0.5) <= 2 / 21
    code, out, _ = run(capsys, "certify", "--grid-n", "21", "--strict-eps", "0.001",
                       "--format", "json")
    assert json.loads(out)["mechanism"].startswith("rho_m_strict")
    assert run(capsys, "certify", "--grid-n", "1001", "--max-type-size", "3")[0] == 2


def test_verify_quick(capsys):
    start = time.perf_counter()
    code, out, _ = run(capsys, "verify", "--level", "quick", "--format", "json")
    elapsed = time.perf_counter() - start
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert sum(c["passed"] for c in doc["checks"]) >= 12
    assert elapsed < 10


def test_mutation_canary(capsys, monkeypatch):
    """Swapping the two tiers of alpha^m must be caught by the suite."""
    def flipped(p, params):
        r = multi.r_multi_closed(params)
        if p.v >= 1 - r or p.u == params.u_min:
            w = r / max(1 - p.v, 1e-12)
            return min(1.0, max(0.0, (1 - w) * params.u_min / max(p.u, 1e-12) + w))
        return 1.0

    def flipped_batch(u, v, params):
        return np.vectorize(lambda a, b: flipped(Project(float(a), float(b)), params))(u, v)

    monkeypatch.setattr(multi, "alpha_multi", flipped)
    monkeypatch.setattr(multi, "alpha_multi_batch", flipped_batch)
    code, out, _ = run(capsys, "verify", "--level", "quick", "--format", "json")
    failed = {c["name"] for c in json.loads(out)["checks"] if not c["passed"]}
    assert code == 1
    assert failed & {"promise-keeping LP and banded LP agree",
                     "rho^m regret at most R^m on random proposals"}, failed


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "projchoice", "compute", "--format", "json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["r_m"] == 0.25
