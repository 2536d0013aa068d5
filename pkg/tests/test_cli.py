import csv
import json

import numpy as np
import pytest

from brownian_argmax import cli
from brownian_argmax.cli import dispatch
from brownian_argmax.stats import TestReport


def run(capsys, *argv):
    code = dispatch([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_maximize_single_path(capsys):
    code, out, _ = run(capsys, "maximize", "--m", 1, "--n", 16, "--seed", 0)
    payload = json.loads(out)
    assert code == 0 and payload["theta"] == [] and payload["gaps"] == [1.0]


def test_maximize_dump(capsys):
    code, out, _ = run(capsys, "maximize", "--m", 3, "--n", 8, "--seed", 5, "--dump")
    payload = json.loads(out)
    assert code == 0 and len(payload["theta"]) == 2
    assert np.array(payload["paths"]).shape == (3, 9)


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--m", "0", "--out", "x"],
        ["verify", "--m", "2", "--bogus"],
        ["maximize", "--m", "2"],
        ["maximize", "--m", "2", "--n", "8", "--seed", "-3"],
        ["density", "--m", "3", "--theta", "0.5"],
        ["density", "--m", "2", "--theta", "0"],
        ["beta-cdf", "--a", "0", "--b", "1", "--x", "0.5"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert "usage" in err


def test_verify_needs_out_dir(capsys, monkeypatch):
    monkeypatch.delenv(cli.OUT_ENV, raising=False)
    code, _, err = run(capsys, "verify", "--m", "2")
    assert code == 2 and "--out" in err


def test_density_and_beta_cdf(capsys):
    code, out, _ = run(capsys, "density", "--m", 2, "--theta", "0.5")
    assert code == 0 and float(out) == pytest.approx(2 / np.pi, rel=1e-14)
    code, out, _ = run(capsys, "beta-cdf", "--a", 0.5, "--b", 0.5, "--x", (2 - 2**0.5) / 4)
    assert code == 0 and float(out) == pytest.approx(0.25, abs=1e-9)


def test_gue_writes_one_value_per_line(tmp_path, capsys):
    path = tmp_path / "lam.csv"
    code, _, _ = run(capsys, "gue", "--m", 3, "--count", 50, "--seed", 1, "--out", path)
    lines = path.read_text().splitlines()
    assert code == 0 and lines[0] == "lambda_max" and len(lines) == 51
    float(lines[1])


def test_dump_paths(tmp_path, capsys):
    path = tmp_path / "paths.csv"
    code, _, _ = run(capsys, "dump-paths", "--m", 2, "--n", 8, "--seed", 3, "--out", path)
    rows = list(csv.reader(path.open()))
    assert code == 0 and rows[0] == ["t", "B1", "B2"] and len(rows) == 10
    assert rows[1] == ["0", "0", "0"]


def test_verify_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(capsys, "verify", "--m", 2, "--n-grid", 1024, "--replicas", 1000, "--seed", 4, "--out", out)
    assert code in (0, 1)
    assert ("FAIL" in stdout) == (code == 1)
    for name in ("thetas.csv", "gaps.csv", "d_values.csv", "reports.json", "manifest.json"):
        assert (out / name).exists()
    rows = list(csv.reader((out / "thetas.csv").open()))
    assert rows[0] == ["replica", "theta_1"] and len(rows) == 1001
    gaps = list(csv.reader((out / "gaps.csv").open()))
    assert gaps[0] == ["replica", "gap_1", "gap_2"]
    reports = json.loads((out / "reports.json").read_text())
    assert all(set(r) == {"name", "statistic", "critical_value", "p_value", "sample_size", "passed"} for r in reports)
    assert (code == 0) == all(r["passed"] for r in reports)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "verify" and manifest["master_seed"] == 4
    assert manifest["config"]["n_grid"] == 1024


def test_verify_is_reproducible(tmp_path, capsys):
    argv = ["verify", "--m", 3, "--n-grid", 256, "--replicas", 1000, "--seed", 9]
    run(capsys, *argv, "--out", tmp_path / "a")
    run(capsys, *argv, "--out", tmp_path / "b", "--workers", 2)
    for name in ("thetas.csv", "gaps.csv", "d_values.csv", "reports.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_floats_round_trip(tmp_path, capsys):
    run(capsys, "verify", "--m", 2, "--n-grid", 128, "--replicas", 1000, "--seed", 1, "--out", tmp_path)
    rows = list(csv.reader((tmp_path / "d_values.csv").open()))[1:]
    for _, text in rows[:50]:
        assert repr(float(text)) == repr(float(format(float(text), ".17g")))
        assert len(text.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 17


def test_verify_exit_code_on_failure(tmp_path, capsys, monkeypatch):
    failing = [TestReport("forced", 2.0, 1.0, 0.0, 10, False)]
    monkeypatch.setattr(cli, "verification_reports", lambda *a, **k: failing)
    code, out, _ = run(capsys, "verify", "--m", 2, "--n-grid", 64, "--replicas", 1000, "--out", tmp_path)
    assert code == 1 and "FAIL forced" in out
    assert json.loads((tmp_path / "reports.json").read_text())[0]["passed"] is False


def test_out_dir_from_environment(tmp_path, capsys, monkeypatch):
    env_dir = tmp_path / "env"
    flag_dir = tmp_path / "flag"
    monkeypatch.setenv(cli.OUT_ENV, str(env_dir))
    run(capsys, "joint", "--m", 2, "--n-grid", 64, "--replicas", 5)
    assert (env_dir / "joint.csv").exists()
    run(capsys, "joint", "--m", 2, "--n-grid", 64, "--replicas", 5, "--out", flag_dir)
    assert (flag_dir / "joint.csv").exists()


def test_joint_csv(tmp_path, capsys):
    code, _, _ = run(capsys, "joint", "--m", 3, "--n-grid", 64, "--replicas", 7, "--out", tmp_path)
    rows = list(csv.reader((tmp_path / "joint.csv").open()))
    assert code == 0
    assert rows[0] == ["replica", "theta_1", "theta_2", "d_value", "terminal_1", "terminal_2", "terminal_3"]
    assert len(rows) == 8


def test_empirical_table(tmp_path, capsys):
    code, _, _ = run(capsys, "empirical", "--m", 3, "--n-grid", 256, "--samples", 100, "--grids", 40,
                     "--seed", 2, "--out", tmp_path)
    rows = list(csv.DictReader((tmp_path / "dn_table.csv").open()))
    assert [int(r["sample_count"]) for r in rows] == [1, 10, 100]
    checks = json.loads((tmp_path / "checks.json").read_text())
    assert checks["d_n_m_above_d_m"] == 0
    assert code == (0 if checks["mean_gap_strictly_decreasing"] else 1)


def test_fresh_seed_is_recorded(tmp_path, capsys):
    run(capsys, "joint", "--m", 2, "--n-grid", 64, "--replicas", 3, "--fresh-seed", "--out", tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert 0 <= manifest["master_seed"] < 2**64
