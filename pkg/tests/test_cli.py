import json
import math

import pytest

from trimer.cli import (
    BOGOLIUBOV_SCHEMA, MEANFIELD_SCHEMA, SWEEP_SCHEMA, main, read_csv, write_csv,
)

TAU = 2.0 * math.pi


def run(argv):
    return main(argv)


def test_sweep_roundtrip_and_determinism(tmp_path):
    out1 = str(tmp_path / "a.csv")
    out2 = str(tmp_path / "b.csv")
    args = ["sweep", "--g0-min", "0.1", "--g0-max", "0.5", "--g0-steps", "3",
            "--eta", "1", "--cutoff", "4"]
    assert run(args + ["--out", out1]) == 0
    assert run(args + ["--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()
    cols, rows = read_csv(out1, SWEEP_SCHEMA)
    assert cols[0] == "g0" and "coskewness" in cols
    assert len(rows) == 3
    assert float(rows[0][cols.index("g0")]) == 0.1
    # 17-significant-digit floats round trip exactly
    lam = float(rows[2][cols.index("lambda")])
    assert lam == 0.5 * math.sqrt(2.0)
    # sidecar captures the configuration
    side = json.loads(open(out1 + ".json").read())
    assert side["cutoff"] == 4
    assert "code_version" in side


def test_schema_rejection(tmp_path):
    path = str(tmp_path / "x.csv")
    write_csv(path, "trimer-sweep-csv v999", ["g0"], [[0.0]])
    with pytest.raises(ValueError):
        read_csv(path, SWEEP_SCHEMA)


def test_meanfield_command(tmp_path):
    out = str(tmp_path / "mf.csv")
    assert run(["meanfield", "--g0-min", "0.2", "--g0-max", "1.2",
                "--g0-steps", "6", "--eta", "1,10", "--out", out]) == 0
    cols, rows = read_csv(out, MEANFIELD_SCHEMA)
    assert len(rows) == 12
    regimes = {r[cols.index("regime")] for r in rows}
    assert "normal_only" in regimes and "superradiant_ground" in regimes


def test_bogoliubov_command(tmp_path):
    out = str(tmp_path / "bg.csv")
    assert run(["bogoliubov", "--g0-min", "0.8", "--g0-max", "1.4",
                "--g0-steps", "4", "--out", out]) == 0
    cols, rows = read_csv(out, BOGOLIUBOV_SCHEMA)
    for row in rows:
        lam = float(row[cols.index("lambda")])
        stable = int(row[cols.index("stable")])
        if stable:
            y2 = float(row[cols.index("y2")])
            py2 = float(row[cols.index("py2")])
            assert y2 * py2 == pytest.approx(1.0, abs=1e-12)
            assert lam > 1.0


def test_trajectories_command(tmp_path):
    out = str(tmp_path / "tr.csv")
    assert run(["trajectories", "--g0-min", "0.3", "--g0-steps", "1",
                "--eta", "1", "--kappa", "1.0", "--cutoff", "3",
                "--ntraj", "4", "--tmax", "2.0", "--dt", "0.01",
                "--seed", "3", "--out", out]) == 0
    cols, rows = read_csv(out, SWEEP_SCHEMA)
    assert "converged" in cols
    assert rows[0][cols.index("E0")] == "nan"
    assert float(rows[0][cols.index("n_rescaled")]) >= 0.0


def test_freqplan_command(tmp_path, capsys):
    out = str(tmp_path / "plan.json")
    assert run(["freqplan",
                "--freqs-a", f"{TAU*7.6},{TAU*11.4}",
                "--freqs-b", f"{TAU*6.2},{TAU*9.3}",
                "--freqs-c", f"{TAU*4.2},{TAU*6.3}",
                "--omega-eff", str(TAU * 0.010),
                "--coupling", str(TAU * 0.0024),
                "--out", out]) == 0
    doc = json.loads(open(out).read())
    assert doc["min_detuning"] == pytest.approx(TAU * 0.1, rel=1e-9)
    assert doc["safe"] is True
    assert "tone 1" in capsys.readouterr().out


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("g0-min = 0.2\ncutoff = 4\ng0-steps = 1\neta = 1\n")
    out1 = str(tmp_path / "c1.csv")
    assert run(["--config", str(cfg), "sweep", "--out", out1]) == 0
    _, rows = read_csv(out1, SWEEP_SCHEMA)
    assert float(rows[0][0]) == 0.2
    # explicit flag beats the config value
    out2 = str(tmp_path / "c2.csv")
    assert run(["--config", str(cfg), "sweep", "--g0-min", "0.3",
                "--out", out2]) == 0
    _, rows = read_csv(out2, SWEEP_SCHEMA)
    assert float(rows[0][0]) == 0.3


def test_error_reporting(tmp_path, capsys):
    out = str(tmp_path / "e.csv")
    # invalid physical parameter -> nonzero exit and JSON error record
    code = run(["sweep", "--omega", "-1", "--cutoff", "3", "--out", out])
    assert code == 1
    err = capsys.readouterr().err.strip()
    rec = json.loads(err.splitlines()[-1])
    assert rec["error"] == "DomainError"
    # unwritable output path
    code = run(["meanfield", "--out", str(tmp_path / "no" / "dir" / "x.csv")])
    assert code == 1


def test_bad_grid_rejected(tmp_path):
    assert run(["sweep", "--g0-steps", "0",
                "--out", str(tmp_path / "g.csv")]) == 1
