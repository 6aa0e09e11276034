import pathlib

import pytest

from trimer_plots.cli import main

DATA = pathlib.Path(__file__).parent / "data"
SWEEP = str(DATA / "sweep_small.csv")


def test_cli_renders(tmp_path):
    out = str(tmp_path / "panel.png")
    assert main([SWEEP, "--kind", "coskewness", "--out", out]) == 0
    assert pathlib.Path(out).stat().st_size > 0


def test_cli_eta_selection(tmp_path):
    out = str(tmp_path / "panel.png")
    assert main([SWEEP, "--kind", "photon_number", "--etas", "2",
                 "--out", out]) == 0
    assert main([SWEEP, "--kind", "photon_number", "--etas", "x",
                 "--out", out]) == 2


def test_cli_schema_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# not-a-schema\ng0\n0.1\n")
    code = main([str(bad), "--kind", "g2", "--out", str(tmp_path / "o.png")])
    assert code == 1
    assert "schema" in capsys.readouterr().err


def test_cli_missing_file(tmp_path, capsys):
    code = main([str(tmp_path / "nope.csv"), "--kind", "g2",
                 "--out", str(tmp_path / "o.png")])
    assert code == 1


def test_cli_unknown_kind(tmp_path):
    with pytest.raises(SystemExit):
        main([SWEEP, "--kind", "pie", "--out", str(tmp_path / "o.png")])
