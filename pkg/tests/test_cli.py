"""Command-line interface behavior and exit codes."""

from __future__ import annotations

import csv
import io
import json

import pytest
from click.testing import CliRunner

from qrlab import cli


def run(*args):
    return CliRunner().invoke(cli.cli, list(args))


def test_eval_quadratic_residues():
    res = run("eval", "--field", "13", "--formula",
              "exists y. x = y*y & !(x = 0)")
    assert res.exit_code == 0
    assert "size: 6 of 13" in res.output
    assert "1,3,4,9,10,12" in res.output
    assert "complexity 14" in res.output


def test_eval_json():
    res = run("eval", "--field", "13", "--formula", "x = 0", "--json")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["size"] == 1 and doc["q"] == 13 and doc["complexity"] == 3


def test_eval_with_params():
    res = run("eval", "--field", "13", "--formula", "x = a*a",
              "--param", "a=5", "--json")
    doc = json.loads(res.output)
    assert doc["size"] == 1


def test_report_artin_schreier(tmp_path):
    out = tmp_path / "report.json"
    res = run("report", "--group", "add:2^2", "--set-formula",
              "exists y. x = y*y - y", "--subgroup-max-index", "2",
              "--out", str(out))
    assert res.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1
    assert doc["eps1"] == {"num": 1, "den": 16}
    assert doc["h_index"] == 2
    assert doc["h_members"] == [0, 2]
    assert doc["max_coset_eps1"] == {"num": 0, "den": 1}
    assert doc["fourier_eps"]["value"] < 1e-12
    assert doc["modulus"] == [1, 1, 1]
    assert doc["seed"] == 0 and doc["order_hash"]


def test_sweep_csv(tmp_path):
    out = tmp_path / "paley.csv"
    res = run("sweep", "--family", "paley", "--qs", "5,13,17,29",
              "--out", str(out))
    assert res.exit_code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["q"] for r in rows] == ["5", "13", "17", "29"]
    assert rows[0]["delta_num"] == "2" and rows[0]["delta_den"] == "5"
    assert set(rows[0]) == {"q", "delta_num", "delta_den", "eps1_num",
                            "eps1_den", "eps3", "fourier_eps", "h_index",
                            "max_coset_eps1_num", "max_coset_eps1_den"}
    assert "slope(log eps1 vs log q)" in res.output


def test_sweep_json(tmp_path):
    out = tmp_path / "paley.json"
    res = run("sweep", "--family", "paley", "--qs", "5,13",
              "--json-out", str(out))
    assert res.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1 and len(doc["rows"]) == 2


def test_verify_suite_cor25():
    res = run("verify", "--suite", "cor25")
    assert res.exit_code == 0
    assert "PASS" in res.output


def test_usage_error_exit_code(monkeypatch, capsys):
    monkeypatch.setattr("sys.argv", ["qr", "eval", "--field", "junk",
                                     "--formula", "x = 0"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    assert exc.value.code == 1


def test_missing_option_exit_code(monkeypatch):
    monkeypatch.setattr("sys.argv", ["qr", "eval", "--field", "13"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    assert exc.value.code == 1


def test_bad_qs_exit_code(monkeypatch):
    monkeypatch.setattr("sys.argv", ["qr", "sweep", "--family", "paley",
                                     "--qs", "5,banana"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    assert exc.value.code == 1


def test_inadmissible_q_exit_code(monkeypatch):
    monkeypatch.setattr("sys.argv", ["qr", "sweep", "--family", "paley",
                                     "--qs", "8"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    assert exc.value.code == 1


def test_help_exits_zero():
    res = run("--help")
    assert res.exit_code == 0
    assert "Commands:" in res.output
