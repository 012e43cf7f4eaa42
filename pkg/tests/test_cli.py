import json

import numpy as np
import pytest
from click.testing import CliRunner

from cli import cli
from src.repository.runs import list_runs


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(cli, list(args), obj={})


def read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_young_eval(runner, tmp_path):
    out = tmp_path / "eval.json"
    result = run(runner, "young", "eval", "--phi", "power:2", "--t", "3", "--t", "-1", "--json", str(out))
    assert result.exit_code == 0, result.output
    report = read(out)
    assert report["command"] == "young eval"
    assert report["config"] == {"phi": "power:2"}
    assert report["result"]["value"] == [9.0, 1.0]
    assert report["result"]["derivative"] == [6.0, -2.0]


def test_young_besov(runner, tmp_path):
    out = tmp_path / "besov.json"
    result = run(runner, "young", "besov", "--phi", "power:4", "--n", "3", "--json", str(out))
    assert result.exit_code == 0, result.output
    assert read(out)["result"]["verdict"] == "ConvergentLikely"


def test_orlicz_norm(runner, tmp_path):
    data = tmp_path / "f.csv"
    data.write_text("3,1\n4,1\n", encoding="utf-8")
    out = tmp_path / "norm.json"
    result = run(runner, "orlicz", "norm", "--phi", "power:2", "--input", str(data), "--json", str(out))
    assert result.exit_code == 0, result.output
    assert read(out)["result"]["norm"] == pytest.approx(5.0, rel=1e-10)
    assert read(out)["result"]["modular"] == 25.0


def test_paper_repro(runner, tmp_path):
    out = tmp_path / "repro.json"
    result = run(runner, "paper", "repro", "besov", "--json", str(out))
    assert result.exit_code == 0, result.output
    report = read(out)
    assert report["command"] == "paper repro besov"
    assert report["result"]["verdict"] == "ConvergentLikely"


def test_bad_phi_is_usage_error(runner):
    assert run(runner, "young", "eval", "--phi", "cosh", "--t", "1").exit_code == 2
    assert run(runner, "young", "eval", "--phi", "power:0.5", "--t", "1").exit_code == 2


def test_repro_option_not_applicable(runner):
    assert run(runner, "paper", "repro", "f2", "--phi", "power:2").exit_code == 2
    assert run(runner, "paper", "repro", "nope").exit_code == 2


def test_lab_error_exit_status(runner):
    result = run(runner, "deg1", "f2", "--n", "4", "--radius", "3")
    assert result.exit_code == 1


def test_workflow(runner, tmp_path):
    space, gs = tmp_path / "path.space", tmp_path / "path.gs"
    out = tmp_path / "gen.json"
    result = run(runner, "spaces", "gen", "--kind", "path", "--n", "11", "--out", str(space), "--gs-out", str(gs),
                 "--json", str(out))
    assert result.exit_code == 0, result.output
    assert read(out)["result"] == {"n_points": 11, "diameter": 10.0, "boundary_size": 2}

    k = np.arange(11, dtype=float)
    f = tmp_path / "f.csv"
    f.write_text("\n".join(repr(x) for x in k**2) + "\n", encoding="utf-8")
    h_out, log_csv, out = tmp_path / "h.csv", tmp_path / "log.csv", tmp_path / "decompose.json"
    result = run(runner, "harmonic", "decompose", "--space", str(space), "--gen-structure", str(gs), "--f", str(f),
                 "--tol", "1e-10", "--h-out", str(h_out), "--log-csv", str(log_csv), "--json", str(out))
    assert result.exit_code == 0, result.output
    report = read(out)["result"]
    assert report["converged"]
    np.testing.assert_allclose(report["h"], 10.0 * k, atol=1e-8)
    assert report["conjugate_bound"]["lhs"] <= report["conjugate_bound"]["rhs"] * (1 + 1e-9)
    assert log_csv.read_text(encoding="utf-8").splitlines()[0] == "step,energy,gradient_sup,step_sup"
    assert len(h_out.read_text(encoding="utf-8").splitlines()) == 11

    out = tmp_path / "linear.json"
    result = run(runner, "harmonic", "solve-linear", "--gen-structure", str(gs), "--f", str(f), "--json", str(out))
    assert result.exit_code == 0, result.output
    np.testing.assert_allclose(read(out)["result"]["h"], 10.0 * k, atol=1e-10)

    out = tmp_path / "transfer.json"
    result = run(runner, "transfer", "verify", "--space", str(space), "--k", "1", "--seed", "5", "--json", str(out))
    assert result.exit_code == 0, result.output
    report = read(out)["result"]
    assert report["residual"] <= 1e-10
    assert (report["lambda"], report["eps"]) == (1.0, 0.0)

    potential = tmp_path / "f0.cochain"
    potential.write_text("".join(f"{i} {x!r}\n" for i, x in enumerate(k**2)), encoding="utf-8")
    du = tmp_path / "df.cochain"
    result = run(runner, "cochain", "d", "--space", str(space), "--in", str(potential), "--out", str(du))
    assert result.exit_code == 0, result.output

    out = tmp_path / "dist.json"
    result = run(runner, "deg1", "dist", "--space", str(space), "--in", str(du), "--json", str(out))
    assert result.exit_code == 0, result.output
    report = read(out)["result"]
    assert report["is_cocycle"]
    assert report["dist"] <= 1e-8


def test_record(runner, tmp_path, monkeypatch, session_factory):
    monkeypatch.setattr("src.database.connect.SessionLocal", session_factory)
    out = tmp_path / "eval.json"
    result = run(runner, "--record", "young", "eval", "--t", "2", "--json", str(out))
    assert result.exit_code == 0, result.output
    db = session_factory()
    try:
        runs = list_runs(db, command="young eval")
        assert len(runs) == 1
        assert json.loads(runs[0].report) == read(out)
        assert json.loads(runs[0].config) == {"phi": "power:2"}
    finally:
        db.close()
