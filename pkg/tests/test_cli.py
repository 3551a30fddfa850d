import json

import pytest

from varbewley.cli import main
from varbewley.report import EXIT_CLEAN, EXIT_CONDITION, EXIT_CONVERSE, EXIT_INVALID, resolve_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", "example1.json")
    assert code == 0 and out.startswith("ok")


def test_validate_min_zero(tmp_path, capsys):
    bad = {"states": ["a", "b"], "outcome_dim": 1,
           "agents": [{"utility": {"gradient": [1]}, "perception": {"pieces": [{"g": [1, 1], "h": 0}]}},
                      {"utility": {"gradient": [1]}}],
           "social": {"utility": {"gradient": [1]}}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run(capsys, "validate", str(path))
    assert code == 1
    assert "min c = 0 violated (agent 1, LP minimum 1.0)" in err


def test_validate_malformed(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    code, _, err = run(capsys, "validate", str(path))
    assert code == 1 and "malformed JSON" in err


def test_fixture_env(tmp_path, monkeypatch, capsys):
    (tmp_path / "mine.json").write_text(resolve_path("dictator.json").read_text())
    monkeypatch.setenv("VARBEWLEY_FIXTURES", str(tmp_path))
    assert run(capsys, "validate", "mine.json")[0] == 0


def test_audit_example1(capsys):
    code, out, _ = run(capsys, "audit", "example1.json", "--seed", "7", "--samples", "2000")
    rep = json.loads(out)
    assert code == EXIT_CONVERSE
    assert rep["format_version"] == 1
    assert rep["condition"]["satisfied"] and rep["converse_failure"]
    assert "converse failure: condition holds yet Pareto fails" in rep["summary"]
    assert "u0(f(s1)) + c0(0, 1) = 3 < 4 = u0(g(s1))" in rep["summary"]
    assert rep["seeds"]["pareto_audit"] == 7


def test_audit_flatzero(capsys):
    code, out, _ = run(capsys, "audit", "flatzero.json", "--samples", "1000")
    rep = json.loads(out)
    assert code == EXIT_CONDITION
    w = rep["witness"]
    assert w["violating_prior"] == pytest.approx([0, 1])
    assert w["agent_margins"] == pytest.approx([0, 0], abs=1e-9)
    assert w["social_margin"] == pytest.approx(-1, abs=1e-9)


def test_audit_dictator_clean(capsys):
    code, out, _ = run(capsys, "audit", "dictator.json", "--samples", "2000")
    rep = json.loads(out)
    assert code == EXIT_CLEAN
    assert rep["checks"]["corollary1"]["holds"]
    assert rep["pareto_audit"]["violations"] == []


def test_audit_invalid_profile(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"states": ["a"], "outcome_dim": 1, "agents": [], "social": {}}))
    assert run(capsys, "audit", str(path))[0] == EXIT_INVALID


def test_audit_text_and_output(tmp_path, capsys):
    out_file = tmp_path / "r.json"
    code, out, _ = run(capsys, "audit", "bewley_disjoint.json", "--samples", "500",
                       "-o", str(out_file))
    assert code == EXIT_CONDITION and out == ""
    assert json.loads(out_file.read_text())["witness"]["separation"]["provenance"] == "facet"
    code, out, _ = run(capsys, "audit", "bewley_disjoint.json", "--samples", "500", "--text")
    assert out.startswith("decomposition:")


def test_audit_tolerance_flag(capsys):
    _, out, _ = run(capsys, "audit", "dictator.json", "--samples", "200", "--tolerance", "1e-6")
    assert json.loads(out)["tolerances"]["eps_dec"] == 1e-6


def test_dominance_social(capsys):
    code, out, _ = run(capsys, "dominance", "example1.json", "--agent", "0",
                       "--acts", "example1_acts.json")
    pair = json.loads(out)["pairs"][0]
    assert code == 0
    assert pair["relation"] == "strictly_dispreferred"
    assert pair["f_over_g"]["margin"] == pytest.approx(-1)
    assert pair["f_over_g"]["argmin_prior"] == pytest.approx([0, 1])


def test_dominance_agent_text(capsys):
    code, out, _ = run(capsys, "dominance", "example1.json", "--agent", "1", "--text")
    assert code == 0 and "indifferent" in out


def test_dominance_errors(tmp_path, capsys):
    assert run(capsys, "dominance", "example1.json", "--agent", "5")[0] == EXIT_INVALID
    acts = tmp_path / "a.json"
    acts.write_text(json.dumps({"acts": [{"outcomes": [[0, 0]]}]}))
    code, _, err = run(capsys, "dominance", "example1.json", "--agent", "0", "--acts", str(acts))
    assert code == EXIT_INVALID and "malformed acts" in err
