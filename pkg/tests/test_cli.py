from __future__ import annotations

import json

from cwb import corpus_path
from cwb.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_info(capsys):
    code, out, _ = run(capsys, "info", corpus_path("Z4"))
    assert code == 0
    assert "Z4: size 4" in out


def test_con_lists_three_congruences(capsys):
    code, out, _ = run(capsys, "con", corpus_path("Z4"))
    assert code == 0
    assert "3 congruences" in out


def test_si_exit_codes(capsys):
    code, out, _ = run(capsys, "si", corpus_path("Z2x2"))
    assert code == 1
    assert "not subdirectly irreducible" in out
    code, out, _ = run(capsys, "si", corpus_path("Z4"))
    assert code == 0
    assert "monolith" in out


def test_center_trivial(capsys):
    code, out, _ = run(capsys, "center", corpus_path("trivial"))
    assert code == 0
    assert "Partition[0]" in out


def test_hypotheses_gate(capsys):
    for name in ("Z4", "Z2x2", "Z6", "D4"):
        code, out, _ = run(capsys, "hypotheses", corpus_path(name))
        assert code == 0, name
        assert "PASS" in out
    code, out, _ = run(capsys, "hypotheses", corpus_path("S3"))
    assert code == 1
    assert "nilpotent: NO" in out


def test_factor_z6(capsys):
    code, out, _ = run(capsys, "factor", corpus_path("Z6"), "--json")
    assert code == 0
    doc = json.loads(out)
    assert sorted(doc["result"]["sizes"]) == [2, 3]
    assert doc["result"]["all_prime_power"] is True


def test_maltsev_json(capsys):
    code, out, _ = run(capsys, "maltsev", corpus_path("Z6"), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] is True
    assert doc["result"]["status"] == "found"


def test_mbound(capsys):
    code, out, _ = run(capsys, "mbound", corpus_path("Z2"), "--max-arity", "3")
    assert code == 0
    assert "M_emp = 1" in out
    assert "complete" in out


def test_decompose(capsys):
    code, out, _ = run(capsys, "decompose", corpus_path("Z4"), "mul(x1,x1)")
    assert code == 0
    assert "reconstruction verified" in out
    code, _, err = run(capsys, "decompose", corpus_path("Z4"))
    assert code == 1
    assert "requires a term" in err


def test_dpsc_pass(capsys):
    code, out, _ = run(capsys, "dpsc", corpus_path("Z4"))
    assert code == 0
    assert "dpsc PASS" in out


def test_theta(capsys):
    code, out, _ = run(capsys, "theta", corpus_path("Z4"))
    assert code == 0
    assert "semantic check on Z4: True" in out
    code, out, _ = run(capsys, "theta", corpus_path("Z2x2"))
    assert code == 1


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "dpsc", corpus_path("Z4"), "--budget", "10")
    assert code == 2
    assert "budget" in err.lower()


def test_input_errors(tmp_path, capsys):
    code, _, err = run(capsys, "info", tmp_path / "missing.json")
    assert code == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{broken", encoding="utf-8")
    code, _, err = run(capsys, "info", bad)
    assert code == 1
    assert "invalid JSON" in err
    worse = tmp_path / "worse.json"
    worse.write_text('{"name": "x", "size": 2, "operations": [{"name": "f", "arity": 1, "table": [0, 9]}]}')
    code, _, err = run(capsys, "info", worse)
    assert code == 1
    assert "out of range" in err


def test_json_reports_are_deterministic(capsys):
    _, first, _ = run(capsys, "dpsc", corpus_path("Z2"), "--json")
    _, second, _ = run(capsys, "dpsc", corpus_path("Z2"), "--json")
    assert first == second
    doc = json.loads(first)
    assert doc["config"]["budget"] == 200000
    assert doc["result"]["pass"] is True


def test_env_budget(monkeypatch, capsys):
    monkeypatch.setenv("CW_BUDGET", "10")
    code, _, err = run(capsys, "con", corpus_path("Z4"))
    assert code == 2 or code == 0  # lattice of Z4 is tiny; power not involved
    monkeypatch.setenv("CW_BUDGET", "10")
    code, _, err = run(capsys, "dpsc", corpus_path("Z4"))
    assert code == 2


def test_json_schema_shape(capsys):
    code, out, _ = run(capsys, "si", corpus_path("Z4"), "--json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"command", "input", "config", "ok", "result"}
    assert set(doc["config"]) == {
        "budget",
        "max_power",
        "max_size",
        "max_arity",
        "n_bound",
        "seed",
    }
