import json
import re
import subprocess
import sys

import pytest

from setrisk import cli

TOY_EXPECTED = [
    (["risk", "fixture:toy", "--measure", "scenario"], "R(X) = {u : u1 + 2u2 >= 16, 2u1 + u2 >= 14}"),
    (["risk", "fixture:toy", "--measure", "worst-case"], "R(X) = {u : u1 + u2 >= 10}"),
    (["scalarize", "fixture:toy", "--measure", "scenario", "--v", "1,1"], "scalarization v=(1, 1): 10"),
    (["dual", "fixture:toy"], "dual R(X) = {u : u1 + u2 >= 10}"),
    (["var", "fixture:toy", "--alpha", "0"], "R(X) = {u : u1 + 2u2 >= 16, 2u1 + u2 >= 14}"),
    (["avar", "fixture:illiq"], "R(X) = {u : 8u2 >= 1, 2u1 >= 3}"),
    (["superhedge", "fixture:bin2", "--dual"], "superhedging prices = {u : 3u1 + 3u2 >= 1}"),
    (["superhedge", "fixture:toy"], "superhedging prices = {u : u1 + u2 >= 1}"),
    (["check", "fixture:toy"], "equal"),
    (["validate", "fixture:toy"], "valid"),
]


def _run(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv, line", TOY_EXPECTED)
def test_commands_on_fixtures(capsys, argv, line):
    code, out, err = _run(capsys, argv)
    assert code == 0, err
    assert line in out.splitlines()


def test_var_union_output(capsys):
    code, out, _ = _run(capsys, ["var", "fixture:toy"])
    assert code == 0
    risk = next(l for l in out.splitlines() if l.startswith("R(X)"))
    assert risk.count(" U ") == 2


def test_check_axioms(capsys):
    code, out, _ = _run(capsys, ["check", "fixture:toy", "--axioms"])
    assert code == 0
    assert "kI_compatible: True" in out and "subadditivity_failures: 0" in out


def test_refusals_exit_3(capsys):
    code, _, err = _run(capsys, ["avar", "fixture:toy", "--lambda", "1,1"])
    assert code == 3 and err.startswith("refused:")
    code, _, err = _run(capsys, ["dual", "fixture:toy", "--measure", "var", "--alpha", "1/3"])
    assert code == 3
    code, _, err = _run(capsys, ["check", "fixture:toy", "--measure", "scenario"])
    assert code == 3 and "kI" in err


def test_invalid_inputs_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": "1",')
    code, _, err = _run(capsys, ["risk", str(bad)])
    assert code == 2 and err.startswith("parse error:")
    invalid = tmp_path / "invalid.json"
    invalid.write_text(
        json.dumps(
            {
                "version": "1",
                "market": {
                    "probabilities": ["1"],
                    "initial_cone": {"inequalities": [], "equalities": [["0", "0"]]},
                    "terminal_cones": [{"inequalities": [["1", "0"], ["0", "1"]]}],
                },
            }
        )
    )
    code, out, _ = _run(capsys, ["validate", str(invalid)])
    assert code == 2 and "invalid: K_I: K ≠ R^d violated" in out
    code, _, err = _run(capsys, ["risk", str(invalid)])
    assert code == 2 and "K ≠ R^d violated" in err
    code, _, err = _run(capsys, ["avar", "fixture:toy"])
    assert code == 2
    code, _, err = _run(capsys, ["risk", "fixture:toy", "--claim", "nope"])
    assert code == 2


def test_missing_file_exit_1(capsys, tmp_path):
    code, _, err = _run(capsys, ["risk", str(tmp_path / "missing.json")])
    assert code == 1
    code, _, _ = _run(capsys, ["risk", "fixture:nothing"])
    assert code == 1


def test_json_output_is_exact_and_byte_identical(capsys, tmp_path):
    argv = ["risk", "fixture:toy", "--measure", "worst-case", "--format", "json"]
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second
    data = json.loads(first)
    assert data["scalarization"] == "10"
    assert data["risk_set"]["coordinates"][0]["hrep"]["inequalities"][0]["offset"] == "10"
    out = tmp_path / "r.json"
    assert cli.run(argv + ["--output", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == first


def test_fractions_in_output(capsys):
    code, out, _ = _run(capsys, ["dual", "fixture:toy"])
    assert "w = (1/3, 1/3)" in out
    assert not re.search(r"\d\.\d", out)


def test_verbosity_env(capsys, monkeypatch):
    monkeypatch.setenv(cli.VERBOSITY_ENV, "0")
    code, out, _ = _run(capsys, ["risk", "fixture:toy", "--measure", "worst-case"])
    assert out.splitlines() == ["X acceptable: False"]


@pytest.mark.parametrize("task", sorted(cli.EXPLAIN))
def test_explain(capsys, task):
    code, out, _ = _run(capsys, ["explain", task])
    assert code == 0 and out.strip()
    # explanations describe formulas, never numbered references
    assert not re.search(r"(?i)\b(eq(uation)?|section|theorem|lemma|proposition|example)\s*\(?\d", out)


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "setrisk.cli", "risk", "fixture:toy", "--measure", "worst-case"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "R(X) = {u : u1 + u2 >= 10}" in proc.stdout
