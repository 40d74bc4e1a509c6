import json
import subprocess
import sys
from pathlib import Path

import pytest

from ptel.cli import run
from ptel.model import model_from_dict, validate
from ptel.proof import check_proof, proof_from_json

DATA = Path(__file__).resolve().parent.parent / "data"
MODEL = str(DATA / "two_runs.json")


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv, code, out", [
    (["eval", "--model", MODEL, "--run", "0", "--time", "0", "--formula", "Z false"], 0, "true\n"),
    (["eval", "--model", MODEL, "--run", "0", "--time", "1", "--formula", "Z false"], 1, "false\n"),
    (["eval", "--model", MODEL, "--run", "0", "--time", "3", "--formula", "K[a1] ~q"], 0, "true\n"),
    (["eval", "--model", MODEL, "--run", "1", "--time", "9", "--formula", "K[a1] false"], 0, "true\n"),
    (["valid", "--model", MODEL, "--formula", "Pr>=1/3 p"], 0, "valid\n"),
    (["valid", "--model", MODEL, "--formula", "Pr=2/3 p"], 1, "invalid: fails at run 0 time 0\n"),
    (["consequence", "--model", MODEL, "--theory", str(DATA / "theory.txt"), "--formula", "p"],
     0, "consequence holds\n"),
    (["axiom-match", "--formula", "~X p <-> X ~p"], 0, "AXNot\n"),
    (["axiom-match", "--formula", "p -> (q -> p)"], 0, "Prop\n"),
    (["axiom-match", "--formula", "Pr>=0 (p U q)"], 0, "AGP1\n"),
    (["axiom-match", "--formula", "p"], 1, "no axiom\n"),
    (["expand", "--formula", "F p"], 0, "~(p & ~p) U p\n"),
    (["--agents", "a1,a2", "expand", "--formula", "E p"], 0, "K[a1] p & K[a2] p\n"),
    (["rank", "--formula", "C K[a1] p"], 0, "omega + 1\n"),
    (["rank", "--formula", "X X p"], 0, "2\n"),
    (["rank", "--formula", "F p"], 0, "4\n"),
    (["knested", "build", "--premise", "b0", "--premise", "b1", "--op", "K[a1]",
      "--core", "alpha"], 0, "b1 -> K[a1](b0 -> alpha)\n"),
    (["knested", "match", "--premise", "b0", "--premise", "b1", "--op", "K[a1]",
      "--formula", "b1 -> K[a1](b0 -> alpha)"], 0, "alpha\n"),
    (["knested", "match", "--premise", "b0", "--formula", "alpha"], 1, "no match\n"),
    (["check-proof", "--proof", str(DATA / "example1.proof.json"), "--bound", "100"],
     0, "VerifiedBounded(100)\n"),
    (["check-proof", "--proof", str(DATA / "example1.proof.json"), "--bound", "7"],
     0, "VerifiedBounded(7)\n"),
    (["check-model", "--model", MODEL], 0, "ok\n"),
])
def test_golden_stdout(capsys, argv, code, out):
    got_code, got_out, _ = call(capsys, *argv)
    assert (got_code, got_out) == (code, out)


def test_k4_display(capsys):
    argv = ["--agents", "a1,a2,a3", "knested", "build"]
    for i in range(5):
        argv += ["--premise", f"b{i}"]
    for op in ("Z", "K[a1]", "X", "K[a3]"):
        argv += ["--op", op]
    code, out, _ = call(capsys, *argv, "--core", "alpha")
    assert code == 0
    assert out == "b4 -> K[a3](b3 -> X(b2 -> K[a1](b1 -> Z(b0 -> alpha))))\n"


def test_check_model_violation_listing(capsys):
    code, out, _ = call(capsys, "check-model", "--model", str(DATA / "bad_weights.json"))
    assert code == 3
    assert "world (0, 0) run measure: measure not normalized (sum 2/3)" in out.splitlines()


def test_invalid_model_on_eval(capsys):
    code, out, err = call(capsys, "eval", "--model", str(DATA / "bad_weights.json"),
                          "--run", "0", "--time", "0", "--formula", "p")
    assert code == 3 and out == "" and "measure not normalized" in err


def test_check_proof_rejection(capsys, tmp_path):
    doc = json.loads((DATA / "example1.proof.json").read_text())
    doc["steps"][-1]["formula"] = "p"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, _ = call(capsys, "check-proof", "--proof", str(path))
    assert code == 3 and out.startswith("Rejected(")


def test_check_proof_extra_theory(capsys, tmp_path):
    proof = {"agents": ["a1"], "theory": [], "steps": [{"id": "h", "kind": "hyp", "formula": "~q"}]}
    path = tmp_path / "h.json"
    path.write_text(json.dumps(proof))
    code, out, _ = call(capsys, "check-proof", "--proof", str(path))
    assert code == 3 and "hypothesis not in the theory" in out
    code, out, _ = call(capsys, "check-proof", "--proof", str(path),
                        "--theory", str(DATA / "theory.txt"))
    assert (code, out) == (0, "Verified\n")


def test_usage_and_io_errors(capsys):
    assert call(capsys, "eval", "--model", "nope.json", "--run", "0", "--time", "0",
                "--formula", "p")[0] == 2
    code, _, err = call(capsys, "expand", "--formula", "p &")
    assert code == 2 and "syntax error" in err
    assert call(capsys, "bogus")[0] == 2
    assert call(capsys, "gen", "model", "--runs", "3", "1")[0] == 2
    assert call(capsys, "fixtures", "dump", "nope")[0] == 2


def test_falsify(capsys, tmp_path):
    code, out, _ = call(capsys, "falsify", "--formula", "K[a1] p -> p", "--seed", "1",
                        "--out", str(tmp_path / "cm.json"))
    assert code == 1 and out.startswith("countermodel found after ")
    model = model_from_dict(json.loads((tmp_path / "cm.json").read_text()))
    assert validate(model) == []
    code, out, _ = call(capsys, "falsify", "--theory", str(DATA / "theory.txt"),
                        "--formula", "p", "--budget", "30")
    assert code == 0 and "not a validity proof" in out


def test_gen_is_deterministic(capsys):
    a = call(capsys, "gen", "model", "--seed", "3", "--runs", "2", "2")
    b = call(capsys, "gen", "model", "--seed", "3", "--runs", "2", "2")
    assert a == b and a[0] == 0
    assert a[1] == (DATA / "model.json").read_text()
    code, out, _ = call(capsys, "gen", "formula", "--seed", "9", "--depth", "3", "3")
    assert code == 0 and out.strip()


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("PTEL_SEED", "3")
    env = call(capsys, "gen", "model", "--runs", "2", "2")
    assert env[1] == (DATA / "model.json").read_text()
    monkeypatch.setenv("PTEL_SEED", "x")
    assert call(capsys, "gen", "model")[0] == 2


def test_soundness_command(capsys):
    code, out, _ = call(capsys, "soundness", "--trials", "2", "--instances", "1",
                        "--rule-trials", "3", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["trials"]["AGPZ"] == 2
    code, out, _ = call(capsys, "soundness", "--trials", "20", "--instances", "3",
                        "--rule-trials", "0", "--mutate", "AKR")
    assert code == 1 and "AKR:" in out


def test_fixtures_commands(capsys):
    code, out, _ = call(capsys, "fixtures", "run", "--max-k", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)
    code, out, _ = call(capsys, "fixtures", "list")
    assert "example1" in out.split()
    code, out, _ = call(capsys, "fixtures", "dump", "example1")
    assert out == (DATA / "example1.proof.json").read_text()
    assert str(check_proof(proof_from_json(json.loads(out)))) == "VerifiedBounded(100)"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ptel.cli", "eval", "--model", MODEL,
                           "--run", "0", "--time", "0", "--formula", "Z false"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "true\n"
