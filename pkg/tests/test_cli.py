import json
import subprocess
import sys

import pytest

from aqss.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    report = json.loads(capsys.readouterr().out)
    assert report["exit_code"] == code
    return code, report


class TestAnalyze:
    def test_lambda_two(self, capsys):
        code, rep = run(capsys, "analyze", "{ABC,BD,EFG}")
        assert code == 0 and rep["outputs"]["lambda"] == 2

    def test_no_cloning(self, capsys):
        code, rep = run(capsys, "analyze", "{ABC,ADE,BDF}")
        assert code == 0
        assert rep["outputs"]["no_cloning"] is True and rep["outputs"]["lambda"] == 1

    def test_empty_is_input_error(self, capsys):
        code, rep = run(capsys, "analyze", "{}")
        assert code == 2 and "error" in rep["outputs"]

    def test_parse_error_position(self, capsys):
        code, rep = run(capsys, "analyze", "{AB,,C")
        assert code == 2 and rep["outputs"]["error"]["position"] is not None


class TestShareReconstruct:
    def test_authorized(self, capsys):
        code, rep = run(capsys, "reconstruct", "{AB,CD}", "--coalition", "A,B,dealer")
        assert code == 0 and rep["outputs"]["fidelity"] == pytest.approx(1.0, abs=1e-9)

    def test_unauthorized_refused_with_leakage(self, capsys):
        code, rep = run(capsys, "reconstruct", "{AB,CD}", "--coalition", "A,C")
        assert code == 1
        assert rep["outputs"]["leakage"]["trace_distance"] < 1e-9

    def test_encrypted(self, capsys):
        code, rep = run(capsys, "reconstruct", "{AB,CD}", "--coalition", "C,D", "--encrypted")
        assert code == 0 and rep["outputs"]["fidelity"] == pytest.approx(1.0, abs=1e-12)
        code, rep = run(capsys, "reconstruct", "{AB,CD}", "--coalition", "A,C", "--encrypted")
        assert code == 1

    def test_share_manifest(self, capsys):
        code, rep = run(capsys, "share", "{AB,CD}", "--secret", "[0.6, 0.8]")
        assert code == 0 and rep["outputs"]["allocation"]["q"] == 3

    def test_bad_secret(self, capsys):
        code, _ = run(capsys, "share", "{AB,CD}", "--secret", "[1, 1]")
        assert code == 2

    def test_strict_refusal_is_input_error(self, capsys):
        code, rep = run(capsys, "plan", "{AB,BC,ACD}")
        assert code == 2
        code, rep = run(capsys, "plan", "{AB,BC,ACD}", "--mode", "dealer-assisted")
        assert code == 0


class TestLeakage:
    def test_unauthorized(self, capsys):
        code, rep = run(capsys, "leakage", "{AB,CD}", "--coalition", "dealer")
        assert code == 0 and rep["outputs"]["leakage"]["ok"]

    def test_authorized_refused(self, capsys):
        code, _ = run(capsys, "leakage", "{AB,CD}", "--coalition", "A,B,C,D")
        assert code == 1


class TestQkd:
    def test_noiseless(self, capsys):
        code, rep = run(capsys, "qkd", "--n", "4", "--split", "2", "--rounds", "32",
                        "--noise", "0", "--seed", "7")
        s = rep["outputs"]["summary"]
        assert code == 0 and s["agreed"] and s["delta"] == 0

    def test_eve(self, capsys):
        code, rep = run(capsys, "qkd", "--eve", "edge=1", "--seed", "7")
        assert code == 1 and rep["outputs"]["summary"]["abort_step"] == "1"

    def test_invalid_config(self, capsys):
        assert run(capsys, "qkd", "--n", "1")[0] == 2
        assert run(capsys, "qkd", "--eve", "edge=x")[0] == 2

    def test_trials(self, capsys):
        code, rep = run(capsys, "qkd", "--n", "3", "--rounds", "14", "--trials", "3",
                        "--check-sample", "64")
        assert code == 0 and rep["outputs"]["agreed_rate"] == 1.0


class TestOracle:
    def test_unknown(self, capsys):
        assert run(capsys, "oracle", "bogus")[0] == 2

    def test_p_formula(self, capsys):
        code, rep = run(capsys, "oracle", "p_formula")
        assert code == 0 and rep["outputs"]["agree"]


@pytest.mark.parametrize("argv", [
    ["qkd", "--seed", "11", "--noise", "0.03"],
    ["reconstruct", "{AB,CD}", "--coalition", "A,C", "--seed", "4"],
    ["share", "{AB,CD}", "--encrypted", "--seed", "5"],
])
def test_outputs_byte_identical(capsys, argv):
    main(argv)
    first = json.loads(capsys.readouterr().out)
    main(argv)
    second = json.loads(capsys.readouterr().out)
    dump = lambda r: json.dumps(r["outputs"], sort_keys=True)
    assert dump(first) == dump(second)
    assert first["inputs_digest"] == second["inputs_digest"]


def test_report_fields(capsys):
    _, rep = run(capsys, "plan", "{AB,CD}", "--pretty")
    assert set(rep) == {"command", "seed", "inputs", "inputs_digest", "outputs", "timing",
                        "exit_code"}


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "aqss", "analyze", "{AB,CD}"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["outputs"]["lambda"] == 2
