import json
import subprocess
import sys

from ecnondiv.certify import verify_certificate
from ecnondiv.cli import main


def test_certify_json(capsys):
    assert main(["certify", "--n", "1", "--t", "7", "--json"]) == 0
    line = capsys.readouterr().out.strip()
    payload = json.loads(line)
    assert payload["verdict"] == "non-divisible" and payload["branch"] == "modular-witness"
    assert verify_certificate(line)


def test_certify_text(capsys):
    assert main(["certify", "--n", "1", "--t", "5"]) == 0
    assert "verdict: counterexample" in capsys.readouterr().out


def test_sweep(tmp_path, capsys):
    out = tmp_path / "c.jsonl"
    assert main(["sweep", "--n-min", "1", "--n-max", "1", "--t-min", "-2", "--t-max", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4
    assert json.loads(capsys.readouterr().out) == {"non-divisible": 4}


def test_periods(capsys):
    assert main(["periods", "--n", "1", "--t", "1"]) == 0
    out = capsys.readouterr().out
    assert "omega1   = 2.10831639687163" in out


def test_height(capsys):
    assert main(["height", "--n", "1", "--t", "1", "--point", "0,1"]) == 0
    out = capsys.readouterr().out
    assert "canonical height 0.16775155" in out and "lambda_2" in out


def test_height_eprime_point_mapped(capsys):
    assert main(["height", "--n", "4", "--t", "1", "--point", "0,64"]) == 0
    assert "canonical height 0.99586149" in capsys.readouterr().out


def test_height_rejects_point_off_curve(capsys):
    assert main(["height", "--n", "1", "--t", "1", "--point", "1,1"]) == 2
    assert "not on the curve" in capsys.readouterr().err


def test_tate(capsys):
    assert main(["tate", "--n", "3", "--t", "1"]) == 0
    out = capsys.readouterr().out
    assert "I4" in out and "C_E=4" in out


def test_invalid_parameters_exit_code(capsys):
    assert main(["certify", "--n", "0", "--t", "1"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ecnondiv", "certify", "--n", "1", "--t", "200", "--json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["branch"] == "height-gap"
