import json
import subprocess
import sys

import numpy as np
import pytest

from qportrait.cli import main
from qportrait.linalg import write_matrix_file
from qportrait.sampler import Rng, random_density, random_unitary


@pytest.fixture
def files(tmp_path):
    write_matrix_file(tmp_path / "maxmixed3.json", np.eye(3) / 3)
    write_matrix_file(tmp_path / "rho.json", random_density(3, 2, Rng(1, 0)).matrix)
    write_matrix_file(tmp_path / "u.json", random_unitary(3, Rng(2, 0)).matrix)
    write_matrix_file(tmp_path / "rho4.json", random_density(4, 4, Rng(3, 0)).matrix)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entropy_of_maximally_mixed(files, capsys):
    code, out, _ = run(capsys, "entropy", "--state", files / "maxmixed3.json")
    assert code == 0
    assert "S = 1.098612" in out
    assert "I_q = 0.174416" in out
    assert "S1 = 0.636514" in out


def test_entropy_in_bits(files, capsys):
    _, out, _ = run(capsys, "entropy", "--state", files / "maxmixed3.json", "--bits")
    assert "S = 1.584963" in out and "bits" in out


def test_portrait_prints_both(files, capsys):
    code, out, _ = run(capsys, "portrait", "--state", files / "maxmixed3.json")
    assert code == 0
    assert out.count("0.666667") == 2 and out.count("0.333333") == 2


def test_portrait_with_map_file(files, capsys):
    (files / "map.json").write_text(json.dumps({"in_dim": 4, "kept": [1, 4], "assign": {"2": 1, "3": 4}}))
    code, out, _ = run(capsys, "portrait", "--state", files / "rho4.json", "--map", files / "map.json", "--padded")
    assert code == 0 and out.count("[") == 4


def test_portrait_needs_map_off_qutrits(files, capsys):
    code, _, err = run(capsys, "portrait", "--state", files / "rho4.json")
    assert code == 1 and "--map" in err


def test_tomogram_forms(files, capsys):
    code, out, _ = run(capsys, "tomogram", "--state", files / "rho.json", "--unitary", files / "u.json")
    assert code == 0
    lines = dict(l.split(" = ", 1) for l in out.strip().splitlines())
    assert lines["w"] == lines["w_spectral"]


def test_tomomin(files, capsys):
    code, out, _ = run(capsys, "tomomin", "--state", files / "rho.json", "--restarts", 3)
    assert code == 0
    lines = dict(l.split(" = ", 1) for l in out.strip().splitlines())
    assert abs(float(lines["min H(w)"]) - float(lines["S(rho)"])) < 1e-6
    assert len(json.loads(lines["argmin"])) == 6


def test_verify_writes_report(tmp_path, capsys):
    out_file = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--inequality", "eq9-information", "--trials", 1000, "--seed", 7, "--out", out_file)
    assert code == 0 and "violations=0" in out
    assert json.loads(out_file.read_text())["violations"] == 0


def test_verify_from_config_file_with_override(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"inequality": "eq2a-renyi", "order": 2.0, "trials": 10, "seed": 3}))
    out_file = tmp_path / "r.csv"
    code, _, _ = run(capsys, "verify", "--config", conf, "--alpha", 3, "--format", "csv", "--out", out_file)
    assert code == 0
    assert out_file.read_text().startswith("aggregate,value")


def test_verify_exit_code_two_on_violations(tmp_path, capsys, monkeypatch):
    from qportrait import campaign

    monkeypatch.setattr(campaign, "_evaluate", lambda c, inputs: (-1.0, False))
    code, out, _ = run(capsys, "verify", "--inequality", "eq6-subadditivity", "--trials", 3)
    assert code == 2 and "violations=3" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["verify"],
        ["verify", "--inequality", "eq2a-renyi", "--trials", "5"],
        ["verify", "--inequality", "eq2a-renyi", "--alpha", "2", "--q", "2"],
        ["verify", "--inequality", "eq6-subadditivity", "--trials", "many"],
        ["entropy"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_usage_error_code_from_subprocess():
    p = subprocess.run([sys.executable, "-m", "qportrait", "verify", "--trials", "x"], capture_output=True, text=True)
    assert p.returncode == 1 and "usage:" in p.stderr


def test_bad_state_file(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"rows": 2, "cols": 2, "re": [[1, 0], [0]]}))
    code, _, err = run(capsys, "entropy", "--state", tmp_path / "bad.json")
    assert code == 1 and "row 1" in err
    code, _, err = run(capsys, "entropy", "--state", tmp_path / "missing.json")
    assert code == 1
