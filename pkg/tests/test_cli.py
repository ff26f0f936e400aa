import json
import os

import pytest

from floqres.cli import (EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main)


def _run(tmp_path, *argv):
    code = main(list(argv) + ["--out", str(tmp_path)])
    manifest = tmp_path / "manifest.json"
    payload = json.loads(manifest.read_text()) if manifest.exists() else None
    return code, payload


def test_basis_1d(tmp_path, capsys):
    code, man = _run(tmp_path, "basis", "--dim", "1", "--r", "4")
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "N=192" in out
    assert man["subcommand"] == "basis"


def test_basis_2d(tmp_path, capsys):
    code, _ = _run(tmp_path, "basis", "--dim", "2", "--rows", "2",
                   "--cols", "2")
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "N=228" in out and "classes=10" in out


def test_gap_artifact_and_manifest(tmp_path):
    code, man = _run(tmp_path, "gap", "--model", "kicked-ising",
                     "--tau", "1.0", "--r", "4")
    assert code == EXIT_OK
    assert "gap.json" in man["artifacts"]
    payload = json.loads((tmp_path / "gap.json").read_text())
    assert payload["gap"] > 0
    assert payload["T"] == pytest.approx(1.0 / payload["gap"])
    assert man["seeds"]["arnoldi"] == 7


def test_validation_error_exit_code(tmp_path):
    code, man = _run(tmp_path, "gap", "--model", "kicked-ising",
                     "--tau", "1.0", "--r", "-3")
    assert code == EXIT_VALIDATION
    assert man["error"]["type"] == "validation"


def test_unknown_model_rejected(tmp_path):
    code = main(["gap", "--model", "not-a-model", "--tau", "1.0",
                 "--r", "4", "--out", str(tmp_path)])
    assert code == EXIT_VALIDATION


def test_manifest_written_on_error(tmp_path):
    code, man = _run(tmp_path, "spectrum", "--model", "kicked-ising",
                     "--tau", "1.0", "--r", "9")  # above dense cap
    assert code == EXIT_VALIDATION
    assert man is not None
    assert "error" in man


def test_tauscan_csv_deterministic(tmp_path):
    args = ("tauscan", "--model", "kicked-ising", "--taus", "0.8,2.9",
            "--r", "3")
    code, man = _run(tmp_path, *args)
    assert code == EXIT_OK
    csv1 = (tmp_path / "tauscan.csv").read_bytes()
    header = csv1.decode().splitlines()[0]
    assert header == "tau,re_lambda1,im_lambda1,gap,T"
    code, _ = _run(tmp_path, *args)
    assert code == EXIT_OK
    assert (tmp_path / "tauscan.csv").read_bytes() == csv1


def test_kscan_csv(tmp_path):
    code, man = _run(tmp_path, "kscan", "--model", "kicked-ising",
                     "--tau", "2.9", "--ks", "0.0,0.5,1.0", "--r", "3")
    assert code == EXIT_OK
    lines = (tmp_path / "kscan.csv").read_text().splitlines()
    assert lines[0].startswith("k,")
    assert len(lines) == 4


def test_diffusion_point(tmp_path):
    code, man = _run(tmp_path, "diffusion", "--model", "kicked-ising",
                     "--tau", "2.9", "--r", "3", "--k", "0.1")
    assert code == EXIT_OK
    payload = json.loads((tmp_path / "diffusion.json").read_text())
    assert payload["D_step"] > 0


def test_correlate_csv(tmp_path):
    code, man = _run(tmp_path, "correlate", "--model", "kicked-ising",
                     "--tau", "1.0", "--L", "8", "--tmax", "3")
    assert code == EXIT_OK
    lines = (tmp_path / "correlate.csv").read_text().splitlines()
    assert lines[0] == "t,C,C_err"
    assert len(lines) == 5


def test_dtc_trajectory(tmp_path):
    code, man = _run(tmp_path, "dtc", "--model", "kicked-ising",
                     "--tau", "2.4", "--L", "8", "--tmax", "4")
    assert code == EXIT_OK
    lines = (tmp_path / "dtc.csv").read_text().splitlines()
    assert lines[0].startswith("t,z")
    first = float(lines[1].split(",")[1])
    assert first == pytest.approx(-1.0)


def test_bch_outputs(tmp_path):
    code, man = _run(tmp_path, "bch", "--model", "kicked-ising",
                     "--orders", "4", "--tau-order", "4")
    assert code == EXIT_OK
    assert "bch_norms.csv" in man["artifacts"]
    payload = json.loads((tmp_path / "bch.json").read_text())
    assert "9/16" in json.dumps(payload)


def test_check_suite(tmp_path, capsys):
    code, man = _run(tmp_path, "check")
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "ok" in out.lower() or "pass" in out.lower()


def test_out_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("FLOQRES_OUT", str(tmp_path))
    code = main(["basis", "--dim", "1", "--r", "3"])
    assert code == EXIT_OK
    assert (tmp_path / "manifest.json").exists()
