import json
import subprocess
import sys

import numpy as np
import pytest

from nmems.cli import OUTPUT_DIR_ENV, main, read_matrix, UsageError


def run_cli(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def write_matrix(path, m):
    rows = [" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in np.asarray(m, dtype=complex)]
    path.write_text("\n".join(rows) + "\n")
    return str(path)


# --- metrics ---------------------------------------------------------------------


def test_metrics_pretty_for_rho1(capsys):
    code, out, _ = run_cli(capsys, "metrics", "rho1:phi+", "--p", "0.5")
    assert code == 0
    assert "f = 0.7222" in out
    # generic M; the printed polynomial gives 0.8611 and is listed as a mismatch
    assert "M = 0.8056" in out
    assert "rho1:phi+.M" in out and "Mismatch" in out


def test_metrics_maximally_mixed_werner(capsys):
    code, out, _ = run_cli(capsys, "metrics", "werner", "--p", "0.25", "--format", "json")
    assert code == 0
    rep = json.loads(out)["report"]
    assert rep["C"] == 0
    assert rep["f"] == pytest.approx(0.5, abs=1e-12)
    assert rep["L"] == pytest.approx(1, abs=1e-12)


def test_metrics_json_round_trip_is_byte_identical(capsys):
    for sel, p in (("rho5:phi+", "0.3"), ("tau1:phi-", "0.7"), ("werner", "0.1")):
        code, out, _ = run_cli(capsys, "metrics", sel, "--p", p, "--format", "json")
        assert code == 0
        assert json.dumps(json.loads(out), indent=2) + "\n" == out


def test_metrics_csv(capsys):
    code, out, _ = run_cli(capsys, "metrics", "rho2:psi+", "--p", "0.2", "--format", "csv")
    header, row = out.strip().splitlines()
    assert header.split(",")[:3] == ["family", "bell", "param"]
    assert row.startswith("rho2,psi+,0.2000000000000000")


def test_metrics_from_matrix_file(tmp_path, capsys):
    m = np.diag([0.5, 0, 0, 0.5]).astype(complex)
    m[0, 3] = m[3, 0] = 0.5
    code, out, _ = run_cli(capsys, "metrics", "--matrix", write_matrix(tmp_path / "bell.txt", m), "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["report"]["C"] == pytest.approx(1)
    assert {c["source_eq"] for c in payload["closed_forms"]} >= {"x-state.C", "x-state.f"}


# --- error paths -------------------------------------------------------------------


def test_unknown_family_names_the_token(capsys):
    code, _, err = run_cli(capsys, "metrics", "rho9:phi+")
    assert code == 1 and "'rho9'" in err


def test_unknown_bell_state_names_the_token(capsys):
    code, _, err = run_cli(capsys, "metrics", "rho1:chi+")
    assert code == 1 and "'chi+'" in err


def test_out_of_range_parameter_names_the_token(capsys):
    code, _, err = run_cli(capsys, "metrics", "rho1:phi+", "--p", "1.5")
    assert code == 1 and "'1.5'" in err and "outside [0, 1]" in err


def test_non_numeric_parameter(capsys):
    code, _, err = run_cli(capsys, "metrics", "werner", "--p", "half")
    assert code == 1 and "'half'" in err


def test_unreadable_matrix_file(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    code, _, err = run_cli(capsys, "metrics", "--matrix", str(missing))
    assert code == 1 and "nope.txt" in err and "cannot read" in err


def test_malformed_matrix_entry(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1,0 0,0 0,0 0,0\n0,0 x,0 0,0 0,0\n0,0 0,0 0,0 0,0\n0,0 0,0 0,0 0,0\n")
    with pytest.raises(UsageError, match="row 2: bad entry 'x,0'"):
        read_matrix(path)
    path.write_text("1,0\n")
    with pytest.raises(UsageError, match="4 rows"):
        read_matrix(path)


def test_error_messages_are_distinct(tmp_path, capsys):
    errs = {
        run_cli(capsys, "metrics", "rho9")[2],
        run_cli(capsys, "metrics", "werner", "--p", "2")[2],
        run_cli(capsys, "metrics", "--matrix", str(tmp_path / "none"))[2],
    }
    assert len(errs) == 3


def test_invalid_matrix_exits_2(tmp_path, capsys):
    path = write_matrix(tmp_path / "neg.txt", np.diag([1.5, -0.5, 0, 0]))
    code, _, err = run_cli(capsys, "metrics", "--matrix", path)
    assert code == 2 and "invalid density matrix" in err
    code, _, err = run_cli(capsys, "validate", "--matrix", path)
    assert code == 2 and "psd" in err


def test_family_and_matrix_together(tmp_path, capsys):
    path = write_matrix(tmp_path / "m.txt", np.eye(4) / 4)
    code, _, err = run_cli(capsys, "metrics", "werner", "--matrix", path)
    assert code == 1 and "not both" in err


def test_missing_subcommand(capsys):
    code, _, _ = run_cli(capsys)
    assert code == 1


# --- other subcommands -------------------------------------------------------------


def test_validate_every_family(capsys):
    code, out, _ = run_cli(capsys, "validate")
    assert code == 0
    assert "x 101 points: 0 failures" in out


def test_validate_good_matrix(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "validate", "--matrix", write_matrix(tmp_path / "i.txt", np.eye(4) / 4))
    assert code == 0 and "valid density matrix" in out


def test_table1_formats(capsys):
    code, out, _ = run_cli(capsys, "table1")
    assert code == 0 and len(out.strip().splitlines()) == 12
    code, out, _ = run_cli(capsys, "table1", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0].split(",")[:3] == ["p", "rho1:phi+", "rho1:phi+_raw"]
    assert lines[6].split(",")[1] == "0.72"
    code, out, _ = run_cli(capsys, "table1", "--format", "json")
    assert json.loads(out)[5]["rho2:psi-"] == 0.67


def test_thresholds_catalogue(capsys):
    code, out, _ = run_cli(capsys, "thresholds", "--format", "json")
    assert code == 0
    status = {d["claim"]: d["status"] for d in json.loads(out)}
    assert status["rho2-psi- useful fidelity"] == "reproduced"
    assert status["rho1-phi+ bell violation"] == "mismatch"


def test_thresholds_custom(capsys):
    code, out, _ = run_cli(
        capsys, "thresholds", "werner", "--metric", "f", "--predicate", "> 2/3", "--bracket", "0.2", "0.9", "--format", "json"
    )
    assert code == 0
    assert json.loads(out)["root"] == pytest.approx(0.5, abs=1e-6)
    code, _, err = run_cli(capsys, "thresholds", "werner", "--metric", "f")
    assert code == 1 and "--bracket" in err
    code, _, err = run_cli(
        capsys, "thresholds", "rho2:psi+", "--metric", "f", "--predicate", "> 2/3", "--bracket", "0", "1"
    )
    assert code == 1 and "no sign change" in err


def test_sweep_uses_output_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run_cli(capsys, "sweep", "werner", "--step", "0.25")
    assert code == 0
    assert (tmp_path / "sweep.csv").exists() and (tmp_path / "sweep.json").exists()
    assert "5 grid points" in out


def test_sweep_bad_range(capsys):
    code, _, err = run_cli(capsys, "sweep", "werner", "--start", "0.8", "--stop", "0.2")
    assert code == 1 and "start" in err


def test_figures(tmp_path, capsys):
    out_dir = tmp_path / "new" / "figs"
    code, out, _ = run_cli(capsys, "figures", "--figure", "4", "--step", "0.1", "--out-dir", str(out_dir))
    assert code == 0
    assert (out_dir / "figure4.csv").read_text().count("\n") == 7


def test_simulate_is_deterministic_and_echoes_seed(capsys):
    args = ("simulate", "werner", "--p", "0.8", "--samples", "20000", "--seed", "7")
    code, out1, err = run_cli(capsys, *args)
    assert code == 0 and "seed 7" in err
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2
    d = json.loads(out1)
    assert d["seed"] == 7 and d["rng"] == "PCG64" and d["preRotation"] == "werner"
    assert abs(d["meanFidelity"] - 2.6 / 3) <= 3 * d["stdError"] + 1e-12


def test_simulate_rejects_bad_shards(capsys):
    code, _, err = run_cli(capsys, "simulate", "werner", "--samples", "5", "--shards", "9")
    assert code == 1 and "--shards" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nmems", "metrics", "werner", "--p", "1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "C = 1.0000" in res.stdout
