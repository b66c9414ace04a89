import subprocess
import sys

import numpy as np
import pytest
from conftest import zero_mean_sine

from pfa.cli import int_list, main
from pfa.timeseries import read_csv, write_csv


@pytest.fixture
def signal_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = np.column_stack([zero_mean_sine(0.1, 300), zero_mean_sine(0.3, 300), rng.standard_normal(300)])
    x = x @ np.linalg.qr(rng.standard_normal((3, 3)))[0]
    path = tmp_path / "in.csv"
    write_csv(path, x, header=["a", "b", "c"])
    return path


def _run(*argv):
    return main([str(a) for a in argv])


def test_int_list():
    assert int_list("0,10,20") == [0, 10, 20]
    assert int_list("0-3,7") == [0, 1, 2, 3, 7]
    with pytest.raises(Exception):
        int_list("x")


def test_extract_pfa(signal_csv, tmp_path):
    out = tmp_path / "out"
    assert _run("extract", signal_csv, "--out", out) == 0
    features = read_csv(out / "features.csv")
    assert features.n == 3 and features.T == 300
    assert read_csv(out / "matrix_A.csv").data.shape == (3, 3)
    assert read_csv(out / "predictor_B.csv").data.shape == (6, 3)
    summary = (out / "summary.txt").read_text()
    assert "achieved_error" in summary and "residual_eigenvalues" in summary


def test_extract_r2_k3(signal_csv, tmp_path):
    assert _run("extract", signal_csv, "--out", tmp_path, "--r", 2, "--k", 3) == 0
    assert read_csv(tmp_path / "features.csv").n == 2
    err = float([line for line in (tmp_path / "summary.txt").read_text().splitlines()
                 if line.startswith("achieved_error")][0].split()[1])
    assert err < 1e-8


def test_extract_sfa(signal_csv, tmp_path):
    assert _run("extract", signal_csv, "--out", tmp_path, "--method", "sfa", "--r", 2) == 0
    summary = (tmp_path / "summary.txt").read_text()
    assert "slowness_eigenvalues" in summary and "residual_eigenvalues" not in summary


def test_extract_single(signal_csv, tmp_path):
    assert _run("extract", signal_csv, "--out", tmp_path, "--method", "single", "--count", 2,
                "--mode", "alternating") == 0
    assert read_csv(tmp_path / "predictor_B.csv").data.shape == (2, 2)
    assert read_csv(tmp_path / "features.csv").n == 2
    assert (tmp_path / "summary.txt").read_text().count("component ") == 2


def test_extract_degree2(signal_csv, tmp_path):
    assert _run("extract", signal_csv, "--out", tmp_path, "--degree", 2, "--r", 2) == 0
    assert read_csv(tmp_path / "matrix_A.csv").data.shape == (9, 9)


def test_features_round_trip(signal_csv, tmp_path):
    _run("extract", signal_csv, "--out", tmp_path)
    f = read_csv(tmp_path / "features.csv").data
    write_csv(tmp_path / "again.csv", f.T)
    np.testing.assert_array_equal(read_csv(tmp_path / "again.csv").data, f)


@pytest.mark.parametrize("argv, code", [
    (["extract", "missing.csv"], 2),
    (["extract", "{csv}", "--r", "5"], 2),
    (["extract", "{csv}", "--p", "0"], 2),
    (["extract", "{csv}", "--threshold", "2"], 2),
    (["extract", "{bad}"], 2),
    (["extract", "{const}"], 3),
    (["extract", "{short}", "--k", "3"], 3),
    (["bogus"], 2),
    (["verify", "--trials", "0"], 2),
    (["experiment", "--runs", "0"], 2),
])
def test_exit_codes(argv, code, signal_csv, tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n3\n")
    (tmp_path / "const.csv").write_text("1,1\n1,1\n1,1\n1,1\n")
    write_csv(tmp_path / "short.csv", np.random.default_rng(1).standard_normal((5, 2)))
    paths = {"csv": signal_csv, "bad": tmp_path / "bad.csv", "const": tmp_path / "const.csv",
             "short": tmp_path / "short.csv"}
    argv = [a.format(**paths) for a in argv]
    assert main(argv + ["--out", str(tmp_path / "o")] if argv[0] == "extract" else argv) == code
    if code:
        assert capsys.readouterr().err


def test_verify_linear_and_diagonal(capsys):
    assert _run("verify", "--trials", 3) == 0
    out = capsys.readouterr().out
    assert "orthogonal_agnosticity" in out and "FAIL" not in out
    assert _run("verify", "--trials", 3, "--model", "diagonal") == 1
    assert _run("verify", "--trials", 3, "--model", "diagonal", "--expect-violation") == 0
    assert _run("verify", "--trials", 1) == 0
    assert _run("verify", "--trials", 3, "--expect-violation") == 1


def _experiment(out, *extra):
    return _run("experiment", "--out", out, "--samples", 300, "--runs", 2, "--k-values", "0,2",
                "--noise-dims", "0,5", *extra)


def test_experiment_csv(tmp_path):
    assert _experiment(tmp_path) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("# lower_bound samples=300 value=")
    assert lines[1] == "noise_dim,k,samples,runs,mean_err,std_err,below_bound"
    assert len(lines) == 2 + 4


def test_experiment_single_row(tmp_path):
    assert _run("experiment", "--out", tmp_path, "--samples", 200, "--runs", 1, "--k-values", 0,
                "--noise-dims", 0) == 0
    rows = [line for line in (tmp_path / "sweep.csv").read_text().splitlines() if not line.startswith("#")]
    assert len(rows) == 2


def test_experiment_deterministic_and_plot(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _experiment(a, "--plot") == 0
    assert _experiment(b, "--plot", "--jobs", 2) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    svg = (a / "sweep_300.svg").read_text()
    assert "<svg" in svg and 'version="1.1"' in svg
    assert svg == (b / "sweep_300.svg").read_text()


def test_config_file(tmp_path, signal_csv):
    cfg = tmp_path / "pfa.cfg"
    cfg.write_text("r = 1\np = 3\n")
    assert _run("--config", cfg, "extract", signal_csv, "--out", tmp_path / "a") == 0
    assert read_csv(tmp_path / "a" / "features.csv").n == 1
    assert "p: 3" in (tmp_path / "a" / "summary.txt").read_text()
    # explicit flags override the file
    assert _run("--config", cfg, "extract", signal_csv, "--out", tmp_path / "b", "--r", 2) == 0
    assert read_csv(tmp_path / "b" / "features.csv").n == 2
    assert _run("--config", tmp_path / "nope.cfg", "verify") == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pfa.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "extract" in proc.stdout
