import subprocess
import sys

import pytest

from qmcmedian import cli, estimate

RMSE_ARGS = ["rmse", "--fn", "falpha", "--param", "1", "--methods", "median-rls,dn1", "--m", "4..10", "--trials", "20", "--seed", "7"]


@pytest.fixture(scope="module")
def rmse_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("rmse") / "a.csv"
    assert cli.main(RMSE_ARGS + ["--out", str(path)]) == 0
    return path


def test_rmse_rows_and_header(rmse_csv):
    lines = rmse_csv.read_text().splitlines()
    assert lines[0] == ",".join(cli.CSV_HEADER)
    assert len(lines) == 15
    recs = cli.read_rmse_csv(rmse_csv)
    assert {(r.method, r.m) for r in recs} == {(meth, m) for meth in ("median-rls", "dn1") for m in range(4, 11)}
    assert all(r.n == 1 << r.m and r.trials == 20 for r in recs)


def test_rmse_rerun_is_byte_identical(rmse_csv, tmp_path):
    again = tmp_path / "b.csv"
    assert cli.main(RMSE_ARGS + ["--out", str(again), "--workers", "3"]) == 0
    assert again.read_bytes() == rmse_csv.read_bytes()


def test_rmse_slopes_order_methods(rmse_csv):
    recs = cli.read_rmse_csv(rmse_csv)
    slope = {meth: estimate.slope_fit([r for r in recs if r.method == meth], window=None) for meth in ("median-rls", "dn1")}
    assert slope["median-rls"] < slope["dn1"]


def test_rmse_stdout_and_slopes(capsys):
    assert cli.main(["rmse", "--fn", "fc", "--param", "0.5", "--dim", "3", "--methods", "median-crd", "--m", "2..5", "--trials", "2", "--seed", "1"]) == 0
    out, err = capsys.readouterr()
    assert len(out.splitlines()) == 5
    assert "median-crd: log2-rmse slope" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["rmse", "--fn", "nope", "--seed", "1", "--m", "3"],
        ["rmse", "--fn", "falpha", "--param", "1", "--methods", "median-owen", "--seed", "1"],
        ["rmse", "--fn", "falpha", "--param", "1", "--m", "4..30", "--seed", "1"],
        ["rmse", "--fn", "falpha", "--param", "1", "--m", "4..6", "--trials", "1", "--seed", "1"],
        ["verify-net", "--method", "crd", "--m", "4"],
        ["verify-net", "--s", "2", "--m", "4", "--directions", "/nonexistent/file.txt"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_seed_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["rmse", "--fn", "falpha"])
    assert exc.value.code == 2


def test_parse_m_range():
    assert cli.parse_m_range("4..6") == [4, 5, 6]
    assert cli.parse_m_range("8") == [8]
    assert cli.parse_m_range("2,4") == [2, 4]
    for bad in ("a..b", "", "21", "-1"):
        with pytest.raises(cli.UsageError):
            cli.parse_m_range(bad)


def test_verify_net_sobol(capsys):
    assert cli.main(["verify-net", "--s", "2", "--m", "0..8", "--expect-t", "0"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "method,s,m,t"
    assert rows[1:] == [f"sobol,2,{m},0" for m in range(9)]


def test_verify_net_crd_is_often_suboptimal(capsys):
    ts = []
    for seed in range(20):
        cli.main(["verify-net", "--method", "crd", "--s", "2", "--m", "8", "--seed", str(seed)])
        ts.append(int(capsys.readouterr().out.splitlines()[-1].split(",")[-1]))
    assert max(ts) > 0
    assert cli.main(["verify-net", "--method", "crd", "--s", "2", "--m", "8", "--seed", "0", "--expect-t", "0"]) == (1 if ts[0] else 0)


def test_verify_net_rls_keeps_t(capsys):
    assert cli.main(["verify-net", "--method", "rls", "--s", "2", "--m", "2..8", "--seed", "3", "--expect-t", "0"]) == 0


def test_walsh_check_passes(capsys):
    assert cli.main(["walsh-check", "--pairs", "50", "--seed", "2"]) == 0
    assert "walsh-check: pass" in capsys.readouterr().out


def test_walsh_check_perturbation_fails(capsys):
    assert cli.main(["walsh-check", "--pairs", "5", "--perturb", "0.01"]) == 1
    out = capsys.readouterr().out
    assert "|lhs-rhs| = 1.000e-02" in out
    assert "walsh-check: FAIL" in out


def test_mean_dim_output(capsys):
    assert cli.main(["mean-dim"]) == 0
    rows = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    assert f"{float(rows[0][2]):.5f}" == "1.00104"
    assert f"{float(rows[2][2]):.8f}" == "1.00000052"
    cli.main(["mean-dim", "--c", "1.5", "--s", "1"])
    assert capsys.readouterr().out.splitlines()[1].split(",")[2] == "1.0000000000"


def test_spectra(tmp_path):
    out = tmp_path / "coeffs.csv"
    assert cli.main(["spectra", "--fn", "falpha", "--param", "1", "--level", "3", "--grid", "12", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "k,kappa_size,top_digit,coefficient"
    assert len(rows) == 8
    assert cli.main(["spectra", "--fn", "fc", "--param", "0.5"]) == 2


def test_directions_env_override(tmp_path, monkeypatch, capsys):
    p = tmp_path / "short.txt"
    p.write_text("d s a m_i\n2 1 0 1\n")
    monkeypatch.setenv("QMC_DIRECTIONS", str(p))
    assert cli.main(["verify-net", "--s", "2", "--m", "4"]) == 0
    capsys.readouterr()
    assert cli.main(["verify-net", "--s", "3", "--m", "4"]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmcmedian", "mean-dim", "--c", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    row = proc.stdout.splitlines()[1].split(",")
    assert row[:2] == ["0.5", "20"] and f"{float(row[2]):.5f}" == "1.00104"
