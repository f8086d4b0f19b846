import csv
import math
import os
import subprocess

import numpy as np
import pytest

import ffou


def read_csv(path):
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# seed=") and "config_hash=" in lines[0]
    rows = list(csv.reader(lines[1:]))
    return rows[0], rows[1:]


def test_markov_and_representations():
    p = ffou.ModelParams(hurst=0.5, theta=30.0, sigma=1.0)
    for t, s in [(10.0, 30.0), (60.0, 60.0)]:
        ref = 15.0 * (math.exp(-abs(t - s) / 30.0) - math.exp(-(t + s) / 30.0))
        assert abs(ffou.cov_fou(t, s, p) - ref) < 1e-8
    q = ffou.ModelParams(hurst=0.7)
    w = ffou.cov_fou(20.0, 45.0, q)
    assert abs(w - ffou.cov_fou_harmonizable(20.0, 45.0, q)) < 1e-6 * (1 + abs(w))
    assert abs(ffou.cov_fou(20.0, 45.0, q) - ffou.cov_fou(45.0, 20.0, q)) < 1e-9


def test_parameter_errors_map_to_value_error():
    with pytest.raises(ValueError):
        ffou.ModelParams(hurst=1.5)
    with pytest.raises(ValueError):
        ffou.ForcingTerm.single(1.0, "gamma:2")


def test_fgn_and_paths():
    grid = ffou.TimeGrid(0.1, 512)
    g = ffou.simulate_fgn(grid, 0.7, seed=3, path=1)
    assert g.shape == (512,)
    assert np.array_equal(g, ffou.simulate_fgn(grid, 0.7, seed=3, path=1))
    p = ffou.ModelParams(hurst=0.7, sigma=0.0, v_rest=-70.0, v_init=-70.0)
    zeros = np.zeros(grid.nodes)
    v = ffou.simulate_trapezoid(p, zeros, zeros, grid)
    assert np.all(v == -70.0)
    with pytest.raises(ValueError):
        ffou.simulate_euler(p, zeros, zeros, grid)


def test_ensemble_mean_against_analytic():
    p = ffou.ModelParams(hurst=0.7, theta=30.0, sigma=1.0, v_rest=-70.0, v_init=-70.0)
    f = ffou.ForcingTerm.constant(6.0)
    grid = ffou.TimeGrid.from_horizon(0.1, 90.0)
    ens = ffou.simulate_ensemble(p, f, grid, paths=1000, seed=4)
    assert ens.shape == (1000, grid.nodes)
    k = 600
    se = ens[:, k].std(ddof=1) / math.sqrt(ens.shape[0])
    assert abs(ens[:, k].mean() - ffou.mean_v(p, f, 60.0)) < 4 * se
    assert abs(ffou.mean_v(p, f, 1e4) - 110.0) < 1e-9
    assert ffou.var_v(p, f, 40.0) == pytest.approx(ffou.cov_fou(40.0, 40.0, p), rel=1e-12)


def test_forcing_covariance():
    f = ffou.ForcingTerm.single(6.0, "exponential:0.05")
    ft, fs = 1 - math.exp(-0.05 * 30), 1 - math.exp(-0.05 * 10)
    assert ffou.forcing_cov(f, 30.0, 10.0) == pytest.approx(36 * (fs - ft * fs), rel=1e-14)
    assert ffou.forcing_mean(f, 30.0) == pytest.approx(6 * ft, rel=1e-14)


def test_fpt_deterministic():
    p = ffou.ModelParams(hurst=0.7, sigma=0.0, v_rest=-70.0, v_init=-70.0)
    r = ffou.estimate_fpt(p, ffou.ForcingTerm.constant(6.0), threshold=-50.0, t_max=20.0, paths=4)
    exact = -30.0 * math.log(1 - 20.0 / 180.0)
    assert r["censored_count"] == 0
    assert np.all(np.abs(r["crossing_times"] - exact) < 0.1)


def test_config_round_trip_and_hash():
    text = ffou.parse_config_text("model.hurst = 0.3\nforcing.kind = constant\n")
    assert ffou.parse_config_text(text) == text
    assert ffou.config_hash(text) == ffou.config_hash(text + "output.dir = elsewhere\n")
    with pytest.raises(ValueError):
        ffou.parse_config_text("nope = 1")


def test_validation_criterion():
    r = ffou.run_criterion(2)
    assert r["passed"], r["detail"]


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def test_cli_exit_codes(cli, tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("model.theta = -1\n")
    assert run(cli, "simulate", "--config", str(bad), "--out", str(tmp_path)).returncode == 2
    bad.write_text("no equals sign\n")
    assert run(cli, "kernels", "--config", str(bad)).returncode == 2
    assert run(cli, "frobnicate").returncode == 2
    long = tmp_path / "long.conf"
    long.write_text("grid.dt = 0.01\nfpt.t_max = 1000\n")
    assert run(cli, "fpt", "--config", str(long), "--out", str(tmp_path)).returncode == 2


def test_cli_validation_failure_under_fault(cli, tmp_path):
    res = run(cli, "validate", "--level", "quick", "--out", str(tmp_path), "--fault", "flip-trapezoid-decay")
    assert res.returncode == 1
    report = (tmp_path / "validation.json").read_text()
    assert '"passed": false' in report


def test_cli_flat_and_deterministic(cli, configs, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        res = run(cli, "simulate", "--config", os.path.join(configs, "flat.conf"), "--out", str(out))
        assert res.returncode == 0, res.stderr
    for name in ("paths.csv", "moments.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    header, rows = read_csv(a / "paths.csv")
    assert header[0] == "time"
    assert all(float(x) == -70.0 for row in rows for x in row[1:])
    header, rows = read_csv(a / "moments.csv")
    assert header == ["time", "emp_mean", "emp_var", "emp_cov_anchor", "se_mean", "se_var",
                      "analytic_mean", "analytic_var", "analytic_cov"]


def test_cli_seed_override_changes_output(cli, configs, tmp_path):
    conf = os.path.join(configs, "constant_stimulus.conf")
    run(cli, "simulate", "--config", conf, "--out", str(tmp_path / "s1"), "--seed", "1")
    run(cli, "simulate", "--config", conf, "--out", str(tmp_path / "s2"), "--seed", "2")
    assert (tmp_path / "s1" / "paths.csv").read_bytes() != (tmp_path / "s2" / "paths.csv").read_bytes()


def test_cli_kernel_tables(cli, configs, tmp_path):
    res = run(cli, "kernels", "--config", os.path.join(configs, "kernels.conf"), "--out", str(tmp_path))
    assert res.returncode == 0, res.stderr
    header, rows = read_csv(tmp_path / "cov_lag.csv")
    cols = {name: i for i, name in enumerate(header)}
    table = np.array(rows, dtype=float)
    # Slower decay for larger H at large lags: increasing in H from 1/2 on, and
    # every short-memory tail (H < 1/2) below every long-memory one.
    last = table[-1]
    hs = [0.1, 0.25, 0.5, 0.75, 0.9]
    long_memory = [last[cols["R_H%g" % h]] for h in (0.5, 0.75, 0.9)]
    assert all(0 < x < y for x, y in zip(long_memory, long_memory[1:]))
    for h in (0.1, 0.25):
        assert abs(last[cols["R_H%g" % h]]) < long_memory[1]
    theta, t = 30.0, 10.0
    s = table[:, 0]
    limit = theta**2 * (1 - np.exp(-t / theta)) * (1 - np.exp(-(t + s) / theta))
    assert np.allclose(table[:, cols["R_limit_H1"]], limit, rtol=1e-12)
    vh, vrows = read_csv(tmp_path / "variance.csv")
    vtable = np.array(vrows, dtype=float)
    at_t = vtable[np.isclose(vtable[:, 0], t)][0]
    for h in hs:
        assert at_t[vh.index("var_H%g" % h)] == pytest.approx(table[0, cols["R_H%g" % h]], rel=1e-12)


def test_cli_fpt_configs(cli, configs, tmp_path):
    res = run(cli, "fpt", "--config", os.path.join(configs, "fpt_deterministic.conf"), "--out", str(tmp_path / "d"))
    assert res.returncode == 0, res.stderr
    _, hist = read_csv(tmp_path / "d" / "fpt_histogram.csv")
    assert sum(1 for row in hist if float(row[2]) > 0) == 1
    res = run(cli, "fpt", "--config", os.path.join(configs, "fpt_censored.conf"), "--out", str(tmp_path / "c"))
    assert res.returncode == 0
    assert "censored fraction 1" in res.stdout
    _, times = read_csv(tmp_path / "c" / "fpt_times.csv")
    assert all(row[1] == "censored" for row in times)
    res = run(cli, "fpt", "--config", os.path.join(configs, "fpt_neuronal.conf"), "--out", str(tmp_path / "n"))
    assert res.returncode == 0, res.stderr


def test_cli_hurst_sweep(cli, configs, tmp_path):
    text = open(os.path.join(configs, "constant_stimulus_sweep.conf")).read()
    conf = tmp_path / "sweep.conf"
    conf.write_text(text.replace("simulate.paths = 500", "simulate.paths = 50"))
    res = run(cli, "simulate", "--config", str(conf), "--out", str(tmp_path / "out"))
    assert res.returncode == 0, res.stderr
    finals = {}
    for h in ("0.25", "0.5", "0.75"):
        for kind in ("paths", "moments"):
            assert (tmp_path / "out" / f"{kind}_H{h}.csv").exists()
        header, rows = read_csv(tmp_path / "out" / f"moments_H{h}.csv")
        finals[h] = float(rows[-1][header.index("analytic_mean")])
    assert all(math.isclose(v, finals["0.5"], rel_tol=1e-12) for v in finals.values())
