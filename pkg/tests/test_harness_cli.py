import math

import numpy as np
import pytest

from longmem import harness
from longmem.cli import estimate_series, main, read_series
from longmem.errors import ParameterError
from longmem.harness import (
    TABLE1,
    ConfigFileError,
    ExperimentConfig,
    load_config,
    lmsd_counts,
    lmsd_mean_duration,
    mean_stable_duration,
    stable_counts,
)
from longmem.rand import RngStream


SMALL = TABLE1.replace(n=512, reps=4, delta_t=(5.0,), seed=11)


# --- configuration ---------------------------------------------------------------


def test_config_hash_tracks_parameters():
    h = SMALL.hash()
    assert SMALL.replace(params={"alpha": 1.4}).hash() != h
    assert SMALL.replace(seed=12).hash() != h
    assert SMALL.replace(n=1024).hash() != h
    # execution details do not change results
    assert SMALL.replace(threads=4, out_dir="/tmp/x").hash() == h
    assert len(h) == 16


def test_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig(reps=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(delta_t=(0.0,))


def test_load_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nreps = 7\ndelta_t = 5, 30\nalpha = 1.4  # trailing\n")
    cfg = load_config(path, TABLE1, {"seed": 3, "threads": None})
    assert cfg.reps == 7 and cfg.delta_t == (5.0, 30.0) and cfg.seed == 3
    assert cfg.params["alpha"] == 1.4 and cfg.params["beta"] == 0.8


@pytest.mark.parametrize("text, where", [("reps = 3\nfoo = 1\n", ":2: unknown key 'foo'"),
                                         ("just words\n", ":1: expected key=value"),
                                         ("n = ten\n", ":1:")])
def test_load_config_errors(tmp_path, text, where):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigFileError) as info:
        load_config(path, TABLE1)
    assert where in str(info.value)


# --- count generators ------------------------------------------------------------


def test_stable_counts_mean_rate():
    dt = 300.0
    c = stable_counts(RngStream(1), dt, 4000, harness.STABLE_PARAMS)
    mu = mean_stable_duration()
    # heavy-tailed durations: only a loose check on the rate
    assert c.counts.mean() == pytest.approx(dt / mu, rel=0.15)
    assert c.counts.size == 4000 and c.delta_t == dt


def test_lmsd_counts_mean_rate():
    dt = 300.0
    mu = lmsd_mean_duration(harness.LMSD_PARAMS)
    assert mu == pytest.approx(math.exp(1.2655 / 8), rel=1e-3)
    # one path's rate fluctuates by about 6% under long memory, so average 20
    rates = [lmsd_counts(RngStream(2, r), dt, 4000, harness.LMSD_PARAMS).counts.mean()
             for r in range(20)]
    assert np.mean(rates) == pytest.approx(dt / mu, rel=0.05)


# --- experiments -----------------------------------------------------------------


def _csv_bytes(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_table_is_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    rows_a = harness.run_table1(SMALL.replace(out_dir=str(a), threads=1))
    rows_b = harness.run_table1(SMALL.replace(out_dir=str(b), threads=3))
    assert _csv_bytes(a) == _csv_bytes(b)
    assert [r["mean"] for r in rows_a] == [r["mean"] for r in rows_b]
    text = (a / "table1_summary.csv").read_text()
    assert f"# config_hash={SMALL.hash()}" in text
    assert "# d0=0.25" in text
    assert "estimator,config,mean,sd,t_value" in text


def test_table_single_replication_reports_na(tmp_path):
    rows = harness.run_table1(SMALL.replace(reps=1, out_dir=str(tmp_path)))
    assert all(r["sd"] is None and r["t_value"] is None for r in rows)
    body = (tmp_path / "table1_summary.csv").read_text().splitlines()[-1]
    assert body.endswith(",NA,NA")


def test_table_replications_are_independent_of_reps(tmp_path):
    # replication r has its own stream, so the first reps agree
    harness.run_table1(SMALL.replace(reps=2, out_dir=str(tmp_path / "2")))
    harness.run_table1(SMALL.replace(reps=4, out_dir=str(tmp_path / "4")))

    def d_hats(d):
        lines = (tmp_path / d / "table1_reports.csv").read_text().splitlines()
        rows = [l.split(",") for l in lines if l.startswith("gph,")]
        return {(r[2], r[4]): r[5] for r in rows}

    two, four = d_hats("2"), d_hats("4")
    assert all(four[k] == v for k, v in two.items())


def test_figure_shape_on_synthetic_panel(tmp_path):
    cfg = harness.FIGURE.replace(n=256, reps=3, out_dir=str(tmp_path))
    panels = harness.run_figure(cfg, control=True)
    assert set(panels) == {"stable", "lmsd", "white"}
    for name in panels:
        assert (tmp_path / f"figure_{name}.csv").exists()
    s = harness.figure_shape(panels["white"], 256)
    assert set(s) == {"low_slope", "mid_slope", "r_squared", "global_slope"}


def test_variance_time_writes_hurst(tmp_path):
    cfg = harness.VARIANCE_TIME.replace(n=2000, reps=3, out_dir=str(tmp_path))
    res = harness.run_variance_time(cfg)
    assert res["block_sizes"][0] == 10 and res["block_sizes"][-1] == 200
    assert 0.3 < res["hurst"] < 1.0
    assert f"# hurst={res['hurst']!r}" in (tmp_path / "variance_time.csv").read_text()


def test_dft_degeneracy_keys():
    out = harness.run_dft_degeneracy("stable", [256, 512], 3, 60.0, 5)
    assert sorted(out) == [256, 512] and all(v > 0 for v in out.values())


# --- command line ----------------------------------------------------------------


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--model", "lmsv", "--d", "0.4", "--n", "8192", "--seed", "7"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert read_series(a).size == 8192
    assert main(["simulate", "--model", "lmsv", "--d", "0.4", "--n", "8192", "--seed", "8",
                 "--out", str(b)]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_estimate_round_trip(tmp_path):
    series, report = tmp_path / "x.csv", tmp_path / "r.csv"
    assert main(["simulate", "--model", "fn", "--d", "0.3", "--n", "4096", "--seed", "2",
                 "--out", str(series)]) == 0
    assert main(["estimate", "--input", str(series), "--method", "gph", "--m-exp", "0.6",
                 "--out", str(report)]) == 0
    row = report.read_text().splitlines()[-1].split(",")
    expected = estimate_series(read_series(series), "gph", 0.6)
    assert float(row[5]) == expected.d_hat
    assert int(row[2]) == expected.m


@pytest.mark.parametrize("model", ["arfima", "lmsd", "fiegarch", "arch-inf", "stable-counts",
                                   "lmsd-counts", "renewal-reward", "on-off", "poisson",
                                   "error-duration"])
def test_simulate_models_run(tmp_path, model):
    out = tmp_path / "s.csv"
    assert main(["simulate", "--model", model, "--n", "256", "--seed", "1",
                 "--out", str(out)]) == 0
    x = read_series(out)
    assert x.size == 256 and np.all(np.isfinite(x))


def test_exit_codes(tmp_path, capsys):
    assert main(["simulate", "--model", "arch-inf", "--sum-a", "1.2", "--n", "64"]) == 3
    assert main(["simulate", "--model", "nope"]) == 2
    assert main(["simulate", "--n", "64", "--d", "0.7"]) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("reps = 2\nbogus = 1\n")
    assert main(["table1", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert "bad.cfg:2" in capsys.readouterr().err
    assert main(["simulate", "--config", str(bad)]) == 2
    assert main(["table1", "--reps", "0", "--out-dir", str(tmp_path)]) == 3
    const = tmp_path / "const.csv"
    const.write_text("t,value\n" + "".join(f"{i},1.0\n" for i in range(128)))
    assert main(["estimate", "--input", str(const)]) == 4


def test_simulate_config_defaults(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("model = fn\nd = 0.2\nn = 300\nseed = 4\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--model", "fn", "--d", "0.2", "--n", "300", "--seed", "4",
                 "--out", str(b)]) == 0
    assert read_series(a).tolist() == read_series(b).tolist()


def test_table1_cli_prints_na(tmp_path, capsys):
    assert main(["table1", "--reps", "1", "--n", "512", "--delta-t", "5", "--seed", "1",
                 "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "sd=NA t=NA" in out
