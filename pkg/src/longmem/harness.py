"""Experiment runner for the duration/count simulation studies.

Replication ``r`` of an experiment seeded with ``seed`` always draws from
``RngStream(seed, r)``, so results do not depend on how many worker processes
are used; rows are merged in replication order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .counts import CountSeries, counts_from_stream, durations_to_counts, variance_time_curve
from .errors import CoverageError, ParameterError
from .estimators import bandwidth, gph, summarize
from .fracsim import FracSpec, arfima_acvf, simulate_arfima
from .rand import PositiveStable, PositiveStableSampler, RngStream, StableParams, sample_weibull
from .spectral import averaged_loglog_periodogram, normalized_dft_statistic, periodogram

__all__ = [
    "ExperimentConfig",
    "ConfigFileError",
    "TABLE1",
    "TABLE2",
    "FIGURE",
    "VARIANCE_TIME",
    "load_config",
    "stable_counts",
    "lmsd_counts",
    "run_table1",
    "run_table2",
    "run_figure",
    "run_variance_time",
    "run_dft_degeneracy",
    "figure_shape",
]


class ConfigFileError(ValueError):
    """Malformed configuration file or unknown key."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.  ``delta_t`` is in minutes; one duration unit is a
    second."""

    model: str = "stable"
    n: int = 10_000
    delta_t: tuple = (5.0,)
    m_exponents: tuple = (0.5, 0.8)
    reps: int = 100
    seed: int = 20050101
    params: dict = field(default_factory=dict)
    out_dir: str = "."
    threads: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        if self.n < 64:
            raise ParameterError("n must be >= 64")
        if any(dt <= 0 for dt in self.delta_t):
            raise ParameterError("delta_t must be positive")

    def replace(self, **changes) -> "ExperimentConfig":
        params = dict(self.params)
        params.update(changes.pop("params", {}))
        return dataclasses.replace(self, params=params, **changes)

    def canonical(self) -> dict:
        """Everything that affects results (not out_dir or threads)."""
        return {
            "model": self.model,
            "n": self.n,
            "delta_t": [float(x) for x in self.delta_t],
            "m_exponents": [float(x) for x in self.m_exponents],
            "reps": self.reps,
            "seed": self.seed,
            "params": {k: self.params[k] for k in sorted(self.params)},
        }

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


STABLE_PARAMS = {"alpha": 1.5, "beta": 0.8, "scale": 1.0, "shift": 0.0, "c": 1.21}
LMSD_PARAMS = {"d": 0.3545, "ar": -0.42, "gamma": 1.3376, "sigma": 1.0, "c": 1.0}

TABLE1 = ExperimentConfig("stable", 10_000, (5.0, 10.0, 20.0), (0.5, 0.8), 500,
                          params=dict(STABLE_PARAMS))
TABLE2 = ExperimentConfig("lmsd", 10_000, (5.0, 30.0, 60.0), (0.5, 0.8), 200,
                          params=dict(LMSD_PARAMS))
FIGURE = ExperimentConfig("figure", 10_000, (5.0,), (), 100,
                          params={**{f"stable_{k}": v for k, v in STABLE_PARAMS.items()},
                                  **{f"lmsd_{k}": v for k, v in LMSD_PARAMS.items()}})
VARIANCE_TIME = ExperimentConfig("stable", 10_000, (5.0,), (), 50,
                                 params={**STABLE_PARAMS, "min_block": 10, "blocks": 8})

_INT_KEYS = {"n", "reps", "seed", "threads"}
_LIST_KEYS = {"delta_t", "m_exponents"}


def load_config(path, base: ExperimentConfig = TABLE1, overrides: dict | None = None
                ) -> ExperimentConfig:
    """Read flat ``key = value`` lines ('#' comments) on top of ``base``.

    Top-level keys are the :class:`ExperimentConfig` fields; anything else is
    a model parameter and must already exist in ``base.params``.
    """
    values: dict = {}
    params: dict = {}
    lines = []
    if path:
        with open(path) as fh:
            lines = fh.read().splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip().replace("-", "_"), val.strip()
        if not sep or not key or not val:
            raise ConfigFileError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        try:
            _assign(key, val, values, params, base)
        except (KeyError, ValueError) as exc:
            raise ConfigFileError(f"{path}:{lineno}: {exc.args[0]}") from None
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        try:
            _assign(key, str(val), values, params, base)
        except (KeyError, ValueError) as exc:
            raise ConfigFileError(f"option {key}: {exc.args[0]}") from None
    return base.replace(params=params, **values)


def _assign(key, val, values, params, base):
    if key in _INT_KEYS:
        values[key] = int(val)
    elif key in _LIST_KEYS:
        values[key] = tuple(float(x) for x in val.split(","))
    elif key in ("model", "out_dir"):
        values[key] = val
    elif key in base.params:
        params[key] = float(val)
    else:
        raise KeyError(f"unknown key {key!r}")


# ---------------------------------------------------------------------------
# count generators
# ---------------------------------------------------------------------------


def stable_counts(stream: RngStream, delta_t: float, n: int, params: dict,
                  prefix: str = "") -> CountSeries:
    """Counts from i.i.d. positive-stable durations (seconds), interval
    ``delta_t`` seconds."""
    p = {k: params[prefix + k] for k in STABLE_PARAMS}
    law = StableParams(p["alpha"], p["beta"], p["scale"], p["shift"])
    sampler = PositiveStableSampler(law, stream.generator(), p["c"])
    return counts_from_stream(sampler.draw, delta_t, n, chunk=1 << 18)


def _lmsd_spec(p):
    ar = () if p["ar"] == 0 else (p["ar"],)
    return FracSpec(p["d"], ar, (), p["sigma"])


def lmsd_mean_duration(params: dict, prefix: str = "") -> float:
    """c * E[exp(h/2)] for unit-mean innovations."""
    p = {k: params[prefix + k] for k in LMSD_PARAMS}
    var_h = arfima_acvf(_lmsd_spec(p), 0)[0]
    return p["c"] * math.exp(var_h / 8)


def lmsd_counts(stream: RngStream, delta_t: float, n: int, params: dict,
                prefix: str = "") -> CountSeries:
    """Counts from LMSD durations tau_k = c exp(h_k/2) eps_k with ARFIMA(1,d,0)
    latent h and unit-mean Weibull eps.

    The duration sample is sized from the theoretical mean duration; on a
    coverage shortfall it is redrawn twice as long from a fresh child stream.
    """
    p = {k: params[prefix + k] for k in LMSD_PARAMS}
    spec = _lmsd_spec(p)
    length = int(1.15 * n * delta_t / lmsd_mean_duration(params, prefix)) + 1000
    for attempt in range(8):
        sub = stream.child(attempt)
        h = simulate_arfima(spec, length, sub.child(0))
        eps = sample_weibull(p["gamma"], count=length, rng=sub.child(1).generator(),
                             unit_mean=True)
        try:
            return durations_to_counts(p["c"] * np.exp(h / 2) * eps, delta_t, n)
        except CoverageError:
            length *= 2
    raise CoverageError("LMSD durations failed to cover the horizon after 8 attempts")


_GENERATORS = {"stable": stable_counts, "lmsd": lmsd_counts}


def _counts(model, stream, delta_t_sec, n, params, prefix=""):
    try:
        gen = _GENERATORS[model]
    except KeyError:
        raise ParameterError(f"unknown count model {model!r}") from None
    return gen(stream, delta_t_sec, n, params, prefix)


# ---------------------------------------------------------------------------
# parallel map
# ---------------------------------------------------------------------------


def _map(func, tasks, threads):
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "NA"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _header(config: ExperimentConfig, command: str) -> list[str]:
    return [
        "# tool=longmem",
        f"# version={__version__}",
        f"# command={command}",
        f"# seed={config.seed}",
        f"# config_hash={config.hash()}",
        f"# config={json.dumps(config.canonical(), sort_keys=True)}",
    ]


def _write(path, header, columns, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def _table_task(task):
    model, seed, rep, dt_index, dt_min, n, exps, params = task
    stream = RngStream(seed, rep).child(dt_index)
    c = _counts(model, stream, dt_min * 60.0, n, params)
    pg = periodogram(c.counts)
    return [gph(pg, bandwidth(n, e)).d_hat for e in exps]


def _run_table(config: ExperimentConfig, d0: float, command: str):
    tasks = [
        (config.model, config.seed, r, i, dt, config.n, config.m_exponents, config.params)
        for i, dt in enumerate(config.delta_t)
        for r in range(config.reps)
    ]
    results = _map(_table_task, tasks, config.threads)
    summary, detail = [], []
    k = 0
    for dt in config.delta_t:
        block = np.array(results[k : k + config.reps])
        k += config.reps
        for col, e in enumerate(config.m_exponents):
            m = bandwidth(config.n, e).m
            rep = summarize("gph", block[:, col], d0, m=m, n=config.n)
            label = f"delta_t={dt:g}min;m=n^{e:g};m_value={m};n={config.n};reps={config.reps}"
            summary.append({"estimator": "gph", "config": label, "delta_t": dt, "m_exp": e,
                            "m": m, "mean": rep.mean, "sd": rep.sd, "t_value": rep.t_value,
                            "estimates": block[:, col]})
            for r, d in enumerate(block[:, col]):
                detail.append(("gph", config.n, m, 0, r, d, f"delta_t={dt:g}min"))
    header = _header(config, command) + [f"# d0={float(d0)!r}"]
    out = config.out_dir
    _write(os.path.join(out, f"{command}_summary.csv"), header,
           ["estimator", "config", "mean", "sd", "t_value"],
           [(s["estimator"], s["config"], s["mean"], s["sd"], s["t_value"]) for s in summary])
    _write(os.path.join(out, f"{command}_reports.csv"), header,
           ["estimator", "n", "m", "trim", "rep", "d_hat", "aux"], detail)
    return summary


def run_table1(config: ExperimentConfig = TABLE1):
    """GPH on counts from i.i.d. positive-stable durations; null d0 = 1 - alpha/2.

    Writes ``table1_summary.csv`` and ``table1_reports.csv`` to
    ``config.out_dir`` and returns the summary rows.
    """
    config = config.replace(model="stable")
    d0 = 1 - config.params["alpha"] / 2
    return _run_table(config, d0, "table1")


def run_table2(config: ExperimentConfig = TABLE2):
    """GPH on counts from LMSD durations; null d0 = d of the latent series."""
    config = config.replace(model="lmsd")
    return _run_table(config, config.params["d"], "table2")


# ---------------------------------------------------------------------------
# figure
# ---------------------------------------------------------------------------


def _figure_task(task):
    model, seed, rep, dt_min, n, params, prefix = task
    stream = RngStream(seed, rep).child(0 if model == "stable" else 1)
    if model == "white":
        return RngStream(seed, rep).child(2).generator().standard_normal(n)
    return _counts(model, stream, dt_min * 60.0, n, params, prefix).counts.astype(float)


def run_figure(config: ExperimentConfig = FIGURE, control: bool = False):
    """Averaged log10-log10 periodograms of stable- and LMSD-duration counts,
    j = 1..n/2.  Writes ``figure_stable.csv`` and ``figure_lmsd.csv`` (and
    ``figure_white.csv`` with ``control``); returns the panels by name."""
    dt = config.delta_t[0]
    panels = {}
    models = [("stable", "stable_"), ("lmsd", "lmsd_")] + ([("white", "")] if control else [])
    for model, prefix in models:
        tasks = [(model, config.seed, r, dt, config.n, config.params, prefix)
                 for r in range(config.reps)]
        series = _map(_figure_task, tasks, config.threads)
        panel = averaged_loglog_periodogram(None, config.n, config.reps, series=series)
        meta = {"tool": "longmem", "version": __version__, "command": "figure",
                "panel": model, "seed": config.seed, "config_hash": config.hash(),
                "delta_t_min": dt}
        path = os.path.join(config.out_dir, f"figure_{model}.csv")
        os.makedirs(config.out_dir, exist_ok=True)
        panel.to_csv(path, meta)
        panels[model] = panel
    return panels


def figure_shape(panel, n: int) -> dict:
    """Slopes over the lowest decade (j = 1..10) and over the decade centred
    geometrically in j = 1..n/2, plus the straight-line R^2."""
    w = lambda j: 2 * np.pi * j / n  # noqa: E731
    centre = math.sqrt(n / 2)
    low = panel.slope(w(1), w(10))
    mid = panel.slope(w(centre / math.sqrt(10)), w(centre * math.sqrt(10)))
    return {"low_slope": low, "mid_slope": mid, "r_squared": panel.r_squared(),
            "global_slope": panel.slope()}


# ---------------------------------------------------------------------------
# variance-time and low-frequency DFT checks
# ---------------------------------------------------------------------------


def _vt_task(task):
    model, seed, rep, dt_min, n, params, blocks = task
    c = _counts(model, RngStream(seed, rep).child(3), dt_min * 60.0, n, params)
    return variance_time_curve(c, blocks).variances


def run_variance_time(config: ExperimentConfig = VARIANCE_TIME):
    """Variance-time curve of counts averaged over replications.

    Block sizes are ``blocks`` geometric steps from ``min_block`` to n/10.
    The Hurst estimate is half the slope of the log of the replication-mean
    variance against log block size.  Writes ``variance_time.csv``.
    """
    p = config.params
    blocks = np.unique(np.geomspace(int(p.get("min_block", 10)), config.n // 10,
                                    int(p.get("blocks", 8))).astype(int))
    tasks = [(config.model, config.seed, r, config.delta_t[0], config.n, p, blocks)
             for r in range(config.reps)]
    v = np.mean(_map(_vt_task, tasks, config.threads), axis=0)
    hurst = float(np.polyfit(np.log(blocks), np.log(v), 1)[0] / 2)
    header = _header(config, "variance-time") + [f"# hurst={float(hurst)!r}"]
    _write(os.path.join(config.out_dir, "variance_time.csv"), header,
           ["block_size", "mean_variance"], zip(blocks.tolist(), v))
    return {"block_sizes": blocks, "variances": v, "hurst": hurst}


def _dft_task(task):
    model, seed, rep, dt_sec, n, params, d = task
    c = _counts(model, RngStream(seed, rep).child(4), dt_sec, n, params)
    return abs(normalized_dft_statistic(c.counts, 1, d)) ** 2


def run_dft_degeneracy(model: str, n_values, reps: int, delta_t_sec: float, seed: int,
                       params: dict | None = None, threads: int = 1) -> dict:
    """Median of w_1^{2d} I(w_1) over replications for each n.

    d is 1 - alpha/2 for stable durations and the latent d for LMSD.
    """
    if params is None:
        params = dict(STABLE_PARAMS if model == "stable" else LMSD_PARAMS)
    d = 1 - params["alpha"] / 2 if model == "stable" else params["d"]
    out = {}
    for n in n_values:
        tasks = [(model, seed, r, delta_t_sec, int(n), params, d) for r in range(reps)]
        out[int(n)] = float(np.median(_map(_dft_task, tasks, threads)))
    return out


def mean_stable_duration(params: dict = STABLE_PARAMS) -> float:
    law = StableParams(params["alpha"], params["beta"], params["scale"], params["shift"])
    return PositiveStable(law, params["c"]).mean()
