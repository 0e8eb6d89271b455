"""Command line entry point: ``longmem <subcommand> [options]``.

Exit codes: 0 success, 2 usage or malformed config, 3 invalid parameters,
4 numerical or estimation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings

import numpy as np

from . import __version__, harness
from .errors import (
    ConfigurationError,
    CoverageError,
    EstimationError,
    LongMemError,
    NumericalError,
    ParameterError,
)

EXIT_OK, EXIT_USAGE, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3, 4

SIM_MODELS = ("fn", "arfima", "lmsv", "lmsd", "fiegarch", "arch-inf", "stable-counts",
              "lmsd-counts", "renewal-reward", "on-off", "poisson", "error-duration")


class UsageError(Exception):
    pass


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip()) if text else ()


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _simulate(a):
    from .fracsim import FracSpec, arfima0d0_acvf, simulate_arfima, simulate_fractional_noise
    from .rand import Constant, Normal, Pareto, RngStream
    from .shotnoise import ShotNoiseModel, simulate_error_duration
    from .volatility import (ArchInfSpec, FiegarchSpec, LmsvSpec, simulate_arch_inf,
                             simulate_fiegarch, simulate_lmsv_lmsd)

    stream = RngStream(a.seed)
    spec = FracSpec(a.d, _floats(a.ar), _floats(a.ma), a.sigma)
    m = a.model
    if m == "fn":
        return simulate_fractional_noise(arfima0d0_acvf(a.d, a.n - 1, a.sigma), a.n, stream)
    if m == "arfima":
        return simulate_arfima(spec, a.n, stream)
    if m in ("lmsv", "lmsd"):
        innov = a.innovation or ("gaussian" if m == "lmsv" else "weibull")
        shape = a.shape if innov != "gaussian" else None
        lspec = LmsvSpec(spec, innov, m, shape)
        return simulate_lmsv_lmsd(lspec, a.n, stream, a.multiplier)[0]
    if m == "fiegarch":
        fspec = FiegarchSpec(a.omega, a.theta, a.gamma_lev, d=a.d)
        return simulate_fiegarch(fspec, a.n, stream.generator())[0]
    if m == "arch-inf":
        aspec = ArchInfSpec.hyperbolic(a.omega or 1.0, a.d, a.sum_a)
        return simulate_arch_inf(aspec, a.n, stream.generator())[0]
    if m in ("stable-counts", "lmsd-counts"):
        params = dict(harness.STABLE_PARAMS if m == "stable-counts" else harness.LMSD_PARAMS)
        if m == "stable-counts":
            params.update(alpha=a.alpha, beta=a.beta, c=a.multiplier)
        else:
            params.update(d=a.d, ar=(_floats(a.ar) or (0.0,))[0], gamma=a.shape,
                          sigma=a.sigma, c=a.multiplier)
        gen = harness.stable_counts if m == "stable-counts" else harness.lmsd_counts
        return gen(stream, a.delta_t, a.n, params).counts
    law = Pareto(a.alpha)
    if m == "error-duration":
        return simulate_error_duration(Normal(0.0, 1.0), law, a.n, stream.generator())
    shock = Normal(0.0, 1.0) if m == "renewal-reward" else Constant(1.0)
    model = ShotNoiseModel(m, law, shock, rate=a.rate)
    return model.simulate(a.n * a.delta_t, a.delta_t, stream.generator()).values


def _sim_args(a) -> dict:
    skip = {"command", "out", "config", "func"}
    return {k: v for k, v in sorted(vars(a).items()) if k not in skip}


def _write_series(a, x, out):
    args = _sim_args(a)
    digest = hashlib.sha256(json.dumps(args, sort_keys=True).encode()).hexdigest()[:16]
    out.write(f"# tool=longmem\n# version={__version__}\n# command=simulate\n")
    out.write(f"# seed={a.seed}\n# config_hash={digest}\n# config={json.dumps(args, sort_keys=True)}\n")
    out.write("t,value\n")
    for t, v in enumerate(np.asarray(x), start=1):
        out.write(f"{t},{float(v)!r}\n")


def cmd_simulate(a):
    x = _simulate(a)
    if a.out:
        with open(a.out, "w") as fh:
            _write_series(a, x, fh)
    else:
        _write_series(a, x, sys.stdout)


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def read_series(path) -> np.ndarray:
    """Last column of a CSV with '#' comment lines and one header row."""
    values = []
    header = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header:
                header = True
                try:
                    values.append(float(line.split(",")[-1]))
                except ValueError:
                    pass
                continue
            values.append(float(line.split(",")[-1]))
    if not values:
        raise ParameterError(f"{path}: no data rows")
    return np.array(values)


def estimate_series(x, method: str, m_exp: float, trim: int = 0, center: bool = True):
    from .estimators import bandwidth, gph, local_whittle_gse, local_whittle_noise
    from .spectral import periodogram

    pg = periodogram(x, center=center)
    bw = bandwidth(x.size, m_exp, trim)
    fn = {"gph": gph, "lw": local_whittle_gse, "lw-noise": local_whittle_noise}[method]
    return fn(pg, bw)


def cmd_estimate(a):
    x = read_series(a.input)
    rep = estimate_series(x, a.method, a.m_exp, a.trim, not a.no_center)
    aux = ";".join(f"{k}={v}" for k, v in sorted(rep.aux.items()) if np.isscalar(v))
    lines = [f"# tool=longmem", f"# version={__version__}", "# command=estimate",
             f"# input={a.input}",
             "estimator,n,m,trim,rep,d_hat,aux",
             f"{rep.estimator},{rep.n},{rep.m},{rep.trim},0,{float(rep.d_hat)!r},{aux}"]
    text = "\n".join(lines) + "\n"
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _experiment_config(a, base):
    overrides = {"seed": a.seed, "reps": a.reps, "threads": a.threads, "out_dir": a.out_dir,
                 "n": a.n, "delta_t": a.delta_t}
    return harness.load_config(a.config, base, overrides)


def _print_summary(rows):
    def fmt(x):
        return "NA" if x is None or not np.isfinite(x) else f"{x:.4f}"

    for r in rows:
        print(f"{r['config']}: mean={fmt(r['mean'])} sd={fmt(r['sd'])} t={fmt(r['t_value'])}")


def cmd_table1(a):
    _print_summary(harness.run_table1(_experiment_config(a, harness.TABLE1)))


def cmd_table2(a):
    _print_summary(harness.run_table2(_experiment_config(a, harness.TABLE2)))


def cmd_figure(a):
    cfg = _experiment_config(a, harness.FIGURE)
    panels = harness.run_figure(cfg, control=a.control)
    for name, p in panels.items():
        s = harness.figure_shape(p, cfg.n)
        print(f"{name}: low-decade slope={s['low_slope']:.3f} mid-decade slope="
              f"{s['mid_slope']:.3f} R2={s['r_squared']:.4f}")


def cmd_variance_time(a):
    base = harness.VARIANCE_TIME
    if a.model == "lmsd":
        base = base.replace(model="lmsd", params={**harness.LMSD_PARAMS})
    res = harness.run_variance_time(_experiment_config(a, base))
    print(f"hurst={res['hurst']:.4f}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _experiment_parser(sub, name, func, help):
    p = sub.add_parser(name, help=help)
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--threads", type=int, help="worker processes")
    p.add_argument("--out-dir")
    p.add_argument("--n", type=int)
    p.add_argument("--delta-t", help="comma-separated interval widths in minutes")
    p.set_defaults(func=func)
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="longmem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one series and write it as CSV")
    s.add_argument("--config", help="key=value file supplying option defaults")
    s.add_argument("--model", choices=SIM_MODELS, default="fn")
    s.add_argument("--n", type=int, default=4096)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--d", type=float, default=0.3)
    s.add_argument("--ar", default="", help="comma-separated AR coefficients")
    s.add_argument("--ma", default="", help="comma-separated MA coefficients")
    s.add_argument("--sigma", type=float, default=1.0, help="latent innovation sd")
    s.add_argument("--innovation", default=None)
    s.add_argument("--shape", type=float, default=1.3376)
    s.add_argument("--multiplier", type=float, default=1.0)
    s.add_argument("--omega", type=float, default=0.0)
    s.add_argument("--theta", type=float, default=-0.1)
    s.add_argument("--gamma-lev", type=float, default=0.2)
    s.add_argument("--sum-a", type=float, default=0.9, help="total ARCH weight")
    s.add_argument("--alpha", type=float, default=1.5)
    s.add_argument("--beta", type=float, default=0.8)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--delta-t", type=float, default=1.0, help="interval width")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="estimate d from a series CSV")
    e.add_argument("--config", help="key=value file supplying option defaults")
    e.add_argument("--input", required=True)
    e.add_argument("--method", choices=("gph", "lw", "lw-noise"), default="gph")
    e.add_argument("--m-exp", type=float, default=0.8)
    e.add_argument("--trim", type=int, default=0)
    e.add_argument("--no-center", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    _experiment_parser(sub, "table1", cmd_table1, "GPH on stable-duration counts")
    _experiment_parser(sub, "table2", cmd_table2, "GPH on LMSD-duration counts")
    f = _experiment_parser(sub, "figure", cmd_figure, "averaged log-log periodograms")
    f.add_argument("--control", action="store_true", help="add a white-noise panel")
    v = _experiment_parser(sub, "variance-time", cmd_variance_time, "variance-time curve")
    v.add_argument("--model", choices=("stable", "lmsd"), default="stable")
    return parser


def _apply_config_defaults(parser, argv):
    """For simulate/estimate, ``--config`` supplies defaults for any option."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.command not in ("simulate", "estimate") or not known.config:
        return
    sub = parser._subparsers._group_actions[0].choices[known.command]
    dests = {a.dest: a for a in sub._actions}
    try:
        with open(known.config) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    defaults = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip().replace("-", "_"), val.strip()
        if not sep or not key:
            raise UsageError(f"{known.config}:{lineno}: expected key=value, got {raw!r}")
        action = dests.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"{known.config}:{lineno}: unknown key {key!r}")
        try:
            defaults[key] = action.type(val) if action.type else val
        except ValueError:
            raise UsageError(f"{known.config}:{lineno}: bad value for {key!r}: {val!r}") from None
        if action.choices and defaults[key] not in action.choices:
            raise UsageError(f"{known.config}:{lineno}: {key} must be one of {action.choices}")
    sub.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
    except UsageError as exc:
        print(f"longmem: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    warnings.simplefilter("default")
    try:
        args.func(args)
    except (UsageError, harness.ConfigFileError) as exc:
        print(f"longmem: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, ConfigurationError, CoverageError) as exc:
        print(f"longmem: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (NumericalError, EstimationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"longmem: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LongMemError as exc:
        print(f"longmem: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"longmem: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
