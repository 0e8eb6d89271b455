"""Semiparametric estimators of the memory parameter d.

GPH log-periodogram regression, local Whittle (GSE), the noise-corrected
local Whittle for log squared returns, and a Haar wavelet estimator for
continuous-time shot-noise paths.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import BoundaryWarning, DegenerateInputError, EstimationError, ParameterError
from .spectral import PeriodogramSet

__all__ = [
    "BandwidthSpec",
    "EstimateReport",
    "bandwidth",
    "gph",
    "local_whittle_gse",
    "local_whittle_noise",
    "bandwidth_condition",
    "WaveletCoefficients",
    "wavelet_coefficients",
    "wavelet_estimator",
    "t_value",
    "summarize",
]

D_LOWER, D_UPPER = -0.49, 0.99


@dataclass(frozen=True)
class BandwidthSpec:
    m: int
    trim: int = 0

    def check(self, n: int):
        # at least two frequencies must remain after trimming
        if not (self.trim >= 0 and self.trim + 2 <= self.m < n / 2):
            raise ParameterError(
                f"bandwidth needs 0 <= trim, trim+2 <= m < n/2 (m={self.m}, trim={self.trim}, n={n})"
            )


def bandwidth(n: int, exponent: float, trim: int = 0) -> BandwidthSpec:
    """m = n ** exponent rounded to the nearest integer (n=10^4 gives 100 and
    1585 for exponents 0.5 and 0.8)."""
    return BandwidthSpec(int(round(n**exponent)), trim)


@dataclass
class EstimateReport:
    estimator: str
    d_hat: float
    m: int | None = None
    trim: int = 0
    n: int | None = None
    aux: dict = field(default_factory=dict)
    replicates: np.ndarray | None = None
    mean: float | None = None
    sd: float | None = None
    t_value: float | None = None


def _band(pgram: PeriodogramSet, bw: BandwidthSpec):
    bw.check(pgram.n)
    if bw.m > len(pgram):
        raise ParameterError(f"m={bw.m} exceeds the {len(pgram)} available ordinates")
    sl = slice(bw.trim, bw.m)
    return pgram.frequencies[sl], pgram.ordinates[sl]


def gph(pgram: PeriodogramSet, bw: BandwidthSpec, regressor: str = "log") -> EstimateReport:
    """Least-squares slope of log I(w_j) on -2 log w_j, j = trim+1..m.

    ``regressor="sin"`` uses -log(4 sin^2(w_j / 2)) instead.
    """
    w, I = _band(pgram, bw)
    bad = np.nonzero(~(I > 0))[0]
    if bad.size:
        j = bw.trim + bad[0] + 1
        raise EstimationError(f"zero periodogram ordinate at Fourier index j={j}")
    if regressor == "log":
        x = -2 * np.log(w)
    elif regressor == "sin":
        x = -np.log(4 * np.sin(w / 2) ** 2)
    else:
        raise ParameterError(f"unknown GPH regressor {regressor!r}")
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, np.log(I), rcond=None)
    return EstimateReport("gph", float(coef[1]), bw.m, bw.trim, pgram.n,
                          {"regressor": regressor})


def _whittle_objective(w, I):
    logw = np.log(w)
    mean_logw = logw.mean()
    logI = np.log(I)

    def R(d):
        # log mean(w^{2d} I) - 2 d mean(log w), computed stably
        z = 2 * d * logw + logI
        zmax = z.max()
        return zmax + np.log(np.mean(np.exp(z - zmax))) - 2 * d * mean_logw

    return R


def _boundary(d, lo, hi, name, tol=1e-4):
    hit = min(d - lo, hi - d) < tol
    if hit:
        warnings.warn(f"{name}: minimiser {d:.4f} at the boundary of [{lo}, {hi}]",
                      BoundaryWarning)
    return hit


def local_whittle_gse(pgram: PeriodogramSet, bw: BandwidthSpec) -> EstimateReport:
    """Local Whittle / Gaussian semiparametric estimate over [-0.49, 0.99]."""
    w, I = _band(pgram, bw)
    if np.any(I <= 0):
        raise EstimationError("zero periodogram ordinate in the estimation band")
    R = _whittle_objective(w, I)
    res = optimize.minimize_scalar(R, bounds=(D_LOWER, D_UPPER), method="bounded",
                                   options={"xatol": 1e-10})
    d = float(res.x)
    hit = _boundary(d, D_LOWER, D_UPPER, "local Whittle")
    return EstimateReport("local_whittle", d, bw.m, bw.trim, pgram.n,
                          {"objective": float(res.fun), "boundary": hit})


def _noise_profile(w, I, d, beta_grid):
    # R(d, beta) = log mean(I / g) + mean(log g),  g = w^{-2d} + beta
    base = w ** (-2 * d)
    scale = np.median(base)

    def R(beta):
        g = base + beta
        return np.log(np.mean(I / g)) + np.mean(np.log(g))

    betas = np.r_[0.0, beta_grid * scale]
    vals = np.array([R(b) for b in betas])
    k = int(np.argmin(vals))
    if k == 0:
        lo, hi = 0.0, betas[1]
    else:
        lo, hi = betas[k - 1], betas[min(k + 1, betas.size - 1)]
    # refine on log-ish scale inside the bracket
    res = optimize.minimize_scalar(R, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10 * max(hi, 1e-300)})
    if res.fun < vals[k]:
        return float(res.fun), float(res.x)
    return float(vals[k]), float(betas[k])


def local_whittle_noise(pgram: PeriodogramSet, bw: BandwidthSpec, tol: float = 1e-6,
                        d0: float | None = None) -> EstimateReport:
    """Local Whittle with an additive flat noise term.

    The local spectral model is G (w^{-2d} + beta); G is profiled out,
    beta >= 0 minimised per d (64-point log grid, then bounded refinement),
    and d found by a coarse grid followed by a bounded scalar search on
    [-0.49, 0.99].  ``aux`` carries the noise ratio beta, a flag when beta is
    pinned at 0, and the bandwidth check of :func:`bandwidth_condition`
    evaluated at ``d0`` (default: the estimate).
    """
    w, I = _band(pgram, bw)
    if np.any(I <= 0):
        raise EstimationError("zero periodogram ordinate in the estimation band")
    grid = np.logspace(-6, 6, 64)

    def profile(d):
        return _noise_profile(w, I, d, grid)[0]

    coarse = np.linspace(D_LOWER, D_UPPER, 49)
    vals = np.array([profile(d) for d in coarse])
    k = int(np.argmin(vals))
    lo, hi = coarse[max(k - 1, 0)], coarse[min(k + 1, coarse.size - 1)]
    res = optimize.minimize_scalar(profile, bracket=None, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    d = float(res.x) if res.fun <= vals[k] else float(coarse[k])
    obj, beta = _noise_profile(w, I, d, grid)
    hit = _boundary(d, D_LOWER, D_UPPER, "noise-corrected local Whittle")
    check = bandwidth_condition(pgram.n, bw.m, d if d0 is None else d0)
    return EstimateReport(
        "local_whittle_noise", d, bw.m, bw.trim, pgram.n,
        {"noise_ratio": beta, "beta_pinned_zero": beta == 0.0, "objective": obj,
         "boundary": hit, "bandwidth": check},
    )


def bandwidth_condition(n: int, m: int, d: float, delta: float = 0.0) -> dict:
    """Terms of the bandwidth condition for the noise-corrected estimator.

    ``lower_term`` = m^(-4d-1+delta) n^(4d) must vanish, i.e. m must grow
    faster than n^(4d/(4d+1)); ``upper_term`` = n^-4 m^5 log^2 m must vanish.
    ``lower_ok`` / ``upper_ok`` flag whether the current (n, m) sits on the
    right side of each rate (term below 1).
    """
    lower = m ** (-4 * d - 1 + delta) * float(n) ** (4 * d)
    upper = float(n) ** -4 * m**5 * math.log(m) ** 2
    rate = float(n) ** (4 * d / (4 * d + 1)) if d > 0 else 1.0
    return {"lower_term": lower, "upper_term": upper, "min_m": rate,
            "lower_ok": m > rate, "upper_ok": upper < 1.0}


# ---------------------------------------------------------------------------
# wavelets
# ---------------------------------------------------------------------------


@dataclass
class WaveletCoefficients:
    scales: np.ndarray      # j for each coefficient
    translates: np.ndarray  # k for each coefficient
    values: np.ndarray
    excluded: list = field(default_factory=list)

    def scale_means(self):
        js = np.unique(self.scales)
        return js, np.array([np.mean(self.values[self.scales == j] ** 2) for j in js])


def wavelet_coefficients(path, scales, translates=None, psi: str = "haar",
                         origin: float = 0.0) -> WaveletCoefficients:
    """w_{j,k} = 2^{-j/2} int psi(2^{-j}(s - origin) - k) X_s ds, exactly.

    ``psi="haar"`` is +1 on [0, 1/2) and -1 on [1/2, 1).  ``translates``
    defaults to every k whose support lies inside [origin, horizon];
    requested (j, k) outside the window are skipped and listed in
    ``excluded``.
    """
    if psi != "haar":
        raise ParameterError(f"unsupported wavelet {psi!r}")
    horizon = float(path.horizon)
    js, ks, vals, excluded = [], [], [], []
    for j in scales:
        j = int(j)
        width = 2.0**j
        kmax = int(np.floor((horizon - origin) / width + 1e-9))
        wanted = np.arange(kmax) if translates is None else np.asarray(translates, dtype=int)
        ok = (wanted >= 0) & (wanted < kmax)
        excluded.extend((j, int(k)) for k in wanted[~ok])
        k = wanted[ok]
        if k.size == 0:
            continue
        a = origin + k * width
        mid = a + width / 2
        b = a + width
        F = path.events.primitive(np.r_[a, mid, b]).reshape(3, -1)
        w = (2 * F[1] - F[0] - F[2]) * 2.0 ** (-j / 2)
        js.append(np.full(k.size, j))
        ks.append(k)
        vals.append(w)
    if not vals:
        raise EstimationError("no wavelet coefficient fits in the observation window")
    return WaveletCoefficients(np.concatenate(js), np.concatenate(ks), np.concatenate(vals),
                               excluded)


def wavelet_estimator(coeffs: WaveletCoefficients, delta="auto", admissible=None
                      ) -> EstimateReport:
    """Minimise W(d') = log(sum 2^{-2d'j} w_{jk}^2) + delta d' log 2 on (0, 1/2).

    ``delta="auto"`` uses twice the mean scale index over the admissible set,
    which centres the contrast; a number is used as given.  ``admissible`` is
    an optional boolean mask over the coefficients.  ``aux["regression"]``
    holds the delta-free alternative: half the slope of log2 of the
    within-scale mean square against j.
    """
    sel = np.ones(coeffs.values.size, bool) if admissible is None else np.asarray(admissible)
    j = coeffs.scales[sel].astype(float)
    w2 = coeffs.values[sel] ** 2
    if np.unique(j).size < 2:
        raise EstimationError("wavelet estimation needs at least two scales")
    if not np.any(w2 > 0):
        raise DegenerateInputError("all wavelet coefficients vanish")
    dlt = 2 * j.mean() if delta == "auto" else float(delta)
    log2 = math.log(2.0)
    logw2 = np.log(np.where(w2 > 0, w2, np.finfo(float).tiny))

    def W(d):
        z = -2 * d * j * log2 + logw2
        zmax = z.max()
        return zmax + np.log(np.sum(np.exp(z - zmax))) + dlt * d * log2

    grid = np.linspace(1e-6, 0.5 - 1e-6, 101)
    vals = np.array([W(d) for d in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(W, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    d = float(res.x)
    hit = _boundary(d, 0.0, 0.5, "wavelet contrast", tol=1e-3)
    js = np.unique(j)
    msq = np.array([w2[j == s].mean() for s in js])
    slope = np.polyfit(js, np.log2(msq), 1)[0]
    return EstimateReport("wavelet", d, None, 0, int(sel.sum()),
                          {"regression": float(slope / 2), "delta": dlt, "boundary": hit,
                           "scales": js.astype(int).tolist()})


# ---------------------------------------------------------------------------
# replication statistics
# ---------------------------------------------------------------------------


def t_value(estimates, d0: float) -> float:
    """sqrt(R) (mean - d0) / sd over R replications."""
    x = np.asarray(estimates, dtype=float)
    if x.size < 2:
        raise ParameterError("t-value needs at least 2 estimates")
    sd = x.std(ddof=1)
    if sd == 0:
        if x.mean() == d0:
            return 0.0
        raise DegenerateInputError("estimates have zero spread")
    return float(np.sqrt(x.size) * (x.mean() - d0) / sd)


def summarize(estimator: str, estimates, d0: float, **info) -> EstimateReport:
    """Batch report: mean, sd and t-value (None when R < 2)."""
    x = np.asarray(estimates, dtype=float)
    sd = float(x.std(ddof=1)) if x.size > 1 else None
    t = t_value(x, d0) if x.size > 1 else None
    return EstimateReport(estimator, float(x.mean()), info.get("m"), info.get("trim", 0),
                          info.get("n"), {"d0": d0}, x, float(x.mean()), sd, t)
