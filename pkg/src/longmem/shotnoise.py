"""Shot-noise processes X_t = sum_j eps_j 1{t_j <= t < t_j + eta_j}.

Four stationary specialisations are simulated: renewal-reward, ON-OFF,
error-duration (discrete time, t_j = j) and the infinite source Poisson
(M/G/inf) model.  Continuous-time paths keep their exact event list, so
integrals of the path are computed from the piecewise-constant structure
rather than by quadrature on the sampling grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, ParameterError, UnsupportedError
from .rand import Constant, Deterministic, Exponential, Pareto, RngStream, as_generator

__all__ = [
    "MarkedEventStream",
    "ShotNoisePath",
    "ShotNoiseModel",
    "JointShockDuration",
    "ShotNoiseCovariance",
    "simulate_renewal_reward",
    "simulate_on_off",
    "simulate_error_duration",
    "simulate_infinite_source_poisson",
    "theoretical_shotnoise_acvf",
    "superpose_partial_sums",
    "stationarity_window",
    "empirical_acvf",
]

WINDOW_PROB = 1e-6
MAX_WINDOW_EVENTS = 50_000_000


@dataclass
class MarkedEventStream:
    births: np.ndarray
    shocks: np.ndarray
    durations: np.ndarray

    def __post_init__(self):
        self.births = np.asarray(self.births, dtype=float)
        self.shocks = np.asarray(self.shocks, dtype=float)
        self.durations = np.asarray(self.durations, dtype=float)
        if not (self.births.shape == self.shocks.shape == self.durations.shape):
            raise ParameterError("births, shocks and durations must have equal length")
        if self.births.size > 1 and np.any(np.diff(self.births) <= 0):
            raise ParameterError("birth times must be strictly increasing")
        if np.any(self.durations <= 0):
            raise ParameterError("durations must be positive")

    def __len__(self):
        return self.births.size

    @property
    def ends(self):
        return self.births + self.durations

    def value_at(self, times) -> np.ndarray:
        """Sum of shocks alive at each time in ``times``."""
        times = np.asarray(times, dtype=float)
        order = np.argsort(self.births, kind="stable")
        cb = np.r_[0.0, np.cumsum(self.shocks[order])]
        ends = self.ends
        eorder = np.argsort(ends, kind="stable")
        ce = np.r_[0.0, np.cumsum(self.shocks[eorder])]
        born = cb[np.searchsorted(self.births[order], times, side="right")]
        dead = ce[np.searchsorted(ends[eorder], times, side="right")]
        return born - dead

    def primitive(self, x) -> np.ndarray:
        """F(x) = int_{-inf}^x X_s ds, exactly, for an array of points."""
        x = np.asarray(x, dtype=float)

        def ramp(starts):
            order = np.argsort(starts, kind="stable")
            s = starts[order]
            e = self.shocks[order]
            c_e = np.r_[0.0, np.cumsum(e)]
            c_es = np.r_[0.0, np.cumsum(e * s)]
            k = np.searchsorted(s, x, side="left")
            # sum_{s_j < x} eps_j (x - s_j)
            return x * c_e[k] - c_es[k]

        return ramp(self.births) - ramp(self.ends)

    def integral(self, a, b) -> np.ndarray:
        """int_a^b X_s ds for paired arrays ``a``, ``b``."""
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        both = self.primitive(np.r_[a.ravel(), b.ravel()])
        return (both[a.size :] - both[: a.size]).reshape(a.shape)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["birth_time", "shock", "duration"])
            for row in zip(self.births, self.shocks, self.durations):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2])


@dataclass
class ShotNoisePath:
    grid: np.ndarray
    values: np.ndarray
    kind: str
    events: MarkedEventStream | None = None
    horizon: float = field(default=np.nan)

    def integral(self, a, b):
        if self.events is None:
            raise UnsupportedError("exact integrals need the event list")
        return self.events.integral(a, b)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _finite_mean(law, what):
    m = law.mean()
    if not np.isfinite(m):
        raise ParameterError(f"{what} law has infinite mean")
    return m


def _grid(T, delta):
    if not (T > 0 and delta > 0):
        raise ParameterError("T and delta must be positive")
    return np.arange(int(np.floor(T / delta + 1e-9))) * delta


def _renewal_points(first, law, T, gen):
    """Points first, first + eta_1, ... up to and including the first > T."""
    mean = _finite_mean(law, "duration")
    pts = [np.array([first])]
    last = first
    chunk = max(16, int(1.2 * (T - first) / mean) + 16)
    durs = []
    while last <= T:
        d = law.sample(chunk, gen)
        durs.append(d)
        c = last + np.cumsum(d)
        pts.append(c)
        last = c[-1]
    births = np.concatenate(pts)
    durations = np.concatenate(durs) if durs else np.empty(0)
    stop = np.searchsorted(births, T, side="right")
    return births[: stop + 1], durations[: stop + 1]


def stationarity_window(duration_law, prob=WINDOW_PROB) -> float:
    """Pre-sample window W = duration quantile at level 1 - prob."""
    if isinstance(duration_law, (Deterministic, Constant)):
        return float(duration_law.mean())
    return float(duration_law.isf(prob))


# ---------------------------------------------------------------------------
# simulators
# ---------------------------------------------------------------------------


def simulate_renewal_reward(duration_law, shock_law, T, delta, rng) -> ShotNoisePath:
    """Stationary renewal-reward path X_t = eps_{N(t)} on [0, T)."""
    gen = as_generator(rng)
    _finite_mean(duration_law, "duration")
    # interval straddling 0: length-biased length, uniform position
    L = float(duration_law.sample_length_biased(1, gen)[0])
    first = -gen.random() * L
    births, durations = _renewal_points(first + L, duration_law, T, gen)
    births = np.r_[first, births[:-1]]
    durations = np.r_[L, durations[: births.size - 1]]
    shocks = shock_law.sample(births.size, gen)
    events = MarkedEventStream(births, shocks, durations)
    grid = _grid(T, delta)
    idx = np.searchsorted(births, grid, side="right") - 1
    return ShotNoisePath(grid, shocks[idx], "renewal-reward", events, float(T))


def simulate_on_off(on_law, off_law, T, delta, rng) -> ShotNoisePath:
    """Stationary ON-OFF 0/1 path on [0, T)."""
    gen = as_generator(rng)
    m_on = _finite_mean(on_law, "ON")
    m_off = _finite_mean(off_law, "OFF")
    p_on = m_on / (m_on + m_off)
    births, durs = [], []
    if gen.random() < p_on:
        L = float(on_law.sample_length_biased(1, gen)[0])
        start = -gen.random() * L
        births.append(start)
        durs.append(L)
        t = start + L + float(off_law.sample(1, gen)[0])
    else:
        L = float(off_law.sample_length_biased(1, gen)[0])
        t = L - gen.random() * L
    chunk = max(16, int(1.2 * T / (m_on + m_off)) + 16)
    while t <= T:
        on = on_law.sample(chunk, gen)
        off = off_law.sample(chunk, gen)
        starts = t + np.r_[0.0, np.cumsum(on + off)[:-1]]
        keep = starts <= T
        births.extend(starts[keep])
        durs.extend(on[keep])
        t = starts[-1] + on[-1] + off[-1]
    births = np.asarray(births)
    durs = np.asarray(durs)
    events = MarkedEventStream(births, np.ones_like(births), durs)
    grid = _grid(T, delta)
    idx = np.searchsorted(births, grid, side="right") - 1
    on_now = (idx >= 0) & (grid < births[np.maximum(idx, 0)] + durs[np.maximum(idx, 0)])
    return ShotNoisePath(grid, on_now.astype(float), "on-off", events, float(T))


def simulate_error_duration(shock_law, duration_law, n, rng, max_window=10**7,
                            window_prob=WINDOW_PROB) -> np.ndarray:
    """Discrete-time X_t = sum_{j <= t} eps_j 1{t < j + eta_j}, t = 1..n.

    Shocks born in the pre-sample window 1-W..0 are included, with W the
    1 - ``window_prob`` duration quantile.
    """
    gen = as_generator(rng)
    _finite_mean(duration_law, "duration")
    W = int(np.ceil(stationarity_window(duration_law, window_prob)))
    if W > max_window:
        raise ConfigurationError(
            f"stationarity window {W} exceeds the limit {max_window}"
        )
    W = max(W, 1)
    total = n + W
    j = np.arange(1 - W, n + 1)
    eps = shock_law.sample(total, gen)
    eta = duration_law.sample(total, gen)
    # shock j is alive at integer t with j <= t <= j + ceil(eta_j) - 1
    life = np.ceil(eta).astype(np.int64)
    diff = np.zeros(total + 1)
    np.add.at(diff, np.arange(total), eps)
    stop = np.minimum(np.arange(total) + life, total)
    np.add.at(diff, stop, -eps)
    x = np.cumsum(diff[:total])
    return x[j >= 1]


def simulate_infinite_source_poisson(rate, duration_law, shock_law, T, delta, rng,
                                     window_prob=WINDOW_PROB) -> ShotNoisePath:
    """M/G/inf input: Poisson(rate) births on [-W, T) carrying shocks."""
    if not rate > 0:
        raise ParameterError("rate must be positive")
    gen = as_generator(rng)
    _finite_mean(duration_law, "duration")
    W = stationarity_window(duration_law, window_prob)
    expected = rate * (W + T)
    if expected > MAX_WINDOW_EVENTS:
        raise ConfigurationError(
            f"pre-sample window {W:.3g} needs ~{expected:.3g} events; limit {MAX_WINDOW_EVENTS}"
        )
    count = gen.poisson(expected)
    births = np.sort(gen.uniform(-W, T, count))
    if isinstance(shock_law, JointShockDuration):
        shocks, durations = shock_law.sample(count, gen)
    else:
        durations = duration_law.sample(count, gen)
        shocks = shock_law.sample(count, gen)
    # drop shocks that died before time 0
    alive = births + durations > 0
    events = MarkedEventStream(births[alive], shocks[alive], durations[alive])
    grid = _grid(T, delta)
    return ShotNoisePath(grid, events.value_at(grid), "poisson", events, float(T))


@dataclass(frozen=True)
class JointShockDuration:
    """Dependent (shock, duration) pairs for the Poisson model.

    ``sampler(size, gen)`` returns ``(shocks, durations)``;
    ``mixed_moment(t)`` returns E[eps^2 (eta - t)_+] and ``mean_product``
    E[eps eta], when known.
    """

    sampler: object
    mixed_moment: object = None
    mean_product: float | None = None

    def sample(self, size, gen):
        return self.sampler(size, gen)


# ---------------------------------------------------------------------------
# second-order theory
# ---------------------------------------------------------------------------


class ShotNoiseCovariance(NamedTuple):
    value: float
    asymptotic: bool


def _discrete_excess(duration_law, t):
    # sum_{k>=0} P(eta > t + k) for integer lag t
    if isinstance(duration_law, Pareto):
        from scipy.special import zeta

        a, xm = duration_law.alpha, duration_law.x_min
        if t >= xm:
            return xm**a * zeta(a, t)
        head = np.arange(t, np.ceil(xm))
        return np.sum(duration_law.survival(head)) + xm**a * zeta(a, head[-1] + 1)
    k = np.arange(0, 10**6)
    return float(np.sum(duration_law.survival(t + k)))


def theoretical_shotnoise_acvf(duration_law, shock_law, rate, t, process="poisson",
                               ) -> ShotNoiseCovariance:
    """cov(X_0, X_t) for the stationary shot-noise ``process``.

    Exact branch: rate * E[eps^2 (eta - t)_+] when births are Poisson, or
    when shocks are centred and independent of durations (renewal-reward
    uses var(eps) in place of E[eps^2]; the error-duration process uses the
    lattice sum over integer birth times).  ON-OFF, and non-centred shocks
    on a non-Poisson point process, fall back to the regularly varying
    asymptote rate / (alpha - 1) * E[eps^2] * x_min^alpha * t^(1 - alpha),
    flagged as asymptotic.
    """
    t = float(t)
    if isinstance(shock_law, JointShockDuration):
        if process != "poisson" or shock_law.mixed_moment is None:
            raise UnsupportedError("dependent shocks need the Poisson model and a mixed moment")
        return ShotNoiseCovariance(rate * float(shock_law.mixed_moment(t)), False)
    m2 = shock_law.second_moment()
    if process == "poisson":
        return ShotNoiseCovariance(rate * m2 * float(duration_law.excess_mean(t)), False)
    if process == "renewal-reward":
        rate = 1.0 / duration_law.mean()
        var = m2 - shock_law.mean() ** 2
        return ShotNoiseCovariance(rate * var * float(duration_law.excess_mean(t)), False)
    if process == "error-duration":
        if abs(shock_law.mean()) < 1e-15:
            return ShotNoiseCovariance(m2 * float(_discrete_excess(duration_law, t)), False)
    if isinstance(duration_law, Pareto) and 1 < duration_law.alpha < 2 and t > 0:
        a, xm = duration_law.alpha, duration_law.x_min
        return ShotNoiseCovariance(rate / (a - 1) * m2 * xm**a * t ** (1 - a), True)
    raise UnsupportedError(
        f"no covariance formula for process={process!r} with {type(duration_law).__name__} durations"
    )


def empirical_acvf(x, max_lag, mean=None) -> np.ndarray:
    """Sample autocovariances at lags 0..max_lag (divisor n)."""
    x = np.asarray(x, dtype=float)
    mu = x.mean() if mean is None else mean
    y = x - mu
    n = y.size
    f = np.fft.rfft(y, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[: max_lag + 1]
    return acf / n


# ---------------------------------------------------------------------------
# superposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShotNoiseModel:
    """One of ``renewal-reward``, ``on-off``, ``poisson``."""

    kind: str
    duration: object
    shock: object = Constant(1.0)
    rate: float = 1.0
    off: object = None

    def simulate(self, T, delta, rng) -> ShotNoisePath:
        if self.kind == "renewal-reward":
            return simulate_renewal_reward(self.duration, self.shock, T, delta, rng)
        if self.kind == "on-off":
            return simulate_on_off(self.duration, self.off or Exponential(1.0), T, delta, rng)
        if self.kind == "poisson":
            return simulate_infinite_source_poisson(self.rate, self.duration, self.shock, T,
                                                    delta, rng)
        raise ParameterError(f"unknown shot-noise kind {self.kind!r}")

    def mean(self) -> float:
        if self.kind == "renewal-reward":
            return self.shock.mean()
        if self.kind == "on-off":
            m_on = self.duration.mean()
            return m_on / (m_on + (self.off or Exponential(1.0)).mean())
        if isinstance(self.shock, JointShockDuration):
            return self.rate * self.shock.mean_product
        return self.rate * self.shock.mean() * self.duration.mean()


def superpose_partial_sums(model: ShotNoiseModel, M: int, T: float, t_grid, rng) -> np.ndarray:
    """A_{M,T}(t) = sum_{i<=M} int_0^{Tt} (X^(i)_s - E X) ds for t in ``t_grid``.

    Copy ``i`` is driven by ``rng.child(i)``.
    """
    if M < 1:
        raise ParameterError("M must be >= 1")
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    t_grid = np.asarray(t_grid, dtype=float)
    upper = T * t_grid
    horizon = float(upper.max())
    mu = model.mean()
    total = np.zeros_like(t_grid)
    for i in range(M):
        path = model.simulate(horizon, horizon, stream.child(i).generator())
        total += path.integral(np.zeros_like(upper), upper) - mu * upper
    return total
