"""Seeded random variate generation.

Every sampler takes an ``rng`` argument which may be an :class:`RngStream`,
a :class:`numpy.random.Generator` or a plain integer seed.  Streams are keyed
by ``(seed, stream_id, path)`` through :class:`numpy.random.SeedSequence`, so
replication ``r`` draws the same numbers no matter which worker runs it or in
which order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConfigurationError, ParameterError

__all__ = [
    "RngStream",
    "as_generator",
    "StableParams",
    "sample_stable",
    "sample_positive_stable",
    "PositiveStableSampler",
    "sample_weibull",
    "sample_pareto",
    "Pareto",
    "Exponential",
    "Weibull",
    "Deterministic",
    "Normal",
    "Constant",
    "PositiveStable",
]


@dataclass(frozen=True)
class RngStream:
    """Value-type handle on an independent random stream.

    ``child(k)`` derives a sub-stream (e.g. latent vs. innovation series)
    that is independent of the parent and of its siblings.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=int(self.seed) & (2**64 - 1),
            spawn_key=(int(self.stream_id),) + tuple(int(p) for p in self.path),
        )

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def child(self, key: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + (int(key),))

    def replication(self, r: int) -> "RngStream":
        """Stream for replication ``r`` of an experiment seeded with ``seed``."""
        return RngStream(self.seed, int(r), self.path)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


# ---------------------------------------------------------------------------
# stable laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StableParams:
    """Stable law S_alpha(scale, beta, shift) in the Samorodnitsky-Taqqu (S1)
    parameterisation, the same one used by ``scipy.stats.levy_stable`` by
    default."""

    alpha: float
    beta: float = 0.0
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterError(f"stable alpha must lie in (0, 2], got {self.alpha}")
        if abs(self.beta) > 1.0:
            raise ParameterError(f"stable beta must lie in [-1, 1], got {self.beta}")
        if not self.scale > 0.0:
            raise ParameterError(f"stable scale must be positive, got {self.scale}")


def _standard_stable(alpha, beta, size, gen):
    # Chambers-Mallows-Stuck, Weron's form of the S1 parameterisation
    v = gen.uniform(-np.pi / 2, np.pi / 2, size)
    w = gen.standard_exponential(size)
    if alpha == 1.0:
        half_pi_bv = np.pi / 2 + beta * v
        return (2 / np.pi) * (
            half_pi_bv * np.tan(v)
            - beta * np.log((np.pi / 2) * w * np.cos(v) / half_pi_bv)
        )
    tan_pa = np.tan(np.pi * alpha / 2)
    b = np.arctan(beta * tan_pa) / alpha
    s = (1 + beta**2 * tan_pa**2) ** (1 / (2 * alpha))
    av = alpha * (v + b)
    return (
        s
        * np.sin(av)
        / np.cos(v) ** (1 / alpha)
        * (np.cos(v - av) / w) ** ((1 - alpha) / alpha)
    )


def sample_stable(params: StableParams, count: int, rng) -> np.ndarray:
    """I.i.d. draws from the alpha-stable law ``params``."""
    if count < 1:
        raise ParameterError("count must be >= 1")
    gen = as_generator(rng)
    a, b, c, mu = params.alpha, params.beta, params.scale, params.shift
    y = _standard_stable(a, b, int(count), gen)
    if a == 1.0:
        return c * y + (2 / np.pi) * b * c * np.log(c) + mu
    return c * y + mu


class PositiveStableSampler:
    """Streaming sampler for a stable law conditioned on positivity.

    Non-positive draws are rejected.  The acceptance rate seen so far is kept
    in :attr:`acceptance_rate`; a warm-up batch below ``min_acceptance`` is a
    configuration error (the law is not skewed enough to the right).
    """

    warmup = 10_000

    def __init__(self, params: StableParams, rng, multiplier: float = 1.0,
                 min_acceptance: float = 0.1):
        self.params = params
        self.multiplier = float(multiplier)
        self.gen = as_generator(rng)
        self.min_acceptance = min_acceptance
        self.drawn = 0
        self.accepted = 0
        self._pool = np.empty(0)
        self._refill(self.warmup)
        if self.acceptance_rate < min_acceptance:
            raise ConfigurationError(
                f"positive-stable acceptance rate {self.acceptance_rate:.3f} is below "
                f"{min_acceptance}; increase beta towards 1"
            )

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.drawn if self.drawn else float("nan")

    def _refill(self, want: int):
        x = sample_stable(self.params, want, self.gen)
        keep = x[x > 0]
        self.drawn += want
        self.accepted += keep.size
        self._pool = np.concatenate([self._pool, keep])

    def draw(self, count: int) -> np.ndarray:
        while self._pool.size < count:
            need = count - self._pool.size
            rate = max(self.acceptance_rate, self.min_acceptance)
            self._refill(int(need / rate * 1.05) + 64)
        out, self._pool = self._pool[:count], self._pool[count:]
        return self.multiplier * out


def sample_positive_stable(params: StableParams, count: int, rng,
                           multiplier: float = 1.0, return_rate: bool = False):
    """Stable draws conditioned to be positive, optionally multiplied by a
    constant.  With ``return_rate`` the acceptance rate is returned too."""
    if count < 1:
        raise ParameterError("count must be >= 1")
    sampler = PositiveStableSampler(params, rng, multiplier)
    x = sampler.draw(int(count))
    return (x, sampler.acceptance_rate) if return_rate else x


# ---------------------------------------------------------------------------
# Weibull and Pareto
# ---------------------------------------------------------------------------


def sample_weibull(shape: float, scale: float = 1.0, count: int = 1, rng=None,
                   unit_mean: bool = False) -> np.ndarray:
    """Weibull draws with survival exp(-(x/scale)**shape).

    ``unit_mean=True`` overrides ``scale`` with 1/Gamma(1 + 1/shape).
    """
    if not (shape > 0 and scale > 0):
        raise ParameterError("Weibull shape and scale must be positive")
    if unit_mean:
        scale = 1.0 / special.gamma(1.0 + 1.0 / shape)
    return scale * as_generator(rng).weibull(shape, int(count))


def sample_pareto(alpha: float, x_min: float = 1.0, count: int = 1, rng=None,
                  equilibrium: bool = False) -> np.ndarray:
    """Pareto draws with P(X > x) = (x/x_min)**-alpha, x >= x_min.

    With ``equilibrium=True`` draw from the integrated-tail law instead,
    which is the delay distribution of a stationary renewal process.
    """
    if not (alpha > 0 and x_min > 0):
        raise ParameterError("Pareto alpha and x_min must be positive")
    u = as_generator(rng).random(int(count))
    if not equilibrium:
        return x_min * (1.0 - u) ** (-1.0 / alpha)
    if alpha <= 1:
        raise ParameterError("equilibrium Pareto needs alpha > 1 (finite mean)")
    mean = alpha * x_min / (alpha - 1)
    knee = (alpha - 1) / alpha
    out = np.empty_like(u)
    lo = u < knee
    out[lo] = u[lo] * mean
    out[~lo] = x_min * (alpha * (1.0 - u[~lo])) ** (-1.0 / (alpha - 1))
    return out


# ---------------------------------------------------------------------------
# law objects used by the shot-noise and count simulators
# ---------------------------------------------------------------------------
#
# A duration law provides sample / mean / second_moment / excess_mean(t)
# (= E[(eta - t)_+]) / sample_length_biased / sample_equilibrium / isf.


class _Law:
    def sample(self, size, rng):
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError

    def sample_equilibrium(self, size, rng):
        gen = as_generator(rng)
        return gen.random(size) * self.sample_length_biased(size, gen)


@dataclass(frozen=True)
class Pareto(_Law):
    alpha: float
    x_min: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.x_min > 0):
            raise ParameterError("Pareto alpha and x_min must be positive")

    def sample(self, size, rng):
        return sample_pareto(self.alpha, self.x_min, size, rng)

    def mean(self):
        if self.alpha <= 1:
            return np.inf
        return self.alpha * self.x_min / (self.alpha - 1)

    def second_moment(self):
        if self.alpha <= 2:
            return np.inf
        return self.alpha * self.x_min**2 / (self.alpha - 2)

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.x_min, 1.0, (np.maximum(t, self.x_min) / self.x_min) ** -self.alpha)

    def excess_mean(self, t):
        t = np.asarray(t, dtype=float)
        a, xm = self.alpha, self.x_min
        if a <= 1:
            return np.full_like(t, np.inf)
        tail = xm**a * np.maximum(t, xm) ** (1 - a) / (a - 1)
        return np.where(t < xm, self.mean() - t, tail)

    def sample_length_biased(self, size, rng):
        if self.alpha <= 1:
            raise ParameterError("length-biased Pareto needs alpha > 1")
        return sample_pareto(self.alpha - 1, self.x_min, size, rng)

    def sample_equilibrium(self, size, rng):
        return sample_pareto(self.alpha, self.x_min, size, rng, equilibrium=True)

    def isf(self, p):
        return self.x_min * p ** (-1.0 / self.alpha)


@dataclass(frozen=True)
class Exponential(_Law):
    mu: float = 1.0  # mean

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError("exponential mean must be positive")

    def sample(self, size, rng):
        return as_generator(rng).exponential(self.mu, size)

    def mean(self):
        return self.mu

    def second_moment(self):
        return 2 * self.mu**2

    def survival(self, t):
        return np.exp(-np.maximum(np.asarray(t, dtype=float), 0) / self.mu)

    def excess_mean(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0, self.mu - t, self.mu * np.exp(-np.maximum(t, 0) / self.mu))

    def sample_length_biased(self, size, rng):
        return as_generator(rng).gamma(2.0, self.mu, size)

    def sample_equilibrium(self, size, rng):
        return self.sample(size, rng)

    def isf(self, p):
        return -self.mu * np.log(p)


@dataclass(frozen=True)
class Weibull(_Law):
    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ParameterError("Weibull shape and scale must be positive")

    @classmethod
    def unit_mean(cls, shape):
        return cls(shape, 1.0 / special.gamma(1.0 + 1.0 / shape))

    def sample(self, size, rng):
        return sample_weibull(self.shape, self.scale, size, rng)

    def mean(self):
        return self.scale * special.gamma(1 + 1 / self.shape)

    def second_moment(self):
        return self.scale**2 * special.gamma(1 + 2 / self.shape)

    def survival(self, t):
        t = np.maximum(np.asarray(t, dtype=float), 0)
        return np.exp(-((t / self.scale) ** self.shape))

    def excess_mean(self, t):
        t = np.maximum(np.asarray(t, dtype=float), 0)
        k, s = self.shape, self.scale
        z = (t / s) ** k
        return self.mean() * special.gammaincc(1 + 1 / k, z) - t * np.exp(-z)

    def sample_length_biased(self, size, rng):
        g = as_generator(rng).gamma(1 + 1 / self.shape, 1.0, size)
        return self.scale * g ** (1 / self.shape)

    def isf(self, p):
        return self.scale * (-np.log(p)) ** (1 / self.shape)


@dataclass(frozen=True)
class Deterministic(_Law):
    value: float

    def sample(self, size, rng):
        return np.full(int(size), float(self.value))

    def mean(self):
        return float(self.value)

    def second_moment(self):
        return float(self.value) ** 2

    def survival(self, t):
        return (np.asarray(t, dtype=float) < self.value).astype(float)

    def excess_mean(self, t):
        return np.maximum(self.value - np.asarray(t, dtype=float), 0.0)

    def sample_length_biased(self, size, rng):
        return self.sample(size, rng)

    def isf(self, p):
        return float(self.value)


@dataclass(frozen=True)
class PositiveStable(_Law):
    """Stable law conditioned on positivity, times ``multiplier``."""

    params: StableParams
    multiplier: float = 1.0

    def sample(self, size, rng):
        return sample_positive_stable(self.params, size, rng, self.multiplier)

    def sampler(self, rng) -> PositiveStableSampler:
        return PositiveStableSampler(self.params, rng, self.multiplier)

    def mean(self):
        from scipy import integrate, stats

        p = self.params
        dist = stats.levy_stable(p.alpha, p.beta, loc=p.shift, scale=p.scale)
        mass = dist.sf(0.0)
        body = integrate.quad(lambda x: dist.sf(x), 0, np.inf, limit=200)[0]
        return self.multiplier * body / mass


# shock laws


@dataclass(frozen=True)
class Normal(_Law):
    loc: float = 0.0
    sd: float = 1.0

    def sample(self, size, rng):
        return as_generator(rng).normal(self.loc, self.sd, size)

    def mean(self):
        return self.loc

    def second_moment(self):
        return self.sd**2 + self.loc**2


@dataclass(frozen=True)
class Constant(_Law):
    value: float = 1.0

    def sample(self, size, rng):
        return np.full(int(size), float(self.value))

    def mean(self):
        return float(self.value)

    def second_moment(self):
        return float(self.value) ** 2
