"""Conditionally heteroscedastic simulators: X_t = sigma_t * v_t.

* LMSV / LMSD: sigma_t^2 = exp(h_t) with h_t a Gaussian ARFIMA series
  independent of v_t.
* FIEGARCH: log sigma_t^2 = omega + sum_j a_j g(v_{t-j}),
  g(x) = theta x + gamma (|x| - E|v|).
* ARCH(inf): sigma_t^2 = omega + sum_j a_j X_{t-j}^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from .errors import ConfigurationError, ParameterError
from .fracsim import FracSpec, simulate_arfima
from .rand import Exponential, Normal, Weibull, as_generator

__all__ = [
    "LmsvSpec",
    "FiegarchSpec",
    "ArchInfSpec",
    "TruncationWarning",
    "simulate_lmsv_lmsd",
    "simulate_fiegarch",
    "simulate_arch_inf",
    "log_square_transform",
    "fractional_ma_weights",
    "fractional_ar_weights",
    "truncation_length",
    "expected_abs",
    "expected_log_square",
]

LOG_FLOOR = 1e-300
DEFAULT_TRUNCATION_TOL = 1e-6
DEFAULT_TRUNCATION_CAP = 2**16


class TruncationWarning(RuntimeWarning):
    """Hyperbolic weights were cut at the cap before reaching the tolerance."""


# ---------------------------------------------------------------------------
# innovation laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StudentT:
    """Student-t innovations rescaled to unit variance (df > 2)."""

    df: float

    def __post_init__(self):
        if not self.df > 2:
            raise ParameterError("Student-t innovations need df > 2")

    def sample(self, size, rng):
        t = as_generator(rng).standard_t(self.df, size)
        return t * np.sqrt((self.df - 2) / self.df)

    def mean(self):
        return 0.0


def expected_abs(law) -> float:
    """E|v| for a symmetric zero-mean innovation law."""
    if isinstance(law, Normal):
        return law.sd * np.sqrt(2 / np.pi)
    if isinstance(law, StudentT):
        nu = law.df
        return float(
            2 * np.sqrt(nu - 2) * np.exp(special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2))
            / (np.sqrt(np.pi) * (nu - 1))
        )
    raise ParameterError(f"no closed form E|v| for {type(law).__name__}")


def expected_log_square(law) -> float:
    """E[log v^2] for the supported LMSV innovation laws."""
    if isinstance(law, Normal) and law.loc == 0:
        return float(np.log(law.sd**2) - np.euler_gamma - np.log(2.0))
    raise ParameterError(f"no closed form E[log v^2] for {type(law).__name__}")


_POSITIVE_LAWS = (Weibull, Exponential)


def _innovation(name, shape=None):
    if not isinstance(name, str):
        return name
    if name == "gaussian":
        return Normal(0.0, 1.0)
    if name == "weibull":
        if shape is None:
            raise ParameterError("weibull innovations need a shape")
        return Weibull.unit_mean(shape)
    if name == "exponential":
        return Exponential(1.0)
    if name == "student-t":
        return StudentT(shape if shape is not None else 5.0)
    raise ParameterError(f"unknown innovation law {name!r}")


# ---------------------------------------------------------------------------
# LMSV / LMSD
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LmsvSpec:
    """Latent ARFIMA log-volatility plus multiplicative innovations.

    ``innovation`` is ``"gaussian"``, ``"student-t"``, ``"weibull"`` (unit
    mean, shape ``shape``), ``"exponential"`` or any law object from
    :mod:`longmem.rand`.
    """

    latent: FracSpec
    innovation: object = "gaussian"
    mode: str = "lmsv"
    shape: float | None = None
    law: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mode = self.mode.lower()
        if mode not in ("lmsv", "lmsd"):
            raise ParameterError(f"mode must be 'lmsv' or 'lmsd', got {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        law = _innovation(self.innovation, self.shape)
        object.__setattr__(self, "law", law)
        mean = law.mean()
        if mode == "lmsv" and abs(mean) > 1e-12:
            raise ParameterError("LMSV innovations must have zero mean")
        if mode == "lmsd":
            if not isinstance(law, _POSITIVE_LAWS) and not getattr(law, "positive", False):
                raise ParameterError("LMSD innovations must have positive support")
            if abs(mean - 1.0) > 1e-9:
                raise ParameterError(f"LMSD innovations must have unit mean, got {mean}")


def simulate_lmsv_lmsd(spec: LmsvSpec, n: int, rng, multiplier: float = 1.0):
    """Return ``(X, h)``; X_t = multiplier * exp(h_t / 2) * v_t.

    h and v come from independent child streams of ``rng`` (which must be an
    :class:`~longmem.rand.RngStream` or a seed so that children exist).
    """
    from .rand import RngStream

    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    h = simulate_arfima(spec.latent, n, stream.child(0))
    v = spec.law.sample(n, stream.child(1).generator())
    return multiplier * np.exp(h / 2) * v, h


# ---------------------------------------------------------------------------
# hyperbolic weights
# ---------------------------------------------------------------------------


def fractional_ma_weights(d: float, count: int) -> np.ndarray:
    """Coefficients psi_0..psi_{count-1} of (1 - B)^(-d)."""
    k = np.arange(1, count)
    return np.r_[1.0, np.cumprod((k - 1 + d) / k)]


def fractional_ar_weights(d: float, count: int) -> np.ndarray:
    """Coefficients pi_0..pi_{count-1} of (1 - B)^d."""
    k = np.arange(1, count)
    return np.r_[1.0, np.cumprod((k - 1 - d) / k)]


def truncation_length(weights_fn, tol=DEFAULT_TRUNCATION_TOL, cap=DEFAULT_TRUNCATION_CAP,
                      strict=False):
    """Smallest J with sum_{j>J} a_j^2 < tol * sum_j a_j^2.

    ``weights_fn(count)`` returns a_1..a_count.  The total is approximated
    with a power-law tail extrapolation beyond ``cap``.  Returns ``(J,
    achieved_ratio)``; if the tolerance cannot be met below ``cap`` a
    :class:`TruncationWarning` is issued (or :class:`ConfigurationError`
    raised with ``strict``).
    """
    a = np.asarray(weights_fn(cap), dtype=float)
    sq = a**2
    csum = np.cumsum(sq)
    # tail beyond cap from the local power-law decay of a_j^2
    lo, hi = cap // 2, cap - 1
    tail = 0.0
    if sq[hi] > 0 and sq[lo] > 0:
        slope = np.log(sq[hi] / sq[lo]) / np.log((hi + 1) / (lo + 1))
        if slope < -1:
            tail = sq[hi] * (hi + 1) / (-slope - 1)
        else:
            tail = np.inf
    total = csum[-1] + tail
    remaining = total - csum
    ok = np.nonzero(remaining < tol * total)[0]
    if ok.size:
        return int(ok[0] + 1), float(remaining[ok[0]] / total)
    ratio = float(tail / total) if np.isfinite(tail) else 1.0
    msg = (f"weights not truncatable to tolerance {tol:g} below cap {cap}; "
           f"tail mass ratio at the cap is {ratio:.3g}")
    if strict:
        raise ConfigurationError(msg)
    warnings.warn(msg, TruncationWarning)
    return cap, ratio


# ---------------------------------------------------------------------------
# FIEGARCH
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiegarchSpec:
    """FIEGARCH model.

    ``coeffs`` are a_1, a_2, ... (finite, used as given).  If omitted they are
    the (1 - B)^(-d) expansion a_j = psi_{j-1}, truncated per
    :func:`truncation_length`.
    """

    omega: float = 0.0
    theta: float = 0.0
    gamma_lev: float = 0.0
    d: float | None = None
    coeffs: tuple | None = None
    innovation: object = "gaussian"
    df: float | None = None
    tol: float = DEFAULT_TRUNCATION_TOL
    cap: int = DEFAULT_TRUNCATION_CAP
    strict: bool = False

    def __post_init__(self):
        if self.coeffs is None and self.d is None:
            raise ParameterError("FIEGARCH needs either coeffs or d")
        if self.d is not None and not 0 <= self.d < 0.5:
            raise ParameterError("FIEGARCH d must lie in [0, 0.5)")

    @property
    def law(self):
        return _innovation(self.innovation, self.df)

    def weights(self) -> np.ndarray:
        if self.coeffs is not None:
            return np.asarray(self.coeffs, dtype=float)
        J, _ = truncation_length(lambda c: fractional_ma_weights(self.d, c),
                                 self.tol, self.cap, self.strict)
        return fractional_ma_weights(self.d, J)

    def g(self, v):
        return self.theta * v + self.gamma_lev * (np.abs(v) - expected_abs(self.law))


def simulate_fiegarch(spec: FiegarchSpec, n: int, rng, burn_in: int | None = None):
    """Return ``(X, log_sigma2)`` of length ``n``."""
    a = spec.weights()
    J = a.size
    burn = J if burn_in is None else int(burn_in)
    if burn < J:
        raise ConfigurationError(f"burn-in {burn} shorter than truncation length {J}")
    gen = as_generator(rng)
    v = spec.law.sample(n + burn + 1, gen)
    gv = spec.g(v)
    # log sigma^2_t = omega + sum_{j=1}^J a_j g(v_{t-j})
    conv = signal.fftconvolve(gv, a)[: gv.size]
    log_s2 = np.empty_like(gv)
    log_s2[0] = spec.omega
    log_s2[1:] = spec.omega + conv[:-1]
    keep = slice(burn + 1, burn + 1 + n)
    log_s2 = log_s2[keep]
    return np.exp(log_s2 / 2) * v[keep], log_s2


# ---------------------------------------------------------------------------
# ARCH(inf)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArchInfSpec:
    omega: float
    coeffs: tuple

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", tuple(a))
        if self.omega < 0:
            raise ParameterError("ARCH omega must be nonnegative")
        if np.any(a < 0):
            raise ParameterError("ARCH weights must be nonnegative")
        if a.sum() >= 1:
            raise ParameterError(
                f"sum of ARCH weights is {a.sum():.4g} >= 1: no finite-variance stationary solution"
            )

    @classmethod
    def hyperbolic(cls, omega, d, total, tol=DEFAULT_TRUNCATION_TOL,
                   cap=DEFAULT_TRUNCATION_CAP):
        """Weights proportional to the AR(inf) coefficients of ARFIMA(0,d,0),
        a_j = total * (-pi_j), scaled to sum to ``total``."""
        if not 0 < d < 0.5:
            raise ParameterError("d must lie in (0, 0.5)")
        J, _ = truncation_length(lambda c: -fractional_ar_weights(d, c + 1)[1:], tol, cap)
        w = -fractional_ar_weights(d, J + 1)[1:]
        return cls(omega, tuple(total * w / w.sum()))


def simulate_arch_inf(spec: ArchInfSpec, n: int, rng, burn_in: int | None = None,
                      innovation="gaussian"):
    """Return ``(X, sigma2)``; innovations have zero mean and unit variance."""
    a = np.asarray(spec.coeffs, dtype=float)
    J = a.size
    burn = max(J, 1000) if burn_in is None else int(burn_in)
    law = _innovation(innovation)
    gen = as_generator(rng)
    total = n + burn
    v = law.sample(total, gen)
    x2 = np.zeros(total + J)  # J leading zeros are the pre-sample
    s2 = np.empty(total)
    ar = a[::-1]
    x = np.empty(total)
    for t in range(total):
        s2[t] = spec.omega + (ar @ x2[t : t + J] if J else 0.0)
        x[t] = np.sqrt(s2[t]) * v[t]
        x2[t + J] = x[t] ** 2
    return x[burn:], s2[burn:]


def log_square_transform(x) -> np.ndarray:
    """log X_t^2 with X_t^2 floored at 1e-300."""
    x = np.asarray(x, dtype=float)
    return np.log(np.maximum(x * x, LOG_FLOOR))
