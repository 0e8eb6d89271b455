"""Exact simulation of Gaussian long-memory series.

Fractional noise (ARFIMA(0,d,0)) is drawn exactly by circulant embedding of
its autocovariance; short-memory ARMA dynamics are applied afterwards as a
recursive filter with a burn-in.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from .errors import EmbeddingWarning, NumericalError, ParameterError
from .rand import as_generator

__all__ = [
    "FracSpec",
    "AcvfTable",
    "arfima0d0_acvf",
    "arfima_acvf",
    "ma_inf_weights",
    "simulate_fractional_noise",
    "simulate_arfima",
    "circulant_size",
]


def _check_d(d):
    if not -0.5 < d < 0.5:
        raise ParameterError(f"memory parameter d must lie in (-0.5, 0.5), got {d}")


@dataclass(frozen=True)
class FracSpec:
    """ARFIMA(p, d, q) with AR polynomial 1 - sum ar_k B^k and MA polynomial
    1 + sum ma_k B^k."""

    d: float
    ar: tuple = ()
    ma: tuple = ()
    innovation_sd: float = 1.0

    def __post_init__(self):
        _check_d(self.d)
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(b) for b in self.ma))
        if self.innovation_sd < 0:
            raise ParameterError("innovation_sd must be nonnegative")
        if self.ar:
            # roots of 1 - a1 z - ... - ap z^p must lie outside the unit circle
            roots = np.roots(np.r_[-np.array(self.ar)[::-1], 1.0])
            if np.any(np.abs(roots) <= 1.0):
                raise ParameterError(f"AR polynomial {self.ar} is not stationary")

    @property
    def burn_in(self) -> int:
        if not self.ar and not self.ma:
            return 0
        return 10 * max(len(self.ar), len(self.ma)) + 1000


@dataclass
class AcvfTable:
    """Autocovariances gamma(0..K) of fractional noise with parameter ``d``."""

    values: np.ndarray
    d: float
    sigma: float = 1.0
    _extendable: bool = field(default=True, repr=False)

    @property
    def max_lag(self) -> int:
        return self.values.size - 1

    def extended(self, max_lag: int) -> np.ndarray:
        if max_lag <= self.max_lag:
            return self.values[: max_lag + 1]
        if not self._extendable:
            raise ParameterError(f"autocovariance table only covers {self.max_lag} lags")
        return arfima0d0_acvf(self.d, max_lag, self.sigma).values


def arfima0d0_acvf(d: float, max_lag: int, sigma: float = 1.0) -> AcvfTable:
    """Autocovariance of ARFIMA(0,d,0) with innovation s.d. ``sigma``."""
    _check_d(d)
    if max_lag < 0:
        raise ParameterError("max_lag must be >= 0")
    g = np.empty(max_lag + 1)
    g[0] = sigma**2 * np.exp(special.gammaln(1 - 2 * d) - 2 * special.gammaln(1 - d))
    k = np.arange(1, max_lag + 1)
    g[1:] = g[0] * np.cumprod((k - 1 + d) / (k - d))
    return AcvfTable(g, d, sigma)


def ma_inf_weights(ar=(), ma=(), count: int = 200) -> np.ndarray:
    """First ``count`` MA(inf) weights psi_k of the ARMA filter."""
    impulse = np.zeros(count)
    impulse[0] = 1.0
    return signal.lfilter(np.r_[1.0, ma], np.r_[1.0, -np.asarray(ar, dtype=float)], impulse)


def arfima_acvf(spec: FracSpec, max_lag: int, tol: float = 1e-15) -> np.ndarray:
    """Autocovariances of the ARFIMA(p,d,q) process ``spec``.

    gamma(h) = sum_{i,j} psi_i psi_j gamma_fn(h + i - j) where psi are the
    ARMA MA(inf) weights, truncated once |psi| falls below ``tol``.
    """
    psi = ma_inf_weights(spec.ar, spec.ma, 4096)
    big = np.nonzero(np.abs(psi) > tol)[0]
    psi = psi[: big[-1] + 1] if big.size else psi[:1]
    L = psi.size
    fn = arfima0d0_acvf(spec.d, max_lag + L, spec.innovation_sd).values
    # w(k) = sum_i psi_i psi_{i+k}, k = -(L-1)..(L-1)
    w = np.correlate(psi, psi, mode="full")
    lags = np.arange(-(L - 1), L)
    h = np.arange(max_lag + 1)[:, None]
    return (fn[np.abs(h + lags)] * w).sum(axis=1)


def circulant_size(n: int) -> int:
    """Smallest power of two >= 2(n-1)."""
    return 1 << max(1, int(np.ceil(np.log2(max(2 * (n - 1), 2)))))


def _embedding_eigenvalues(gamma, M):
    half = M // 2
    row = np.empty(M)
    row[: half + 1] = gamma[: half + 1]
    row[half + 1 :] = gamma[1:half][::-1]
    lam = np.fft.rfft(row).real
    top = lam.max()
    neg = lam.min()
    if neg < 0:
        if -neg > 1e-8 * top:
            raise NumericalError(
                f"circulant embedding is not nonnegative definite "
                f"(min eigenvalue {neg:.3e}, max {top:.3e})"
            )
        warnings.warn(
            f"clipped negative embedding eigenvalues (min {neg:.3e})", EmbeddingWarning
        )
        lam = np.maximum(lam, 0.0)
    return lam


def simulate_fractional_noise(acvf: AcvfTable, n: int, rng, size=None) -> np.ndarray:
    """Exact zero-mean Gaussian sample of length ``n`` with covariance ``acvf``.

    ``size`` draws that many independent rows at once (shape ``(size, n)``).
    """
    if n < 2:
        raise ParameterError("n must be >= 2")
    gen = as_generator(rng)
    M = circulant_size(n)
    gamma = acvf.extended(M // 2)
    lam = _embedding_eigenvalues(gamma, M)
    rows = 1 if size is None else int(size)
    # real-valued construction: X = FFT(sqrt(lam/M) * Z) with Hermitian Z
    scale = np.sqrt(lam / M)
    half = M // 2
    z = gen.standard_normal((rows, half + 1)) + 1j * gen.standard_normal((rows, half + 1))
    z[:, 0] = np.sqrt(2) * z[:, 0].real
    z[:, half] = np.sqrt(2) * z[:, half].real
    # irfft(v) * M == sum_k v_k e^{2 pi i k t / M} with Hermitian completion
    x = np.fft.irfft(scale * z / np.sqrt(2), n=M, axis=1) * M
    out = x[:, :n]
    return out[0] if size is None else out


def simulate_arfima(spec: FracSpec, n: int, rng, size=None) -> np.ndarray:
    """ARFIMA(p,d,q) sample: fractional noise pushed through the ARMA filter.

    Without AR/MA terms this is exactly :func:`simulate_fractional_noise`
    under the same ``rng``.
    """
    if n < 2:
        raise ParameterError("n must be >= 2")
    burn = spec.burn_in
    acvf = arfima0d0_acvf(spec.d, 0, spec.innovation_sd)
    if spec.innovation_sd == 0:
        return np.zeros(n) if size is None else np.zeros((int(size), n))
    core = simulate_fractional_noise(acvf, n + burn, rng, size)
    if burn == 0:
        return core
    b = np.r_[1.0, spec.ma]
    a = np.r_[1.0, -np.asarray(spec.ar)]
    return signal.lfilter(b, a, core, axis=-1)[..., burn:]
