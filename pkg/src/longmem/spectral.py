"""DFT and periodogram at the Fourier frequencies.

J_j = (2 pi n)^(-1/2) sum_{t=1}^n U_t exp(i t w_j),  I(w_j) = |J_j|^2,
w_j = 2 pi j / n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, ParameterError

__all__ = [
    "PeriodogramSet",
    "periodogram",
    "direct_periodogram",
    "dft",
    "normalized_dft_statistic",
    "LogLogPeriodogram",
    "averaged_loglog_periodogram",
    "fourier_frequencies",
]


def fourier_frequencies(n: int, include_nyquist: bool = False) -> np.ndarray:
    top = n // 2 if include_nyquist else (n - 1) // 2
    return 2 * np.pi * np.arange(1, top + 1) / n


@dataclass
class PeriodogramSet:
    """Ordinates at j = 1..floor((n-1)/2); ``nyquist`` holds I(pi) when n is
    even (kept apart so the usual range excludes it)."""

    frequencies: np.ndarray
    ordinates: np.ndarray
    n: int
    nyquist: float | None = None
    centered: bool = True

    def __len__(self):
        return self.ordinates.size

    def parseval_total(self) -> float:
        """(2 pi / n) * sum of I over j = 1..n-1."""
        total = 2 * self.ordinates.sum() + (self.nyquist or 0.0)
        return 2 * np.pi / self.n * total


def dft(series, center: bool = True) -> np.ndarray:
    """J_j for j = 0..n-1."""
    u = np.asarray(series, dtype=float)
    if center:
        u = u - u.mean()
    n = u.size
    # sum_{t=1}^n u_t e^{i t w_j} = e^{i w_j} * n * ifft(u)_j
    w = 2 * np.pi * np.arange(n) / n
    return np.exp(1j * w) * np.fft.ifft(u) * n / np.sqrt(2 * np.pi * n)


def periodogram(series, center: bool = True, include_nyquist: bool = False) -> PeriodogramSet:
    """Periodogram of ``series``; by default the sample mean is removed first."""
    u = np.asarray(series, dtype=float)
    n = u.size
    if n < 4:
        raise ParameterError("periodogram needs n >= 4")
    if center:
        u = u - u.mean()
    # |sum u_t e^{i t w}|^2 = |rfft(u)_j|^2
    f = np.fft.rfft(u)
    power = (f.real**2 + f.imag**2) / (2 * np.pi * n)
    top = (n - 1) // 2
    nyq = float(power[n // 2]) if n % 2 == 0 else None
    freqs = fourier_frequencies(n)
    ords = power[1 : top + 1]
    if include_nyquist and nyq is not None:
        freqs = np.r_[freqs, np.pi]
        ords = np.r_[ords, nyq]
    return PeriodogramSet(freqs, ords, n, nyq, center)


def direct_periodogram(series, j, center: bool = True) -> np.ndarray:
    """O(n * len(j)) evaluation of I(w_j) straight from the definition."""
    u = np.asarray(series, dtype=float)
    if center:
        u = u - u.mean()
    n = u.size
    t = np.arange(1, n + 1)
    j = np.atleast_1d(j)
    w = 2 * np.pi * j / n
    J = np.exp(1j * np.outer(w, t)) @ u / np.sqrt(2 * np.pi * n)
    return np.abs(J) ** 2


def normalized_dft_statistic(series, j: int, d: float) -> complex:
    """w_j^d * J_j for a single Fourier index ``j`` (no centring; for j >= 1
    the DFT ignores constants anyway)."""
    u = np.asarray(series, dtype=float)
    n = u.size
    if not 1 <= j < n / 2:
        raise ParameterError(f"Fourier index must satisfy 1 <= j < n/2, got {j}")
    w = 2 * np.pi * j / n
    t = np.arange(1, n + 1)
    J = np.sum(u * np.exp(1j * w * t)) / np.sqrt(2 * np.pi * n)
    return complex(w**d * J)


@dataclass
class LogLogPeriodogram:
    log10_frequency: np.ndarray
    mean_log10_ordinate: np.ndarray
    reps_used: np.ndarray
    excluded: int
    base: str = "log10"

    def slope(self, lo=None, hi=None) -> float:
        """Least-squares slope over frequencies in [lo, hi] (radians)."""
        f = 10**self.log10_frequency
        sel = np.ones(f.size, bool)
        if lo is not None:
            sel &= f >= lo * (1 - 1e-12)
        if hi is not None:
            sel &= f <= hi * (1 + 1e-12)
        return float(np.polyfit(self.log10_frequency[sel], self.mean_log10_ordinate[sel], 1)[0])

    def r_squared(self) -> float:
        x, y = self.log10_frequency, self.mean_log10_ordinate
        coef = np.polyfit(x, y, 1)
        resid = y - np.polyval(coef, x)
        return float(1 - resid.var() / y.var())

    def to_csv(self, path, meta=None):
        with open(path, "w") as fh:
            for k, v in (meta or {}).items():
                fh.write(f"# {k}={v}\n")
            fh.write(f"# log_base=10\n# excluded_zero_ordinates={self.excluded}\n")
            fh.write("log10_frequency,mean_log10_ordinate,reps_used\n")
            for a, b, c in zip(self.log10_frequency, self.mean_log10_ordinate, self.reps_used):
                fh.write(f"{float(a)!r},{float(b)!r},{int(c)}\n")


def averaged_loglog_periodogram(replicate, n: int, reps: int, center: bool = True,
                                series=None) -> LogLogPeriodogram:
    """Average of log10 I(w_j), j = 1..floor(n/2), over ``reps`` replications.

    ``replicate(r)`` returns series number ``r`` (length ``n``); alternatively
    pass an iterable of precomputed ``series``.  Zero ordinates are left out
    of the average for their frequency and counted in ``excluded``.
    """
    if reps < 2:
        raise ParameterError("need at least 2 replications")
    top = n // 2
    total = np.zeros(top)
    used = np.zeros(top, dtype=np.int64)
    source = series if series is not None else (replicate(r) for r in range(reps))
    k = 0
    for x in source:
        x = np.asarray(x, dtype=float)
        if x.size != n:
            raise EstimationError(f"replication {k} has length {x.size}, expected {n}")
        p = periodogram(x, center=center, include_nyquist=True)
        ords = p.ordinates[:top]
        ok = ords > 0
        total[ok] += np.log10(ords[ok])
        used += ok
        k += 1
    freqs = fourier_frequencies(n, include_nyquist=True)[:top]
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = total / used
    keep = used > 0
    excluded = int(k * top - used.sum())
    return LogLogPeriodogram(np.log10(freqs[keep]), mean[keep], used[keep], excluded)
