"""Counts of events per clock-time interval, and variance-time diagnostics.

Event times are cumulative sums of durations starting from time 0.  Interval
t' covers ((t'-1) dt, t' dt], so an event exactly on a boundary belongs to the
earlier interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, DegenerateInputError, ParameterError

__all__ = [
    "CountSeries",
    "VarianceTime",
    "durations_to_counts",
    "counts_from_stream",
    "variance_time_curve",
]


@dataclass
class CountSeries:
    counts: np.ndarray
    delta_t: float
    origin: float = 0.0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(self.counts < 0):
            raise ParameterError("counts must be nonnegative")

    def __len__(self):
        return self.counts.size

    def rebin(self, factor: int) -> "CountSeries":
        """Counts over intervals ``factor`` times wider (trailing remainder dropped)."""
        k = len(self) // factor
        c = self.counts[: k * factor].reshape(k, factor).sum(axis=1)
        return CountSeries(c, self.delta_t * factor, self.origin)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(f"# delta_t={float(self.delta_t)!r}\n# origin={float(self.origin)!r}\n")
            fh.write("interval_index,count\n")
            for i, c in enumerate(self.counts, start=1):
                fh.write(f"{i},{int(c)}\n")

    @classmethod
    def from_csv(cls, path):
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key.strip()] = float(val)
                elif line[0].isdigit():
                    rows.append(int(line.split(",")[1]))
        return cls(np.array(rows), meta["delta_t"], meta.get("origin", 0.0))


def _bin_events(times, delta_t, n_intervals):
    idx = np.ceil(times / delta_t).astype(np.int64)
    idx = idx[(idx >= 1) & (idx <= n_intervals)]
    return np.bincount(idx, minlength=n_intervals + 1)[1:]


def durations_to_counts(durations, delta_t: float, n_intervals: int) -> CountSeries:
    """Counts per interval of width ``delta_t`` from a duration sequence."""
    if not delta_t > 0 or n_intervals < 1:
        raise ParameterError("delta_t must be positive and n_intervals >= 1")
    tau = np.asarray(durations, dtype=float)
    if np.any(tau <= 0):
        raise ParameterError("durations must be positive")
    times = np.cumsum(tau)
    horizon = delta_t * n_intervals
    covered = times[-1] if times.size else 0.0
    if covered < horizon:
        mean = tau.mean() if tau.size else np.nan
        need = math.ceil((horizon - covered) / mean) if np.isfinite(mean) else None
        raise CoverageError(
            f"durations cover {covered:.6g} of {horizon:.6g} time units; "
            f"about {need} more durations are needed",
            shortfall=need,
        )
    return CountSeries(_bin_events(times, delta_t, n_intervals), float(delta_t))


def counts_from_stream(draw, delta_t: float, n_intervals: int, chunk: int) -> CountSeries:
    """Counts from durations produced in chunks by ``draw(size)``.

    Only one chunk of durations is held at a time.
    """
    if not delta_t > 0 or n_intervals < 1 or chunk < 1:
        raise ParameterError("delta_t, n_intervals and chunk must be positive")
    horizon = delta_t * n_intervals
    counts = np.zeros(n_intervals, dtype=np.int64)
    clock = 0.0
    while clock <= horizon:
        times = clock + np.cumsum(draw(chunk))
        counts += _bin_events(times, delta_t, n_intervals)
        clock = times[-1]
    return CountSeries(counts, float(delta_t))


@dataclass
class VarianceTime:
    block_sizes: np.ndarray
    variances: np.ndarray
    hurst: float


def variance_time_curve(counts, block_sizes, mean: float | None = None) -> VarianceTime:
    """Variance of counts aggregated over non-overlapping blocks, per block size.

    Hurst estimate = half the least-squares slope of log variance on log
    block size.  ``mean`` is the known per-interval mean count; if omitted
    the sample mean is used.
    """
    c = np.asarray(counts.counts if isinstance(counts, CountSeries) else counts, dtype=float)
    b = np.asarray(sorted(set(int(k) for k in block_sizes)))
    if b.size < 3:
        raise ParameterError("need at least 3 distinct block sizes")
    if b.min() < 1 or b.max() > c.size / 10:
        raise ParameterError(f"block sizes must lie in [1, n/10] = [1, {c.size // 10}]")
    if np.all(c == c[0]):
        raise DegenerateInputError("counts are constant")
    v = np.empty(b.size)
    for i, k in enumerate(b):
        m = c.size // k
        sums = c[: m * k].reshape(m, k).sum(axis=1)
        if mean is None:
            v[i] = sums.var(ddof=1)
        else:
            v[i] = np.mean((sums - mean * k) ** 2)
    slope = np.polyfit(np.log(b), np.log(v), 1)[0]
    return VarianceTime(b, v, float(slope / 2))
