"""Time-series statistics for simulated markets.

Log returns, complementary cumulative distributions, Hill tail-index
estimation, autocorrelations, conditional return fluctuations, and a
uniformity test for the demand histogram.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateDistributionError,
    EmptySeriesError,
    InsufficientDataError,
)
from .market import Trajectory


@dataclass
class ReturnSeries:
    """Log returns r_t = log(p_t / p_{t-1}) with undefined steps counted.

    A step is undefined when either endpoint demand is 0 or N (price zero or
    undefined there); such steps are excluded and counted, never zeroed.
    """

    values: np.ndarray
    skipped: int

    def __len__(self) -> int:
        return len(self.values)


def log_returns(trajectory: Trajectory) -> ReturnSeries:
    """Log returns over consecutive demand pairs with both demands in (0, N)."""
    d = np.asarray(trajectory.demands)
    if len(d) < 2:
        raise ValueError("trajectory must contain at least 2 states")
    n = trajectory.n_total
    usable = (d > 0) & (d < n)
    if int(usable.sum()) < 2:
        raise EmptySeriesError("fewer than 2 usable prices in trajectory")
    a = d[:-1]
    b = d[1:]
    valid = usable[:-1] & usable[1:]
    av = a[valid].astype(float)
    bv = b[valid].astype(float)
    values = np.log(bv / (n - bv)) - np.log(av / (n - av))
    return ReturnSeries(values=values, skipped=int((~valid).sum()))


def linearized_return(d: int, d_next: int, n_total: int) -> float:
    """First-order return approximation (d_next - d) * (1/d - 1/(N-d))."""
    if d <= 0 or d >= n_total:
        raise ValueError(f"d must lie strictly inside (0, {n_total})")
    return (d_next - d) * (1.0 / d - 1.0 / (n_total - d))


class CcdfResult(NamedTuple):
    thresholds: np.ndarray
    probabilities: np.ndarray


def ccdf(magnitudes) -> CcdfResult:
    """Empirical P(X >= x) at each distinct magnitude, non-increasing from 1."""
    x = np.sort(np.asarray(magnitudes, dtype=float))
    if len(x) == 0:
        raise InsufficientDataError("ccdf of an empty sample")
    thresholds = np.unique(x)
    n = len(x)
    probs = (n - np.searchsorted(x, thresholds, side="left")) / n
    return CcdfResult(thresholds=thresholds, probabilities=probs)


@dataclass
class TailFit:
    """Hill estimate of the cumulative-distribution tail exponent."""

    xi: float
    density_exponent: float
    tail_fraction: float
    n_tail: int
    standard_error: float


def hill_tail_exponent(magnitudes, tail_fraction: float = 0.01) -> TailFit:
    """Hill estimator over the top ``tail_fraction`` order statistics.

    xi = k / sum_{i=1}^{k} log(x_(i) / x_(k+1)) with x_(1) >= ... the
    descending order statistics; the density exponent is xi + 1.
    """
    if not 0 < tail_fraction <= 0.1:
        raise ValueError("tail_fraction must lie in (0, 0.1]")
    x = np.asarray(magnitudes, dtype=float)
    x = x[x > 0]
    k = int(np.floor(len(x) * tail_fraction))
    if k < 100:
        raise InsufficientDataError(
            f"only {k} tail points; at least 100 required for a valid fit"
        )
    top = np.partition(x, len(x) - (k + 1))[len(x) - (k + 1):]
    threshold = top.min()
    if threshold <= 0:
        raise DegenerateDistributionError("tail threshold is zero")
    logs = np.log(np.sort(top)[::-1][:k] / threshold)
    xi = k / float(logs.sum())
    return TailFit(
        xi=xi,
        density_exponent=xi + 1.0,
        tail_fraction=tail_fraction,
        n_tail=k,
        standard_error=float(xi / np.sqrt(k)),
    )


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelation with biased (1/T) normalization, lags 0..max_lag."""
    x = np.asarray(series, dtype=float)
    if len(x) <= 10 * max_lag:
        raise ValueError("series length must exceed 10 * max_lag")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise DegenerateDistributionError("zero-variance series")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for lag in range(1, max_lag + 1):
        out[lag] = float(np.dot(xc[:-lag], xc[lag:])) / denom
    return out


class BinStat(NamedTuple):
    d_mean: float
    mean_r2: float
    count: int


def conditional_return_variance(
    trajectory: Trajectory,
    n_bins: int = 40,
    require_occupancy: tuple[int, int] | None = None,
) -> list[BinStat]:
    """Mean squared return per logarithmic bin of the previous demand.

    Bins cover d in (0, N/2]; each squared return is attributed to the
    demand it was conditioned on. Supports the <r^2|d> ~ 1/d scaling test.
    ``require_occupancy=(min_bins, min_count)`` enforces a bin-occupancy
    floor for scaling fits.
    """
    d = np.asarray(trajectory.demands)
    n = trajectory.n_total
    a = d[:-1]
    b = d[1:]
    valid = (a > 0) & (a < n) & (b > 0) & (b < n) & (a <= n / 2)
    if not valid.any():
        raise InsufficientDataError("no usable returns with previous demand in (0, N/2]")
    av = a[valid].astype(float)
    bv = b[valid].astype(float)
    r = np.log(bv / (n - bv)) - np.log(av / (n - av))
    edges = np.geomspace(1.0, n / 2.0, n_bins + 1)
    edges[0] = 0.5
    which = np.digitize(av, edges) - 1
    which = np.clip(which, 0, n_bins - 1)
    counts = np.bincount(which, minlength=n_bins)
    sums_r2 = np.bincount(which, weights=r**2, minlength=n_bins)
    sums_d = np.bincount(which, weights=av, minlength=n_bins)
    occupied = counts > 0
    stats = [
        BinStat(d_mean=sums_d[i] / counts[i], mean_r2=sums_r2[i] / counts[i], count=int(counts[i]))
        for i in np.nonzero(occupied)[0]
    ]
    if require_occupancy is not None:
        min_bins, min_count = require_occupancy
        if sum(1 for s in stats if s.count >= min_count) < min_bins:
            raise InsufficientDataError(
                f"fewer than {min_bins} bins with at least {min_count} samples"
            )
    return stats


def fluctuation_scaling_slope(
    stats: list[BinStat],
    d_min: float = 4.0,
    d_max: float | None = None,
) -> float:
    """Log-log slope of mean r^2 against d over small-d bins."""
    pts = [(s.d_mean, s.mean_r2) for s in stats
           if s.d_mean >= d_min and (d_max is None or s.d_mean <= d_max) and s.mean_r2 > 0]
    if len(pts) < 3:
        raise InsufficientDataError("need at least 3 occupied small-d bins for a slope")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


class UniformityResult(NamedTuple):
    statistic: float
    passed: bool
    max_rel_deviation: float


def uniformity_test(
    demands,
    n_total: int,
    edge_exclusion: float = 0.02,
    n_bins: int = 50,
) -> UniformityResult:
    """Chi-square test of the demand histogram against uniform interior states.

    Interior states are [ceil(e*N), floor((1-e)*N)] split into near-equal
    bins; the test passes when every bin's relative deviation from the
    uniform expectation is below 5%.
    """
    if not 0 <= edge_exclusion <= 0.1:
        raise ValueError("edge_exclusion must lie in [0, 0.1]")
    d = np.asarray(demands)
    if len(d) < 10**5:
        raise InsufficientDataError("uniformity test requires at least 1e5 samples")
    lo = int(np.ceil(edge_exclusion * n_total))
    hi = int(np.floor((1.0 - edge_exclusion) * n_total))
    states = np.arange(lo, hi + 1)
    if len(states) < n_bins:
        raise ValueError("fewer interior states than bins")
    interior = d[(d >= lo) & (d <= hi)]
    if len(interior) == 0:
        raise InsufficientDataError("no samples in the interior state range")
    counts_per_state = np.bincount(interior - lo, minlength=len(states))
    chunks = np.array_split(counts_per_state, n_bins)
    widths = np.array([len(c) for c in chunks], dtype=float)
    obs = np.array([c.sum() for c in chunks], dtype=float)
    expected = len(interior) * widths / widths.sum()
    rel_dev = np.abs(obs - expected) / expected
    statistic = float(((obs - expected) ** 2 / expected).sum())
    max_dev = float(rel_dev.max())
    return UniformityResult(statistic=statistic, passed=bool(max_dev < 0.05), max_rel_deviation=max_dev)
