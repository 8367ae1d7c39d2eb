"""Numerical solution of the exact price-efficiency condition.

For a given previous demand, find the per-speculator buy probability q for
which the expected next price equals the previous price. The expectation
runs over the exact convolution of Binomial(N_s, q) speculator demand and
Binomial(N_r, 1/2) random-trader demand; the full-demand state d' = N has
infinite price and is excluded by conditioning (recorded in the profile's
``regularization`` field so alternative treatments can be compared).

The solved profiles are compared against the closed-form demand-efficient
rule; their difference shrinks as the system grows.

A log-price variant (zero expected log return, both boundary states
excluded) is also provided: its solutions carry a slight drift away from
the boundaries, which is what keeps simulated demand histograms close to
uniform. ``log_price_profile`` solves it on a state grid for use with
:func:`effbid.market.simulate_from_profile`.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln, logsumexp

from .errors import ConvergenceError, DegenerateDistributionError
from .market import ModelParams, price, speculator_buy_prob

REGULARIZATION_CONDITION_BELOW_MAX = "condition_below_max"

_BISECTION_MAX_ITER = 200


@dataclass
class EfficiencyProfile:
    """Per-state buy probabilities under both efficiency notions."""

    params: ModelParams
    q_price: np.ndarray
    q_demand: np.ndarray
    regularization: str
    max_abs_difference: float

    def to_csv(self, path: str | Path) -> None:
        n = self.params.n_total
        with open(path, "w") as fh:
            fh.write("d,d_over_N,q_demand,q_price\n")
            for d in range(n + 1):
                fh.write(
                    f"{d},{d / n!r},{float(self.q_demand[d])!r},{float(self.q_price[d])!r}\n"
                )


def _binom_logpmf(n: int, q: float) -> np.ndarray:
    """log pmf of Binomial(n, q) over k = 0..n."""
    k = np.arange(n + 1)
    if q <= 0.0:
        out = np.full(n + 1, -np.inf)
        out[0] = 0.0
        return out
    if q >= 1.0:
        out = np.full(n + 1, -np.inf)
        out[-1] = 0.0
        return out
    return (
        gammaln(n + 1)
        - gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * np.log(q)
        + (n - k) * np.log1p(-q)
    )


def demand_log_pmf(q: float, params: ModelParams) -> np.ndarray:
    """Log pmf of the next demand Bin(N_s, q) + Bin(N_r, 1/2) over 0..N.

    The convolution is carried out in log space so that far-tail entries for
    systems up to N ~ 1e4 underflow gracefully instead of vanishing early.
    """
    ls = _binom_logpmf(params.n_speculators, q)
    nr = params.n_random
    if nr == 0:
        return ls
    lr = _binom_logpmf(nr, 0.5)
    n = params.n_total
    out = np.full(n + 1, -np.inf)
    for j in range(nr + 1):
        out[j : j + params.n_speculators + 1] = np.logaddexp(
            out[j : j + params.n_speculators + 1], ls + lr[j]
        )
    return out


def _conditional_weights(q: float, params: ModelParams, lo: int, hi: int) -> np.ndarray:
    """Normalized next-demand weights restricted to states lo..hi."""
    logw = demand_log_pmf(q, params)[lo : hi + 1]
    total = logsumexp(logw)
    if total == -np.inf:
        raise DegenerateDistributionError(
            "no probability mass on states with a defined price"
        )
    return np.exp(logw - total)


def expected_price(q: float, params: ModelParams) -> float:
    """Expected next price given q, conditioned on d' < N.

    Strictly increasing in q.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    n = params.n_total
    w = _conditional_weights(q, params, 0, n - 1)
    d = np.arange(n)
    return float(np.dot(w, d / (n - d)))


def expected_log_price(q: float, params: ModelParams) -> float:
    """Expected next log price given q, conditioned on 0 < d' < N."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    n = params.n_total
    w = _conditional_weights(q, params, 1, n - 1)
    d = np.arange(1, n)
    return float(np.dot(w, np.log(d / (n - d))))


def _bisect_monotone(objective, target: float, tol: float) -> float:
    """Root of a monotone-increasing objective on [0, 1] by bisection.

    Returns 0 or 1 when the target is unreachable (clamped, mirroring the
    boundary violation of the closed-form rule). A degenerate conditional
    distribution at an endpoint (all mass on excluded states) means the
    objective diverges there, so the root lies strictly inside.
    """
    try:
        if objective(0.0) > target:
            return 0.0
    except DegenerateDistributionError:
        pass
    try:
        if objective(1.0) < target:
            return 1.0
    except DegenerateDistributionError:
        pass
    lo, hi = 0.0, 1.0
    value = None
    for _ in range(_BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        value = objective(mid)
        if abs(value - target) <= tol:
            return mid
        if value < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17:
            break
    residual = abs(value - target) if value is not None else np.inf
    raise ConvergenceError(
        f"bisection stalled with residual {residual:.3e} > tol {tol:.3e}",
        residual=residual,
    )


def solve_price_efficient(prev_demand: int, params: ModelParams, tol: float = 1e-10) -> float:
    """q for which the expected next price matches price(prev_demand, N).

    Clamps to 0 or 1 when no q in [0, 1] can reach the target.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = params.n_total
    if prev_demand <= 0 or prev_demand >= n:
        raise ValueError("prev_demand must lie strictly inside (0, N)")
    target = price(prev_demand, n)
    return _bisect_monotone(lambda q: expected_price(q, params), target, tol)


def solve_log_price_efficient(prev_demand: int, params: ModelParams, tol: float = 1e-10) -> float:
    """q for which the expected next log price matches log price(prev_demand, N)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = params.n_total
    if prev_demand <= 0 or prev_demand >= n:
        raise ValueError("prev_demand must lie strictly inside (0, N)")
    target = float(np.log(price(prev_demand, n)))
    return _bisect_monotone(lambda q: expected_log_price(q, params), target, tol)


def compare_profiles(params: ModelParams, tol: float = 1e-10) -> EfficiencyProfile:
    """Solve q_price for every interior state and compare with q_demand.

    Boundary entries are the clamped limits (0 at d = 0, 1 at d = N); the
    exported max difference is taken over the interior d in [1, N-1].
    """
    n = params.n_total
    q_price = np.empty(n + 1)
    q_demand = np.empty(n + 1)
    q_price[0], q_price[n] = 0.0, 1.0
    for d in range(n + 1):
        q_demand[d] = speculator_buy_prob(d, params)
        if 0 < d < n:
            q_price[d] = solve_price_efficient(d, params, tol)
    max_diff = float(np.abs(q_price[1:n] - q_demand[1:n]).max())
    return EfficiencyProfile(
        params=params,
        q_price=q_price,
        q_demand=q_demand,
        regularization=REGULARIZATION_CONDITION_BELOW_MAX,
        max_abs_difference=max_diff,
    )


def log_price_profile(params: ModelParams, tol: float = 1e-10, grid_size: int = 400) -> np.ndarray:
    """Per-state log-price-efficient q, solved on a grid and interpolated.

    For small systems every interior state is solved exactly; for large ones
    the solution is computed on a geometric grid of states (dense near both
    boundaries, where the profile bends) and filled in with a monotone
    interpolant. Endpoints are the clamped limits 0 and 1.
    """
    n = params.n_total
    q = np.empty(n + 1)
    q[0], q[n] = 0.0, 1.0
    if n - 1 <= grid_size:
        for d in range(1, n):
            q[d] = solve_log_price_efficient(d, params, tol)
        return q
    lower = np.unique(np.round(np.geomspace(1, n // 2, grid_size // 2)).astype(int))
    grid = np.unique(np.concatenate([lower, n - lower]))
    solved = np.array([solve_log_price_efficient(int(d), params, tol) for d in grid])
    interp = PchipInterpolator(grid, solved)
    q[1:n] = np.clip(interp(np.arange(1, n)), 0.0, 1.0)
    return q
