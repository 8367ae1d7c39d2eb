"""Stochastic bidding market: speculators plus coin-flipping random traders.

N agents each submit a market order (buy or sell one unit) per step. The
price is the demand/supply ratio d/(N-d). Speculators choose their buy
probability from the previous demand; random traders flip fair coins.

Two speculator rules are provided:

- "martingale" (default): q = clamp((d - N_r/2) / N_s, 0, 1), which makes
  the expected next demand equal the previous demand exactly whenever the
  clamp is inactive.
- "fraction": q = d / N, i.e. each speculator buys with probability equal
  to the previous round's overall buyer fraction. This sacrifices the exact
  demand martingale for a weak O(N_r/N) pull that regularizes the boundary
  zones; with one random trader the demand distribution becomes uniform
  except at the very edges.

Per-state buy probabilities can also be supplied directly (see
``simulate_from_profile``), e.g. the numerically optimized price-efficient
profiles from :mod:`effbid.efficiency`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import UndefinedPriceError

BOUNDARY_MODES = ("clamp", "reset_rule")
SPECULATOR_RULES = ("martingale", "fraction")


@dataclass(frozen=True)
class ModelParams:
    """Market configuration.

    n_speculators: number of speculators (N_s), at least 1.
    n_random: number of coin-flipping random traders (N_r), non-negative.
    boundary_mode: "clamp" leaves the boundary states to the clamped rule
        (absorbing when n_random = 0); "reset_rule" redraws all N agents as
        fair coins whenever the previous demand is 0 or N.
    seed: seed for the simulation generator (PCG64).
    speculator_rule: "martingale" or "fraction", see module docstring.
    """

    n_speculators: int
    n_random: int = 0
    boundary_mode: str = "clamp"
    seed: int = 0
    speculator_rule: str = "martingale"

    def __post_init__(self):
        if self.n_speculators < 1:
            raise ValueError("n_speculators must be >= 1")
        if self.n_random < 0:
            raise ValueError("n_random must be >= 0")
        if self.n_speculators + self.n_random < 2:
            raise ValueError("total number of agents must be >= 2")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"boundary_mode must be one of {BOUNDARY_MODES}")
        if self.speculator_rule not in SPECULATOR_RULES:
            raise ValueError(f"speculator_rule must be one of {SPECULATOR_RULES}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def n_total(self) -> int:
        return self.n_speculators + self.n_random

    def with_seed(self, seed: int) -> "ModelParams":
        return replace(self, seed=seed)

    def to_config(self, path: str | Path) -> None:
        """Write the parameters as flat key=value lines."""
        lines = [
            f"n_speculators={self.n_speculators}",
            f"n_random={self.n_random}",
            f"boundary_mode={self.boundary_mode}",
            f"seed={self.seed}",
            f"speculator_rule={self.speculator_rule}",
        ]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_config(cls, path: str | Path) -> "ModelParams":
        fields: dict[str, str] = {}
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        return cls(
            n_speculators=int(fields["n_speculators"]),
            n_random=int(fields.get("n_random", "0")),
            boundary_mode=fields.get("boundary_mode", "clamp"),
            seed=int(fields.get("seed", "0")),
            speculator_rule=fields.get("speculator_rule", "martingale"),
        )


@dataclass
class MarketState:
    """Current buyer count and time index."""

    demand: int
    time: int = 0


@dataclass
class Trajectory:
    """Seeded simulation record of demands; prices derive from the demands."""

    params: ModelParams
    demands: np.ndarray

    def __len__(self) -> int:
        return len(self.demands)

    @property
    def n_total(self) -> int:
        return self.params.n_total

    def prices(self) -> np.ndarray:
        """Price series with NaN where the price is undefined (d = N)."""
        d = self.demands.astype(float)
        n = self.n_total
        with np.errstate(divide="ignore", invalid="ignore"):
            p = d / (n - d)
        p[self.demands == n] = np.nan
        return p

    def to_csv(self, path: str | Path) -> None:
        """Write `t,demand,price` rows; the price cell is empty when d = N."""
        n = self.n_total
        with open(path, "w") as fh:
            fh.write("t,demand,price\n")
            for t, d in enumerate(self.demands):
                d = int(d)
                cell = "" if d == n else repr(d / (n - d))
                fh.write(f"{t},{d},{cell}\n")

    @classmethod
    def from_csv(cls, path: str | Path, params: ModelParams) -> "Trajectory":
        demands = []
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("t,demand"):
                raise ValueError(f"{path}: unexpected header {header!r}")
            for line in fh:
                if line.strip():
                    demands.append(int(line.split(",")[1]))
        return cls(params=params, demands=np.asarray(demands, dtype=np.int64))


def price(demand: int, n_total: int) -> float:
    """Demand/supply price d / (N - d).

    Strictly increasing in demand and invariant under scaling demand and
    total volume by the same factor. Undefined at d = N (zero supply).
    """
    if demand < 0 or demand > n_total:
        raise ValueError(f"demand {demand} outside [0, {n_total}]")
    if demand == n_total:
        raise UndefinedPriceError(f"price undefined at demand = total = {n_total}")
    return demand / (n_total - demand)


def speculator_buy_prob(prev_demand: int, params: ModelParams) -> float:
    """Per-speculator buy probability given the previous demand.

    Under the "martingale" rule this is clamp((d - N_r/2) / N_s, 0, 1), the
    unique probability for which N_s*q + N_r/2 equals the previous demand;
    the clamp covers the boundary zones d < N_r/2 and d > N_s + N_r/2 where
    that is impossible. Under the "fraction" rule it is simply d / N.
    """
    n = params.n_total
    if prev_demand < 0 or prev_demand > n:
        raise ValueError(f"prev_demand {prev_demand} outside [0, {n}]")
    if params.speculator_rule == "fraction":
        return prev_demand / n
    q = (prev_demand - params.n_random / 2) / params.n_speculators
    return min(max(q, 0.0), 1.0)


def _draw_speculators(q: float, n_speculators: int, rng: np.random.Generator) -> int:
    if q <= 0.0:
        return 0
    if q >= 1.0:
        return n_speculators
    return int(rng.binomial(n_speculators, q))


def step(state: MarketState, params: ModelParams, rng: np.random.Generator) -> MarketState:
    """Advance the market one step.

    New demand is Binomial(N_s, q) + Binomial(N_r, 1/2). Under reset_rule,
    a previous demand of 0 or N instead redraws all N agents as fair coins.
    """
    d = state.demand
    n = params.n_total
    if d < 0 or d > n:
        raise ValueError(f"demand {d} outside [0, {n}]")
    if params.boundary_mode == "reset_rule" and (d == 0 or d == n):
        new_d = int(rng.binomial(n, 0.5))
    else:
        q = speculator_buy_prob(d, params)
        new_d = _draw_speculators(q, params.n_speculators, rng)
        if params.n_random > 0:
            new_d += int(rng.binomial(params.n_random, 0.5))
    return MarketState(demand=new_d, time=state.time + 1)


def _resolve_initial(params: ModelParams, initial_demand) -> int:
    if initial_demand == "center" or initial_demand is None:
        return params.n_total // 2
    d0 = int(initial_demand)
    if d0 < 0 or d0 > params.n_total:
        raise ValueError(f"initial demand {d0} outside [0, {params.n_total}]")
    return d0


def _run_demands(
    params: ModelParams,
    steps: int,
    d0: int,
    profile: np.ndarray | None,
) -> np.ndarray:
    ns = params.n_speculators
    nr = params.n_random
    n = params.n_total
    reset = params.boundary_mode == "reset_rule"
    fraction = params.speculator_rule == "fraction"
    rng = np.random.default_rng(params.seed)

    out = np.empty(steps + 1, dtype=np.int64)
    out[0] = d0
    # Random-trader demands are independent of everything else, so they can
    # be drawn up front; this keeps the sequential loop to one draw per step.
    r_pre = rng.binomial(nr, 0.5, size=steps) if nr > 0 else None
    binom = rng.binomial
    half_nr = nr / 2
    d = d0
    for t in range(steps):
        if reset and (d == 0 or d == n):
            d = int(binom(n, 0.5))
            out[t + 1] = d
            continue
        if profile is not None:
            q = profile[d]
        elif fraction:
            q = d / n
        else:
            q = (d - half_nr) / ns
        if q <= 0.0:
            s = 0
        elif q >= 1.0:
            s = ns
        else:
            s = binom(ns, q)
        d = s + (r_pre[t] if r_pre is not None else 0)
        out[t + 1] = d
    return out


def simulate(params: ModelParams, steps: int, initial_demand="center") -> Trajectory:
    """Run a seeded simulation; the result has length steps + 1.

    Identical params (seed included) reproduce the identical sequence.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d0 = _resolve_initial(params, initial_demand)
    demands = _run_demands(params, steps, d0, profile=None)
    return Trajectory(params=params, demands=demands)


def simulate_from_profile(
    profile: np.ndarray,
    params: ModelParams,
    steps: int,
    initial_demand="center",
) -> Trajectory:
    """Simulate with an explicit per-state speculator buy probability.

    ``profile[d]`` is used in place of the built-in rule; random traders and
    the boundary mode behave as in :func:`simulate`.
    """
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (params.n_total + 1,):
        raise ValueError(f"profile must have length N+1 = {params.n_total + 1}")
    if np.any((profile < 0) | (profile > 1)):
        raise ValueError("profile entries must be probabilities in [0, 1]")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d0 = _resolve_initial(params, initial_demand)
    demands = _run_demands(params, steps, d0, profile=profile)
    return Trajectory(params=params, demands=demands)
