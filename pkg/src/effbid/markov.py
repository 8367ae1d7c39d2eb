"""Exact Markov-chain analysis of the bidding market.

Transition matrices for the idealized chain in which all N agents buy with
probability i/N, stationary distributions by power iteration, the
beta-integral normalization identity behind the near-uniformity of the
stationary demand distribution, and exact chains for the full market model.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from .errors import ConvergenceError
from .market import ModelParams, speculator_buy_prob

BOUNDARY_MODES = ("absorbing", "reset_rule")

# Dense (N+1)^2 matrices are kept up to ~200 MB; larger chains use the
# matrix-free product.
DENSE_LIMIT = 5000


@dataclass
class TransitionMatrix:
    """Row-stochastic (N+1) x (N+1) matrix over demand states 0..N."""

    n: int
    entries: np.ndarray
    boundary_mode: str

    def to_csv(self, path: str | Path) -> None:
        np.savetxt(path, self.entries, delimiter=",")


@dataclass
class StationaryResult:
    """Stationary distribution estimate with its fixed-point residual."""

    distribution: np.ndarray
    residual: float
    iterations: int
    warning: str | None = None

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("d,probability\n")
            for d, p in enumerate(self.distribution):
                fh.write(f"{d},{float(p)!r}\n")


def _binomial_rows(n: int, probs: np.ndarray) -> np.ndarray:
    """Rows of Binomial(n, p) pmfs for each p in probs (0^0 = 1 convention)."""
    js = np.arange(n + 1)
    return binom.pmf(js[None, :], n, probs[:, None])


def transition_matrix(n: int, boundary_mode: str = "absorbing") -> TransitionMatrix:
    """Chain of N agents each buying with probability i/N from state i.

    Entry (i, j) = C(N, j) (i/N)^j (1 - i/N)^(N-j). Rows 0 and N are
    absorbing by construction; under reset_rule they are replaced with
    Binomial(N, 1/2) probabilities.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if boundary_mode not in BOUNDARY_MODES:
        raise ValueError(f"boundary_mode must be one of {BOUNDARY_MODES}")
    if n > DENSE_LIMIT:
        raise ValueError(
            f"dense matrix for n={n} exceeds the {DENSE_LIMIT} limit; "
            "use stationary_distribution_for instead"
        )
    probs = np.arange(n + 1) / n
    entries = _binomial_rows(n, probs)
    if boundary_mode == "reset_rule":
        reset_row = binom.pmf(np.arange(n + 1), n, 0.5)
        entries[0] = reset_row
        entries[n] = reset_row
    return TransitionMatrix(n=n, entries=entries, boundary_mode=boundary_mode)


def model_transition_matrix(params: ModelParams) -> TransitionMatrix:
    """Exact chain of the simulated market: Bin(N_s, q(d)) + Bin(N_r, 1/2).

    Uses the speculator rule and boundary mode carried by ``params``, so the
    stationary distribution of this chain is the exact prediction for the
    corresponding simulation's demand histogram.
    """
    n = params.n_total
    if n > DENSE_LIMIT:
        raise ValueError(f"dense matrix for n={n} exceeds the {DENSE_LIMIT} limit")
    qs = np.array([speculator_buy_prob(d, params) for d in range(n + 1)])
    entries = _binomial_rows(params.n_speculators, qs)
    if params.n_random > 0:
        coin = binom.pmf(np.arange(params.n_random + 1), params.n_random, 0.5)
        rows = np.zeros((n + 1, n + 1))
        for j, w in enumerate(coin):
            rows[:, j : j + params.n_speculators + 1] += w * entries
        entries = rows
    if params.boundary_mode == "reset_rule":
        reset_row = binom.pmf(np.arange(n + 1), n, 0.5)
        entries[0] = reset_row
        entries[n] = reset_row
    return TransitionMatrix(n=n, entries=entries, boundary_mode=params.boundary_mode)


def _power_iterate(matvec, size: int, tol: float, max_iter: int):
    x = np.full(size, 1.0 / size)
    for it in range(1, max_iter + 1):
        x_next = matvec(x)
        x_next /= x_next.sum()
        change = float(np.abs(x_next - x).max())
        x = x_next
        if change < tol:
            return x, it
    residual = float(np.abs(matvec(x) - x).max())
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last residual {residual:.3e})",
        residual=residual,
    )


def stationary_distribution(
    matrix: TransitionMatrix,
    tol: float = 1e-12,
    max_iter: int = 10**6,
) -> StationaryResult:
    """Left fixed point by power iteration from the uniform vector.

    Under reset_rule the chain is irreducible and aperiodic, so the answer
    is unique. Absorbing chains are permitted but flagged: the returned
    vector is the limit from the uniform start, which concentrates on the
    absorbing states {0, N}.
    """
    P = matrix.entries
    pi, iterations = _power_iterate(lambda x: x @ P, matrix.n + 1, tol, max_iter)
    residual = float(np.abs(pi @ P - pi).max())
    warning = None
    if matrix.boundary_mode == "absorbing":
        warning = (
            "absorbing boundary: stationary distribution is not unique; "
            "returning the limit from the uniform start"
        )
    return StationaryResult(
        distribution=pi, residual=residual, iterations=iterations, warning=warning
    )


def stationary_distribution_for(
    n: int,
    boundary_mode: str = "reset_rule",
    tol: float = 1e-12,
    max_iter: int = 10**6,
    chunk: int = 512,
) -> StationaryResult:
    """Stationary distribution for the idealized chain of a given size.

    Builds the dense matrix when it fits, otherwise runs matrix-free power
    iteration with binomial rows generated per chunk on the fly.
    """
    if n <= DENSE_LIMIT:
        return stationary_distribution(transition_matrix(n, boundary_mode), tol, max_iter)
    if boundary_mode not in BOUNDARY_MODES:
        raise ValueError(f"boundary_mode must be one of {BOUNDARY_MODES}")

    reset_row = binom.pmf(np.arange(n + 1), n, 0.5)

    def matvec(x: np.ndarray) -> np.ndarray:
        y = np.zeros(n + 1)
        for start in range(0, n + 1, chunk):
            stop = min(start + chunk, n + 1)
            probs = np.arange(start, stop) / n
            rows = _binomial_rows(n, probs)
            if boundary_mode == "reset_rule":
                if start == 0:
                    rows[0] = reset_row
                if stop == n + 1:
                    rows[-1] = reset_row
            y += x[start:stop] @ rows
        return y

    pi, iterations = _power_iterate(matvec, n + 1, tol, max_iter)
    residual = float(np.abs(matvec(pi) - pi).max())
    warning = None
    if boundary_mode == "absorbing":
        warning = "absorbing boundary: stationary distribution is not unique"
    return StationaryResult(
        distribution=pi, residual=residual, iterations=iterations, warning=warning
    )


def beta_identity_residual(n: int, j: int) -> float:
    """S(N, j) - N/(N+1), where S sums the j-th transition column over states.

    S(N, j) = sum_i C(N, j) (i/N)^j (1 - i/N)^(N-j) is a Riemann sum of a
    beta integral equal to N/(N+1); the residual vanishing as N grows is
    what makes the uniform vector an approximate stationary solution.
    Computed in log space.
    """
    if not 0 <= j <= n:
        raise ValueError("j must lie in [0, n]")
    i = np.arange(n + 1)
    terms = np.full(n + 1, -np.inf)
    # i = 0 and i = N rows follow the 0^0 = 1 convention.
    terms[0] = 0.0 if j == 0 else -np.inf
    terms[n] = 0.0 if j == n else -np.inf
    x = i[1:n] / n
    terms[1:n] = (
        gammaln(n + 1)
        - gammaln(j + 1)
        - gammaln(n - j + 1)
        + j * np.log(x)
        + (n - j) * np.log1p(-x)
    )
    s = float(np.exp(logsumexp(terms)))
    return s - n / (n + 1)
