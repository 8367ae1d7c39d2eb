"""Markov analysis: transition matrices, stationary vectors, beta identity."""

import numpy as np
import pytest
import scipy.linalg

from effbid.market import ModelParams
from effbid.markov import (
    beta_identity_residual,
    model_transition_matrix,
    stationary_distribution,
    stationary_distribution_for,
    transition_matrix,
)


def _eigen_stationary(entries: np.ndarray) -> np.ndarray:
    """Dense left-eigenvector oracle for the dominant eigenvalue."""
    w, vl = scipy.linalg.eig(entries, left=True, right=False)
    pi = np.abs(vl[:, np.argmax(w.real)].real)
    return pi / pi.sum()


class TestTransitionMatrix:
    def test_n2_center_row(self):
        m = transition_matrix(2)
        assert m.entries[1].tolist() == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)

    def test_absorbing_rows(self):
        m = transition_matrix(5)
        assert m.entries[0].tolist() == [1, 0, 0, 0, 0, 0]
        assert m.entries[5].tolist() == [0, 0, 0, 0, 0, 1]

    def test_row_sums_n200(self):
        m = transition_matrix(200, "reset_rule")
        assert np.abs(m.entries.sum(axis=1) - 1.0).max() < 1e-12

    def test_entries_nonnegative(self):
        m = transition_matrix(60, "reset_rule")
        assert m.entries.min() >= 0.0

    def test_reset_rows_are_fair_coin(self):
        m = transition_matrix(6, "reset_rule")
        expected = [1 / 64, 6 / 64, 15 / 64, 20 / 64, 15 / 64, 6 / 64, 1 / 64]
        assert m.entries[0].tolist() == pytest.approx(expected, abs=1e-15)
        assert m.entries[6].tolist() == pytest.approx(expected, abs=1e-15)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            transition_matrix(0)
        with pytest.raises(ValueError):
            transition_matrix(5, "bounce")


class TestStationary:
    def test_two_state_chain(self):
        result = stationary_distribution(transition_matrix(1, "reset_rule"))
        assert result.distribution.tolist() == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_n2_reset_matches_eigen_oracle(self):
        m = transition_matrix(2, "reset_rule")
        result = stationary_distribution(m, tol=1e-14)
        assert result.distribution.tolist() == pytest.approx([0.25, 0.5, 0.25], abs=1e-10)
        oracle = _eigen_stationary(m.entries)
        assert result.distribution == pytest.approx(oracle, abs=1e-12)

    def test_power_iteration_matches_eigen_oracle_n50(self):
        m = transition_matrix(50, "reset_rule")
        result = stationary_distribution(m, tol=1e-14)
        oracle = _eigen_stationary(m.entries)
        assert np.abs(result.distribution - oracle).max() < 1e-8

    def test_fixed_point_residual(self):
        m = transition_matrix(30, "reset_rule")
        result = stationary_distribution(m, tol=1e-13)
        assert result.residual <= 1e-12
        assert result.warning is None
        assert result.iterations >= 1

    def test_absorbing_mode_flagged_and_concentrated(self):
        m = transition_matrix(20, "absorbing")
        result = stationary_distribution(m, tol=1e-13)
        assert result.warning is not None
        pi = result.distribution
        assert pi[0] + pi[-1] == pytest.approx(1.0, abs=1e-9)
        assert pi[0] == pytest.approx(0.5, abs=1e-9)  # symmetric start

    def test_matrix_free_matches_dense(self):
        dense = stationary_distribution(transition_matrix(120, "reset_rule"), tol=1e-13)
        from effbid import markov

        original = markov.DENSE_LIMIT
        markov.DENSE_LIMIT = 60  # force the chunked matrix-free path
        try:
            free = stationary_distribution_for(120, "reset_rule", tol=1e-13, chunk=17)
        finally:
            markov.DENSE_LIMIT = original
        assert np.abs(free.distribution - dense.distribution).max() < 1e-10

    def test_csv_export(self, tmp_path):
        result = stationary_distribution(transition_matrix(2, "reset_rule"))
        path = tmp_path / "stationary.csv"
        result.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "d,probability"
        assert [float(l.split(",")[1]) for l in lines[1:]] == pytest.approx(
            [0.25, 0.5, 0.25], abs=1e-12
        )


class TestBetaIdentity:
    def test_exhaustive_two_term_sum(self):
        # N = 1, j = 0: S = (1 - 0) + (1 - 1) = 1, residual 1 - 1/2.
        assert beta_identity_residual(1, 0) == pytest.approx(0.5, abs=1e-15)

    def test_n100_close_to_limit(self):
        s = beta_identity_residual(100, 50) + 100 / 101
        assert abs(s - 100 / 101) < 0.05

    def test_residual_shrinks_with_n(self):
        # The float evaluation bottoms out at rounding noise (~1e-13), so the
        # ordering is checked with exact integer arithmetic; the module's
        # float value must sit within noise of the exact one.
        from fractions import Fraction
        from math import comb

        def exact_residual(n, j):
            num = sum(comb(n, j) * i**j * (n - i) ** (n - j) for i in range(n + 1))
            return Fraction(num, n**n) - Fraction(n, n + 1)

        exact = {n: exact_residual(n, n // 2) for n in (10, 100, 1000)}
        assert abs(exact[1000]) < abs(exact[100]) < abs(exact[10])
        for n in (10, 100, 1000):
            assert beta_identity_residual(n, n // 2) == pytest.approx(
                float(exact[n]), abs=1e-11
            )

    def test_matches_direct_summation_oracle(self):
        from scipy.stats import binom as sp_binom

        for n, j in [(10, 3), (50, 25), (200, 7)]:
            direct = float(sp_binom.pmf(j, n, np.arange(n + 1) / n).sum())
            assert beta_identity_residual(n, j) == pytest.approx(
                direct - n / (n + 1), abs=1e-12
            )

    def test_j_domain(self):
        with pytest.raises(ValueError):
            beta_identity_residual(10, 11)


class TestUniformityOfResetChain:
    @pytest.mark.xfail(
        strict=True,
        reason="the reset chain's true stationary vector keeps an O(1) "
        "center bump (~1.4x uniform) at every N; the max interior deviation "
        "measures 0.390 / 0.406 / 0.420 for N = 100/300/1000 and does not "
        "decrease (the uniform vector is only an O(1/N) approximate fixed "
        "point per the beta identity, which is tested above)",
    )
    def test_interior_deviation_decreases_with_n(self):
        deviations = []
        for n in (100, 300, 1000):
            result = stationary_distribution_for(n, "reset_rule", tol=1e-10)
            k = max(1, int(np.ceil(0.02 * (n + 1))))
            interior = result.distribution[k : n + 1 - k]
            deviations.append(np.abs(interior * (n + 1) - 1.0).max())
        assert deviations[0] > deviations[1] > deviations[2]


class TestModelChainConsistency:
    def test_simulation_histogram_matches_exact_chain(self, long_run):
        # Exact stationary vector of the simulated model's own chain vs the
        # empirical demand histogram.
        params = long_run.params
        chain = model_transition_matrix(params)
        result = stationary_distribution(chain, tol=1e-10, max_iter=10**6)
        pi = result.distribution
        n = params.n_total
        counts = np.bincount(long_run.demands, minlength=n + 1)
        freq = counts / counts.sum()
        # Aggregate interior states into 20 bins to tame per-state noise.
        lo, hi = 21, n - 21
        chunks = np.array_split(np.arange(lo, hi + 1), 20)
        for chunk in chunks:
            predicted = pi[chunk].sum()
            observed = freq[chunk].sum()
            assert observed == pytest.approx(predicted, rel=0.10)

    def test_model_chain_rows_stochastic(self):
        params = ModelParams(n_speculators=50, n_random=4)
        chain = model_transition_matrix(params)
        assert np.abs(chain.entries.sum(axis=1) - 1.0).max() < 1e-12
        assert chain.entries.min() >= 0.0

    def test_fraction_rule_chain_is_near_uniform(self):
        # The fraction rule adds a weak boundary-repelling pull; its exact
        # stationary vector is uniform away from the edges.
        params = ModelParams(n_speculators=200, n_random=1, speculator_rule="fraction")
        chain = model_transition_matrix(params)
        result = stationary_distribution(chain, tol=1e-13)
        n = params.n_total
        interior = result.distribution[5 : n - 4]
        assert np.abs(interior * (n + 1) - 1.0).max() < 0.02
