"""Market core: pricing rule, buy probabilities, stepping, simulation."""

import math

import numpy as np
import pytest

from effbid.errors import UndefinedPriceError
from effbid.market import (
    MarketState,
    ModelParams,
    Trajectory,
    price,
    simulate,
    simulate_from_profile,
    speculator_buy_prob,
    step,
)


class TestPrice:
    def test_symmetric_point(self):
        assert price(5005, 10010) == 1.0

    def test_zero_demand(self):
        assert price(0, 12) == 0.0

    def test_direct_substitution(self):
        assert price(2, 3) == 2.0

    def test_full_demand_is_undefined(self):
        with pytest.raises(UndefinedPriceError):
            price(10, 10)

    @pytest.mark.parametrize("demand", [-1, 13])
    def test_out_of_range(self, demand):
        with pytest.raises(ValueError):
            price(demand, 12)

    def test_strictly_increasing(self):
        n = 97
        values = [price(d, n) for d in range(n)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_scale_invariance(self):
        for d, n in [(3, 10), (7, 20), (123, 400)]:
            for k in (2, 5, 11):
                assert price(k * d, k * n) == pytest.approx(price(d, n), rel=1e-15)


class TestSpeculatorBuyProb:
    def test_midpoint(self):
        params = ModelParams(n_speculators=10, n_random=2)
        assert speculator_buy_prob(6, params) == 0.5  # d = N/2

    def test_direct_substitution(self):
        params = ModelParams(n_speculators=10, n_random=2)
        assert speculator_buy_prob(7, params) == pytest.approx(0.6, abs=1e-15)

    def test_clamped_at_full_demand(self):
        params = ModelParams(n_speculators=10, n_random=4)
        assert speculator_buy_prob(14, params) == 1.0

    def test_clamped_at_zero(self):
        params = ModelParams(n_speculators=10, n_random=4)
        assert speculator_buy_prob(0, params) == 0.0

    def test_unclamped_mean_matches_previous_demand(self):
        params = ModelParams(n_speculators=50, n_random=6)
        for d in range(3, 54):
            q = speculator_buy_prob(d, params)
            assert params.n_speculators * q + params.n_random / 2 == pytest.approx(d, abs=1e-9)

    def test_both_algebraic_forms_agree_to_one_ulp(self):
        # 0.5 + (d - N/2)/N_s incurs one extra rounding; the implemented
        # single-rounding form (d - N_r/2)/N_s must match it to <= 1 ulp.
        for ns, nr in [(10, 2), (37, 5), (1000, 1), (10000, 10)]:
            params = ModelParams(n_speculators=ns, n_random=nr)
            n = ns + nr
            for d in range(math.ceil(nr / 2), min(n, 500) + 1):
                if d > ns + nr / 2:
                    break
                got = speculator_buy_prob(d, params)
                other = 0.5 + (d - n / 2) / ns
                # Both forms are algebraically equal; the 0.5 + x form incurs
                # one extra rounding at O(1) magnitude.
                assert abs(got - other) <= 2 * np.spacing(1.0)

    def test_fraction_rule(self):
        params = ModelParams(n_speculators=10, n_random=2, speculator_rule="fraction")
        assert speculator_buy_prob(6, params) == 0.5
        assert speculator_buy_prob(3, params) == pytest.approx(3 / 12)

    def test_out_of_range(self):
        params = ModelParams(n_speculators=10, n_random=2)
        with pytest.raises(ValueError):
            speculator_buy_prob(13, params)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ModelParams(n_speculators=0)
        with pytest.raises(ValueError):
            ModelParams(n_speculators=1, n_random=0)  # total < 2
        with pytest.raises(ValueError):
            ModelParams(n_speculators=2, boundary_mode="bounce")
        with pytest.raises(ValueError):
            ModelParams(n_speculators=2, speculator_rule="mimic")

    def test_config_round_trip(self, tmp_path):
        params = ModelParams(
            n_speculators=123, n_random=7, boundary_mode="reset_rule", seed=99,
            speculator_rule="fraction",
        )
        path = tmp_path / "params.cfg"
        params.to_config(path)
        assert ModelParams.from_config(path) == params


class TestStep:
    def test_absorbing_at_zero_without_random_traders(self):
        params = ModelParams(n_speculators=20, seed=1)
        rng = np.random.default_rng(1)
        state = MarketState(demand=0)
        for _ in range(50):
            state = step(state, params, rng)
            assert state.demand == 0
        assert state.time == 50

    def test_absorbing_at_full_demand(self):
        params = ModelParams(n_speculators=20, seed=1)
        rng = np.random.default_rng(1)
        state = MarketState(demand=20)
        for _ in range(50):
            state = step(state, params, rng)
            assert state.demand == 20

    def test_reset_rule_escapes_boundary(self):
        params = ModelParams(n_speculators=50, boundary_mode="reset_rule", seed=3)
        rng = np.random.default_rng(3)
        draws = [step(MarketState(demand=0), params, rng).demand for _ in range(2000)]
        mean = np.mean(draws)
        # Binomial(50, 1/2): mean 25, SE of the sample mean ~ 0.08.
        assert abs(mean - 25) < 0.5
        assert min(draws) > 0

    def test_center_is_conditionally_unbiased(self):
        params = ModelParams(n_speculators=100, n_random=4, seed=5)
        rng = np.random.default_rng(5)
        center = params.n_total // 2
        draws = [step(MarketState(demand=center), params, rng).demand for _ in range(20000)]
        se = np.std(draws) / np.sqrt(len(draws))
        assert abs(np.mean(draws) - center) < 4 * se

    def test_replay_is_identical(self):
        params = ModelParams(n_speculators=100, n_random=2, seed=42)

        def run():
            rng = np.random.default_rng(42)
            state = MarketState(demand=params.n_total // 2)
            path = [state.demand]
            for _ in range(1000):
                state = step(state, params, rng)
                path.append(state.demand)
            return path

        assert run() == run()


class TestSimulate:
    def test_length_contract(self):
        params = ModelParams(n_speculators=10, n_random=2, seed=0)
        assert len(simulate(params, 1)) == 2
        assert len(simulate(params, 100)) == 101

    def test_center_start(self):
        params = ModelParams(n_speculators=10, n_random=3, seed=0)
        trajectory = simulate(params, 5)
        assert trajectory.demands[0] == 13 // 2

    def test_explicit_start_and_range(self):
        params = ModelParams(n_speculators=30, n_random=2, seed=8)
        trajectory = simulate(params, 5000, initial_demand=3)
        assert trajectory.demands[0] == 3
        assert trajectory.demands.min() >= 0
        assert trajectory.demands.max() <= params.n_total

    def test_bad_initial(self):
        params = ModelParams(n_speculators=10, seed=0, n_random=2)
        with pytest.raises(ValueError):
            simulate(params, 10, initial_demand=99)

    def test_deterministic_per_seed(self):
        params = ModelParams(n_speculators=100, n_random=2, seed=42)
        a = simulate(params, 1000)
        b = simulate(params, 1000)
        assert np.array_equal(a.demands, b.demands)
        c = simulate(params.with_seed(43), 1000)
        assert not np.array_equal(a.demands, c.demands)

    def test_binned_drift_is_martingale(self):
        # Conditional mean of d' given d matches d within Monte Carlo error
        # wherever the clamp is inactive.
        params = ModelParams(n_speculators=200, n_random=4, seed=21)
        trajectory = simulate(params, 10**6)
        d = trajectory.demands
        a, b = d[:-1], d[1:]
        n = params.n_total
        lo, hi = 10, n - 10
        deltas = (b - a)[(a >= lo) & (a <= hi)]
        prevs = a[(a >= lo) & (a <= hi)]
        edges = np.linspace(lo, hi + 1, 9).astype(int)
        checked = 0
        for left, right in zip(edges[:-1], edges[1:]):
            mask = (prevs >= left) & (prevs < right)
            if mask.sum() < 5000:
                continue
            sample = deltas[mask]
            se = sample.std() / np.sqrt(len(sample))
            assert abs(sample.mean()) < 4 * se
            checked += 1
        assert checked >= 4

    def test_profile_simulation_matches_builtin_rule(self):
        # A profile equal to the built-in rule gives the same trajectory.
        params = ModelParams(n_speculators=50, n_random=2, seed=17)
        profile = np.array(
            [speculator_buy_prob(d, params) for d in range(params.n_total + 1)]
        )
        a = simulate(params, 2000)
        b = simulate_from_profile(profile, params, 2000)
        assert np.array_equal(a.demands, b.demands)

    def test_profile_validation(self):
        params = ModelParams(n_speculators=5, n_random=1, seed=0)
        with pytest.raises(ValueError):
            simulate_from_profile(np.zeros(3), params, 10)
        with pytest.raises(ValueError):
            simulate_from_profile(np.full(7, 1.5), params, 10)


class TestTrajectoryCsv:
    def test_round_trip_and_empty_price_at_full_demand(self, tmp_path):
        # Absorbing start at N keeps the price column empty on every row.
        params = ModelParams(n_speculators=4, seed=0)
        trajectory = simulate(params, 3, initial_demand=4)
        path = tmp_path / "trajectory.csv"
        trajectory.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,demand,price"
        assert lines[1] == "0,4,"
        assert all(line.endswith(",4,") for line in lines[1:])
        back = Trajectory.from_csv(path, params)
        assert np.array_equal(back.demands, trajectory.demands)

    def test_prices_written_in_full_precision(self, tmp_path):
        params = ModelParams(n_speculators=10, n_random=2, seed=1)
        trajectory = simulate(params, 50)
        path = tmp_path / "trajectory.csv"
        trajectory.to_csv(path)
        rows = path.read_text().splitlines()[1:]
        for row, d in zip(rows, trajectory.demands):
            cell = row.split(",")[2]
            if d == params.n_total:
                assert cell == ""
            else:
                assert float(cell) == d / (params.n_total - d)

    def test_nan_prices_only_at_full_demand(self):
        params = ModelParams(n_speculators=4, seed=0)
        trajectory = Trajectory(params=params, demands=np.array([0, 2, 4, 3]))
        p = trajectory.prices()
        assert p[0] == 0.0
        assert np.isnan(p[2])
        assert p[3] == pytest.approx(3.0)
