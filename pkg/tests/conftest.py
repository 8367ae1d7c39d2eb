"""Shared fixtures: the large seeded runs are computed once per session."""

import numpy as np
import pytest

from effbid.efficiency import log_price_profile
from effbid.market import ModelParams, simulate, simulate_from_profile

# Heavy-tail run: many speculators, a few coin flippers.
TAIL_PARAMS = ModelParams(n_speculators=10_000, n_random=10, seed=7)
TAIL_STEPS = 10**6

# Long run used by the histogram, drift, and fluctuation-scaling checks.
LONG_PARAMS = ModelParams(n_speculators=1_000, n_random=1, seed=11)
LONG_STEPS = 10**7


@pytest.fixture(scope="session")
def tail_run():
    return simulate(TAIL_PARAMS, TAIL_STEPS)


@pytest.fixture(scope="session")
def long_run():
    return simulate(LONG_PARAMS, LONG_STEPS)


@pytest.fixture(scope="session")
def fraction_long_run():
    params = ModelParams(
        n_speculators=1_000, n_random=1, seed=13, speculator_rule="fraction"
    )
    return simulate(params, LONG_STEPS)


@pytest.fixture(scope="session")
def price_efficient_tail_run():
    params = ModelParams(n_speculators=10_000, n_random=10, seed=7)
    profile = log_price_profile(params)
    return simulate_from_profile(profile, params, TAIL_STEPS)
