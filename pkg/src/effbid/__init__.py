"""Efficient-bidding market simulator, analysis toolkit, and game service."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateDistributionError,
    EmptySeriesError,
    InsufficientDataError,
    UndefinedPriceError,
)
from .market import (
    MarketState,
    ModelParams,
    Trajectory,
    price,
    simulate,
    simulate_from_profile,
    speculator_buy_prob,
    step,
)
from .efficiency import (
    EfficiencyProfile,
    compare_profiles,
    expected_log_price,
    expected_price,
    log_price_profile,
    solve_log_price_efficient,
    solve_price_efficient,
)
from .markov import (
    StationaryResult,
    TransitionMatrix,
    beta_identity_residual,
    model_transition_matrix,
    stationary_distribution,
    stationary_distribution_for,
    transition_matrix,
)
from .stats import (
    ReturnSeries,
    TailFit,
    UniformityResult,
    autocorrelation,
    ccdf,
    conditional_return_variance,
    fluctuation_scaling_slope,
    hill_tail_exponent,
    linearized_return,
    log_returns,
    uniformity_test,
)
from .game import (
    GameConfig,
    MetricsReport,
    RoundRecord,
    coin_flip_bot,
    demand_efficient_bot,
    metrics,
    read_round_log,
    run_bot_game,
    settle_round,
    write_round_log,
)
from .rooms import Room, RoomConfig, create_room, handle_message, replay_metrics, run_headless, tick

__all__ = [name for name in dir() if not name.startswith("_")]
