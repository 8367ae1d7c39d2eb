"""Minority game with a superplayer: settlement, bots, metrics, round logs.

Players pick +1 or -1 each round (0 = skipped). A superplayer always plays
the negative of the previous round's summed choices, so the round outcome
O_t = sum(c_t) - sum(c_{t-1}) is the change in excess demand; players on
the minority side of the outcome win. All-repeat rounds are equilibria:
the outcome is zero, nobody wins, and any lone deviator lands in the
majority.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError

PAYOFF_MODES = ("minority_point", "return_proportional")
BOT_KINDS = ("coin", "efficient")

CHOICES = (-1, 0, 1)


@dataclass(frozen=True)
class GameConfig:
    """Configuration for a bot game or a live room's rules."""

    n_players: int
    rounds: int
    payoff_mode: str = "minority_point"
    skip_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_players < 2:
            raise ValueError("n_players must be >= 2")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.payoff_mode not in PAYOFF_MODES:
            raise ValueError(f"payoff_mode must be one of {PAYOFF_MODES}")
        if not 0.0 <= self.skip_prob <= 1.0:
            raise ValueError("skip_prob must lie in [0, 1]")


@dataclass
class RoundRecord:
    """One settled round."""

    round: int
    choices: list[int]
    prev_excess: int
    superplayer: int
    outcome: int
    winners: list[int]
    points_delta: list[float]

    def to_json_dict(self) -> dict:
        return {
            "round": self.round,
            "choices": self.choices,
            "prev_excess": self.prev_excess,
            "superplayer": self.superplayer,
            "outcome": self.outcome,
            "winners": self.winners,
            "points": self.points_delta,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RoundRecord":
        return cls(
            round=int(obj["round"]),
            choices=[int(c) for c in obj["choices"]],
            prev_excess=int(obj["prev_excess"]),
            superplayer=int(obj["superplayer"]),
            outcome=int(obj["outcome"]),
            winners=[int(w) for w in obj["winners"]],
            points_delta=[float(p) for p in obj["points"]],
        )


@dataclass
class MetricsReport:
    """Outcome variance, choice/excess-demand correlation, bubble fraction."""

    outcome_variance: float
    choice_demand_correlation: float
    bubble_fraction: float
    n_rounds: int
    per_player_correlations: list[float | None] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "outcome_variance": self.outcome_variance,
            "choice_demand_correlation": self.choice_demand_correlation,
            "bubble_fraction": self.bubble_fraction,
            "n_rounds": self.n_rounds,
            "per_player_correlations": self.per_player_correlations,
        }


def settle_round(
    choices,
    prev_excess: int,
    payoff_mode: str = "minority_point",
    round_index: int = 1,
) -> RoundRecord:
    """Settle one round against the superplayer.

    The superplayer plays C = -prev_excess, so the outcome is
    O = sum(choices) - prev_excess. In minority_point mode every player on
    the minority side (c = -sign(O)) gains one point and everyone else
    gains nothing; a zero outcome awards nothing. In return_proportional
    mode each player's points change by -c * O.
    """
    choices = [int(c) for c in choices]
    for c in choices:
        if c not in CHOICES:
            raise ValueError(f"invalid choice {c}; must be -1, 0, or +1")
    if payoff_mode not in PAYOFF_MODES:
        raise ValueError(f"payoff_mode must be one of {PAYOFF_MODES}")
    superplayer = -int(prev_excess)
    outcome = sum(choices) + superplayer
    if outcome > 0:
        minority = -1
    elif outcome < 0:
        minority = 1
    else:
        minority = 0
    winners = [] if minority == 0 else [i for i, c in enumerate(choices) if c == minority]
    if payoff_mode == "minority_point":
        winner_set = set(winners)
        points = [1.0 if i in winner_set else 0.0 for i in range(len(choices))]
    else:
        points = [float(-c * outcome) for c in choices]
    return RoundRecord(
        round=round_index,
        choices=choices,
        prev_excess=int(prev_excess),
        superplayer=superplayer,
        outcome=outcome,
        winners=winners,
        points_delta=points,
    )


def coin_flip_bot(skip_prob: float, rng: np.random.Generator) -> int:
    """0 with probability skip_prob, otherwise +1 or -1 with equal odds."""
    if not 0.0 <= skip_prob <= 1.0:
        raise ValueError("skip_prob must lie in [0, 1]")
    if rng.random() < skip_prob:
        return 0
    return 1 if rng.random() < 0.5 else -1


def demand_efficient_bot(
    prev_excess: int,
    n_players: int,
    skip_prob: float,
    rng: np.random.Generator,
) -> int:
    """Bot following the efficient-demand rule mapped to signed choices.

    When active, buys (+1) with probability clamp(1/2 + D/(2n), 0, 1) where
    D is the previous excess demand; the mapping comes from counting buyers
    as (n + D) / 2.
    """
    if abs(prev_excess) > n_players:
        raise ValueError("prev_excess cannot exceed n_players in magnitude")
    if rng.random() < skip_prob:
        return 0
    q = min(max(0.5 + prev_excess / (2.0 * n_players), 0.0), 1.0)
    return 1 if rng.random() < q else -1


def run_bot_game(config: GameConfig, bot_kind: str) -> list[RoundRecord]:
    """Seeded, deterministic bot game; round 1 uses prev_excess = 0."""
    if bot_kind not in BOT_KINDS:
        raise ValueError(f"bot_kind must be one of {BOT_KINDS}")
    rng = np.random.default_rng(config.seed)
    records: list[RoundRecord] = []
    prev_excess = 0
    for t in range(1, config.rounds + 1):
        if bot_kind == "coin":
            choices = [coin_flip_bot(config.skip_prob, rng) for _ in range(config.n_players)]
        else:
            choices = [
                demand_efficient_bot(prev_excess, config.n_players, config.skip_prob, rng)
                for _ in range(config.n_players)
            ]
        record = settle_round(choices, prev_excess, config.payoff_mode, round_index=t)
        records.append(record)
        prev_excess = sum(choices)
    return records


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation; 0.0 when either side has no variance."""
    if len(x) < 2:
        return 0.0
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def metrics(records: list[RoundRecord]) -> MetricsReport:
    """Fig-style summary of a round sequence.

    outcome_variance is the sample variance of the outcomes. The
    choice/excess-demand correlation pools (c_{i,t}, D_{t-1}) pairs over all
    players and rounds t >= 2 with c_{i,t} != 0. A round counts as a bubble
    when one choice was made by at least twice as many players as the other
    (a one-sided round counts; an all-skip round does not).
    """
    if len(records) < 2:
        raise ValueError("metrics require at least 2 rounds")
    outcomes = np.array([r.outcome for r in records], dtype=float)
    n_players = len(records[0].choices)

    pooled_c: list[int] = []
    pooled_d: list[int] = []
    per_player_c: list[list[int]] = [[] for _ in range(n_players)]
    per_player_d: list[list[int]] = [[] for _ in range(n_players)]
    for rec in records:
        if rec.round < 2:
            continue
        for i, c in enumerate(rec.choices):
            if c != 0:
                pooled_c.append(c)
                pooled_d.append(rec.prev_excess)
                per_player_c[i].append(c)
                per_player_d[i].append(rec.prev_excess)
    if not any(c != 0 for rec in records for c in rec.choices):
        raise InsufficientDataError("all choices are zero; metrics undefined")

    bubbles = 0
    for rec in records:
        n_pos = sum(1 for c in rec.choices if c == 1)
        n_neg = sum(1 for c in rec.choices if c == -1)
        hi, lo = max(n_pos, n_neg), min(n_pos, n_neg)
        if hi > 0 and hi >= 2 * lo:
            bubbles += 1

    pooled = _pearson(np.array(pooled_c, dtype=float), np.array(pooled_d, dtype=float))
    per_player: list[float | None] = []
    for i in range(n_players):
        if len(per_player_c[i]) >= 2:
            per_player.append(
                _pearson(np.array(per_player_c[i], dtype=float), np.array(per_player_d[i], dtype=float))
            )
        else:
            per_player.append(None)

    return MetricsReport(
        outcome_variance=float(outcomes.var(ddof=1)),
        choice_demand_correlation=pooled,
        bubble_fraction=bubbles / len(records),
        n_rounds=len(records),
        per_player_correlations=per_player,
    )


def round_log_line(record: RoundRecord) -> str:
    """Canonical JSON line for a settled round (byte-stable for equal records)."""
    return json.dumps(record.to_json_dict(), separators=(",", ":")) + "\n"


def write_round_log(records: list[RoundRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(round_log_line(record))


def read_round_log(path: str | Path) -> list[RoundRecord]:
    """Parse a JSON-lines round log; errors name the offending line."""
    records: list[RoundRecord] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(RoundRecord.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: corrupt round log at line {lineno}: {exc}") from exc
    return records
