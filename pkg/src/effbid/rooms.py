"""Live game rooms: a clock-driven state machine over the game engine.

Rooms host humans (via the websocket layer in :mod:`effbid.server`) and
bots in timed rounds. The state machine itself is transport-free: message
handling and clock ticks are plain functions from (room, input, now) to
server messages, so rooms can be driven headless in tests and scripts.

Every settled round is appended to a JSON-lines log before the result is
broadcast; a bot-only room replays exactly the rounds of
:func:`effbid.game.run_bot_game` for the same config and seed, and the two
produce byte-identical logs.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import game
from .errors import InsufficientDataError
from .game import GameConfig, MetricsReport, RoundRecord

PHASES = ("lobby", "counting_down", "settling")
VISIBILITY_MODES = ("own", "full")


@dataclass
class RoomConfig:
    """Room rules: engine config plus timing, bots, and visibility."""

    rounds: int = 10
    countdown_seconds: float = 5.0
    payoff_mode: str = "minority_point"
    skip_prob: float = 0.0
    seed: int = 0
    n_bots: int = 0
    bot_kind: str = "coin"
    visibility: str = "own"
    allow_hot_join: bool = False

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.countdown_seconds < 0:
            raise ValueError("countdown_seconds must be >= 0")
        if self.payoff_mode not in game.PAYOFF_MODES:
            raise ValueError(f"payoff_mode must be one of {game.PAYOFF_MODES}")
        if not 0.0 <= self.skip_prob <= 1.0:
            raise ValueError("skip_prob must lie in [0, 1]")
        if self.n_bots < 0:
            raise ValueError("n_bots must be >= 0")
        if self.bot_kind not in game.BOT_KINDS:
            raise ValueError(f"bot_kind must be one of {game.BOT_KINDS}")
        if self.visibility not in VISIBILITY_MODES:
            raise ValueError(f"visibility must be one of {VISIBILITY_MODES}")

    @classmethod
    def from_dict(cls, obj: dict) -> "RoomConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown room config fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class Player:
    player_id: str
    display_name: str
    kind: str  # "human" | "bot"
    score: float = 0.0


@dataclass
class ServerMessage:
    """A message for one player (``to``) or the whole room (``to=None``)."""

    payload: dict
    to: str | None = None


@dataclass
class Room:
    """One live room; all mutation goes through handle_message and tick."""

    id: str
    config: RoomConfig
    log_path: Path
    phase: str = "lobby"
    round: int = 0
    players: list[Player] = field(default_factory=list)
    pending_choices: dict[str, int] = field(default_factory=dict)
    deadline: float | None = None
    prev_excess: int = 0
    records: list[RoundRecord] = field(default_factory=list)
    rng: np.random.Generator | None = None

    def roster(self) -> list[dict]:
        return [
            {"player": p.player_id, "name": p.display_name, "kind": p.kind, "score": p.score}
            for p in self.players
        ]

    def find(self, player_id: str) -> Player | None:
        for p in self.players:
            if p.player_id == player_id:
                return p
        return None


def create_room(config: RoomConfig, log_dir: str | Path, room_id: str | None = None) -> Room:
    """New room in lobby phase with its bots already seated."""
    room_id = room_id or secrets.token_hex(8)
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    room = Room(id=room_id, config=config, log_path=log_dir / f"{room_id}.jsonl")
    for b in range(config.n_bots):
        room.players.append(Player(player_id=f"bot{b}", display_name=f"bot {b}", kind="bot"))
    return room


def _state_payload(room: Room, now: float | None = None) -> dict:
    return {
        "type": "state",
        "server_time": now,
        "phase": room.phase,
        "round": room.round,
        "rounds": room.config.rounds,
        "deadline": room.deadline,
        "roster": room.roster(),
        "chosen": sorted(room.pending_choices),
        "countdown_seconds": room.config.countdown_seconds,
        "visibility": room.config.visibility,
    }


def _error(to: str | None, code: str, detail: str) -> ServerMessage:
    return ServerMessage(payload={"type": "error", "code": code, "detail": detail}, to=to)


def _submit_bots(room: Room) -> None:
    """Bots submit at countdown start, in roster order, from the room RNG."""
    if room.rng is None:
        room.rng = np.random.default_rng(room.config.seed)
    for p in room.players:
        if p.kind != "bot":
            continue
        if room.config.bot_kind == "coin":
            choice = game.coin_flip_bot(room.config.skip_prob, room.rng)
        else:
            choice = game.demand_efficient_bot(
                room.prev_excess, len(room.players), room.config.skip_prob, room.rng
            )
        room.pending_choices[p.player_id] = choice


def _begin_round(room: Room, now: float) -> list[ServerMessage]:
    room.round += 1
    room.phase = "counting_down"
    room.pending_choices = {}
    room.deadline = now + room.config.countdown_seconds
    _submit_bots(room)
    payload = {
        "type": "round_start",
        "round": room.round,
        "server_time": now,
        "deadline": room.deadline,
        "roster": room.roster(),
        "superplayer": -room.prev_excess,
    }
    return [ServerMessage(payload=payload)]


def handle_message(room: Room, message: dict, now: float) -> list[ServerMessage]:
    """Apply one client message; returns the messages to deliver.

    Accepted message types: join, leave, choose, start, config (lobby only).
    State changes are broadcast to the room as state messages.
    """
    if not isinstance(message, dict) or "type" not in message:
        return [_error(None, "protocol", "message must be an object with a type field")]
    mtype = message["type"]
    player_id = message.get("player")

    if mtype == "join":
        if room.phase != "lobby" and not room.config.allow_hot_join:
            return [_error(player_id, "phase", "room already running; joins allowed in lobby only")]
        if player_id is None:
            return [_error(None, "protocol", "join requires a player id")]
        if room.find(player_id) is None:
            name = str(message.get("name") or player_id)
            room.players.append(Player(player_id=player_id, display_name=name, kind="human"))
        return [ServerMessage(payload=_state_payload(room, now))]

    if mtype == "leave":
        player = room.find(player_id)
        if player is not None:
            room.players.remove(player)
            room.pending_choices.pop(player_id, None)
        return [ServerMessage(payload=_state_payload(room, now))]

    if mtype == "choose":
        if room.phase != "counting_down":
            reason = "too early: round not started" if room.phase == "lobby" else "too late: round settling"
            return [_error(player_id, "not_counting_down", reason)]
        player = room.find(player_id)
        if player is None:
            return [_error(player_id, "unknown_player", "join the room before choosing")]
        try:
            value = int(message.get("value"))
        except (TypeError, ValueError):
            return [_error(player_id, "protocol", "choose requires value -1, 0, or +1")]
        if value not in (-1, 0, 1):
            return [_error(player_id, "protocol", "choose requires value -1, 0, or +1")]
        # Later submissions before the deadline overwrite earlier ones.
        room.pending_choices[player_id] = value
        ack = dict(_state_payload(room, now))
        ack["your_choice"] = value
        return [ServerMessage(payload=ack, to=player_id)]

    if mtype == "start":
        if room.phase != "lobby":
            return [_error(player_id, "phase", "room already running")]
        if len(room.players) < 2:
            return [_error(player_id, "too_few_players", "need at least 2 players")]
        room.round = 0
        room.prev_excess = 0
        room.records = []
        room.rng = np.random.default_rng(room.config.seed)
        room.log_path.write_text("")
        return _begin_round(room, now)

    if mtype == "config":
        if room.phase != "lobby":
            return [_error(player_id, "phase", "config changes allowed in lobby only")]
        updates = message.get("config") or {}
        merged = {**room.config.__dict__, **updates}
        try:
            room.config = RoomConfig.from_dict(merged)
        except (TypeError, ValueError) as exc:
            return [_error(player_id, "config", str(exc))]
        return [ServerMessage(payload=_state_payload(room, now))]

    return [_error(player_id, "protocol", f"unknown message type {mtype!r}")]


def tick(room: Room, now: float) -> list[ServerMessage]:
    """Advance the clock; settles the round once the deadline passes.

    Ticks before the deadline (or clock regressions) are ignored. The round
    log append happens before the result broadcast is returned.
    """
    if room.phase != "counting_down" or room.deadline is None or now < room.deadline:
        return []
    room.phase = "settling"
    choices = [room.pending_choices.get(p.player_id, 0) for p in room.players]
    record = game.settle_round(
        choices, room.prev_excess, room.config.payoff_mode, round_index=room.round
    )
    room.records.append(record)
    with open(room.log_path, "a") as fh:
        fh.write(game.round_log_line(record))
        fh.flush()
    for player, delta in zip(room.players, record.points_delta):
        player.score += delta
    room.prev_excess = sum(choices)
    room.pending_choices = {}

    result = {
        "type": "round_result",
        "round": record.round,
        "server_time": now,
        "outcome": record.outcome,
        "winners": [room.players[i].player_id for i in record.winners],
        "points": {p.player_id: d for p, d in zip(room.players, record.points_delta)},
        "scores": {p.player_id: p.score for p in room.players},
        "superplayer": -room.prev_excess,
        "deadline": None,
    }
    if room.config.visibility == "full":
        result["choices"] = {p.player_id: c for p, c in zip(room.players, choices)}
    messages = [ServerMessage(payload=result)]

    if room.round < room.config.rounds:
        messages.extend(_begin_round(room, now))
    else:
        room.phase = "lobby"
        room.deadline = None
        messages.append(ServerMessage(payload=_state_payload(room, now)))
    return messages


def run_headless(room: Room) -> list[ServerMessage]:
    """Drive a bot-only room through all rounds with a simulated clock."""
    if any(p.kind != "bot" for p in room.players):
        raise ValueError("run_headless requires a bot-only room")
    now = 0.0
    messages = handle_message(room, {"type": "start"}, now)
    while room.phase == "counting_down":
        now = room.deadline if room.deadline is not None else now
        messages.extend(tick(room, now))
    return messages


def replay_metrics(log_path: str | Path) -> MetricsReport:
    """Metrics recomputed from a stored round log; pure function of the file."""
    records = game.read_round_log(log_path)
    if len(records) < 2:
        raise InsufficientDataError(
            f"{log_path}: need at least 2 logged rounds for metrics"
        )
    return game.metrics(records)
