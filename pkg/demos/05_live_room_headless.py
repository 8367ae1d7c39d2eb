"""Drive a live game room without a network.

The room state machine is a pure function of messages and clock ticks, so
a bot-only room can be played to completion headless. Its JSON-lines round
log is byte-identical to the offline engine's log for the same seed, and
the stored log replays into the same metrics.

To play interactively instead, run the service

    effbid serve --port 8000 --log-dir room-logs

create a room

    curl -X POST localhost:8000/rooms -H 'content-type: application/json' \
         -d '{"rounds": 20, "countdown_seconds": 5, "n_bots": 10}'

and open the web client (frontend/) with the returned room id.
"""

import tempfile
from pathlib import Path

from effbid import GameConfig, run_bot_game, write_round_log
from effbid.rooms import RoomConfig, create_room, replay_metrics, run_headless

workdir = Path(tempfile.mkdtemp(prefix="effbid-demo-"))

config = RoomConfig(
    rounds=500, countdown_seconds=0.0, skip_prob=0.1, seed=12345,
    n_bots=11, bot_kind="efficient",
)
room = create_room(config, workdir, room_id="headless-demo")
run_headless(room)
print(f"room {room.id}: played {len(room.records)} rounds")
print(f"round log: {room.log_path}")

offline = workdir / "engine.jsonl"
engine_config = GameConfig(
    n_players=11, rounds=500, skip_prob=0.1, seed=12345, payoff_mode="minority_point"
)
write_round_log(run_bot_game(engine_config, "efficient"), offline)
identical = room.log_path.read_bytes() == offline.read_bytes()
print(f"byte-identical to the offline engine log: {identical}")

report = replay_metrics(room.log_path)
print("metrics replayed from the stored log:")
print(f"  outcome variance   {report.outcome_variance:.3f}")
print(f"  choice/demand corr {report.choice_demand_correlation:.3f}")
print(f"  bubble fraction    {report.bubble_fraction:.3f}")

scores = sorted((p.score, p.player_id) for p in room.players)
print(f"  final scores: {scores[-1][1]} leads with {scores[-1][0]:.0f} points")
