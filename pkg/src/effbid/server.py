"""FastAPI transport for live rooms.

Administrative HTTP endpoints create rooms and serve metrics and round
logs; a single websocket endpoint carries the JSON message channel. Each
room's messages and clock ticks run under a per-room lock, so its state
machine is strictly sequential; nothing is shared across rooms.
"""

from __future__ import annotations

import asyncio
import json
import os
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, JSONResponse

from .errors import InsufficientDataError
from .rooms import Room, RoomConfig, ServerMessage, create_room, handle_message, replay_metrics, tick

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8000


class RoomHub:
    """In-memory room registry with per-room serialization and fan-out."""

    def __init__(self, log_dir: Path):
        self.log_dir = log_dir
        self.rooms: dict[str, Room] = {}
        self.locks: dict[str, asyncio.Lock] = {}
        self.sockets: dict[str, dict[str, WebSocket]] = {}
        self.tickers: dict[str, asyncio.Task] = {}

    def create(self, config: RoomConfig) -> Room:
        room = create_room(config, self.log_dir)
        self.rooms[room.id] = room
        self.locks[room.id] = asyncio.Lock()
        self.sockets[room.id] = {}
        return room

    def get(self, room_id: str) -> Room:
        room = self.rooms.get(room_id)
        if room is None:
            raise KeyError(room_id)
        return room

    async def deliver(self, room_id: str, messages: list[ServerMessage]) -> None:
        sockets = self.sockets.get(room_id, {})
        for message in messages:
            if message.to is None:
                targets = list(sockets.values())
            else:
                ws = sockets.get(message.to)
                targets = [ws] if ws is not None else []
            for ws in targets:
                try:
                    await ws.send_json(message.payload)
                except Exception:
                    pass  # dropped connection; leave handling to the ws loop

    def ensure_ticker(self, room_id: str) -> None:
        task = self.tickers.get(room_id)
        if task is None or task.done():
            self.tickers[room_id] = asyncio.create_task(self._run_ticker(room_id))

    async def _run_ticker(self, room_id: str) -> None:
        room = self.rooms[room_id]
        lock = self.locks[room_id]
        while True:
            async with lock:
                if room.phase != "counting_down" or room.deadline is None:
                    return
                wait = room.deadline - time.time()
            if wait > 0:
                await asyncio.sleep(min(wait, 0.1))
                continue
            async with lock:
                messages = tick(room, time.time())
            await self.deliver(room_id, messages)
            await asyncio.sleep(0)


def create_app(log_dir: str | Path | None = None) -> FastAPI:
    log_dir = Path(log_dir or os.environ.get("EFFBID_LOG_DIR", "room-logs"))
    app = FastAPI(title="effbid game service")
    hub = RoomHub(log_dir)
    app.state.hub = hub

    @app.post("/rooms")
    async def post_room(config: dict):
        try:
            room = hub.create(RoomConfig.from_dict(config))
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"room": room.id}

    @app.get("/rooms/{room_id}/metrics")
    async def get_metrics(room_id: str):
        try:
            room = hub.get(room_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown room")
        try:
            report = replay_metrics(room.log_path)
        except FileNotFoundError:
            raise HTTPException(status_code=409, detail="no rounds logged yet")
        except InsufficientDataError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return JSONResponse(report.to_json_dict())

    @app.get("/rooms/{room_id}/log")
    async def get_log(room_id: str):
        try:
            room = hub.get(room_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown room")
        if not room.log_path.exists():
            raise HTTPException(status_code=409, detail="no rounds logged yet")
        return FileResponse(room.log_path, media_type="application/jsonl")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        joined: tuple[str, str] | None = None
        try:
            while True:
                try:
                    message = json.loads(await ws.receive_text())
                except json.JSONDecodeError:
                    await ws.send_json(
                        {"type": "error", "code": "protocol", "detail": "invalid JSON"}
                    )
                    continue
                room_id = message.get("room") if isinstance(message, dict) else None
                try:
                    room = hub.get(room_id)
                except KeyError:
                    await ws.send_json(
                        {"type": "error", "code": "not_found", "detail": f"unknown room {room_id!r}"}
                    )
                    continue
                player = message.get("player")
                if message.get("type") == "join" and player:
                    hub.sockets[room_id][player] = ws
                    joined = (room_id, player)
                async with hub.locks[room_id]:
                    replies = handle_message(room, message, time.time())
                await hub.deliver(room_id, replies)
                if message.get("type") == "start":
                    hub.ensure_ticker(room_id)
                if message.get("type") == "leave" and joined and joined[1] == player:
                    hub.sockets[room_id].pop(player, None)
                    joined = None
        except WebSocketDisconnect:
            pass
        finally:
            if joined is not None:
                hub.sockets.get(joined[0], {}).pop(joined[1], None)

    return app


def load_service_config(path: str | Path | None) -> dict:
    """Service settings from a JSON config file plus environment overrides.

    EFFBID_BIND ("host:port") and EFFBID_LOG_DIR override the file values.
    """
    settings = {"host": DEFAULT_HOST, "port": DEFAULT_PORT, "log_dir": "room-logs"}
    if path is not None:
        settings.update(json.loads(Path(path).read_text()))
    bind = os.environ.get("EFFBID_BIND")
    if bind:
        host, _, port = bind.rpartition(":")
        if host:
            settings["host"] = host
        settings["port"] = int(port)
    log_dir = os.environ.get("EFFBID_LOG_DIR")
    if log_dir:
        settings["log_dir"] = log_dir
    return settings


def serve(config_path: str | Path | None = None, **overrides) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    settings = load_service_config(config_path)
    settings.update({k: v for k, v in overrides.items() if v is not None})
    app = create_app(log_dir=settings["log_dir"])
    uvicorn.run(app, host=settings["host"], port=int(settings["port"]), log_level="warning")
