"""HTTP/websocket transport smoke tests (in-process TestClient)."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from effbid.server import create_app, load_service_config


@pytest.fixture()
def client(tmp_path):
    app = create_app(log_dir=tmp_path)
    with TestClient(app) as client:
        yield client


def _recv_until(ws, wanted_type, limit=50):
    for _ in range(limit):
        message = ws.receive_json()
        if message["type"] == wanted_type:
            return message
    raise AssertionError(f"no {wanted_type} message within {limit} messages")


class TestAdminEndpoints:
    def test_create_room_returns_id(self, client):
        response = client.post("/rooms", json={"rounds": 2, "n_bots": 3})
        assert response.status_code == 200
        assert "room" in response.json()

    def test_bad_config_rejected(self, client):
        response = client.post("/rooms", json={"rounds": 0})
        assert response.status_code == 422
        response = client.post("/rooms", json={"no_such_field": 1})
        assert response.status_code == 422

    def test_unknown_room_metrics_404(self, client):
        assert client.get("/rooms/nope/metrics").status_code == 404

    def test_metrics_before_any_round_409(self, client):
        room_id = client.post("/rooms", json={"rounds": 2, "n_bots": 2}).json()["room"]
        assert client.get(f"/rooms/{room_id}/metrics").status_code == 409


class TestWebsocketPlay:
    def test_full_round_trip(self, client):
        room_id = client.post(
            "/rooms",
            json={"rounds": 2, "countdown_seconds": 0.3, "n_bots": 1, "seed": 5},
        ).json()["room"]
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "join", "room": room_id, "player": "ada"}))
            state = _recv_until(ws, "state")
            assert [p["player"] for p in state["roster"]] == ["bot0", "ada"]

            ws.send_text(json.dumps({"type": "start", "room": room_id, "player": "ada"}))
            start = _recv_until(ws, "round_start")
            assert start["round"] == 1

            ws.send_text(
                json.dumps({"type": "choose", "room": room_id, "player": "ada", "value": 1})
            )
            ack = _recv_until(ws, "state")
            assert ack["your_choice"] == 1

            result = _recv_until(ws, "round_result")
            assert result["round"] == 1
            assert "ada" in result["scores"]

            result2 = _recv_until(ws, "round_result")
            assert result2["round"] == 2

        # Round log persisted before the results were broadcast.
        log = client.get(f"/rooms/{room_id}/log")
        assert log.status_code == 200
        lines = [l for l in log.text.splitlines() if l.strip()]
        assert len(lines) == 2

        metrics_response = client.get(f"/rooms/{room_id}/metrics")
        assert metrics_response.status_code == 200
        assert metrics_response.json()["n_rounds"] == 2

    def test_unknown_room_over_ws(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "join", "room": "nope", "player": "ada"}))
            message = ws.receive_json()
            assert message["type"] == "error"
            assert message["code"] == "not_found"

    def test_malformed_payload(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text("{broken")
            message = ws.receive_json()
            assert message["type"] == "error"
            assert message["code"] == "protocol"

    def test_late_choice_rejected_round_unchanged(self, client):
        room_id = client.post(
            "/rooms",
            json={"rounds": 1, "countdown_seconds": 0.2, "n_bots": 1, "seed": 1},
        ).json()["room"]
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "join", "room": room_id, "player": "ada"}))
            _recv_until(ws, "state")
            ws.send_text(json.dumps({"type": "start", "room": room_id, "player": "ada"}))
            _recv_until(ws, "round_start")
            result = _recv_until(ws, "round_result")
            assert result["round"] == 1
            # The game is over; a straggler choose cannot touch the round.
            ws.send_text(
                json.dumps({"type": "choose", "room": room_id, "player": "ada", "value": -1})
            )
            error = _recv_until(ws, "error")
            assert error["code"] == "not_counting_down"
        log = client.get(f"/rooms/{room_id}/log")
        record = json.loads(log.text.splitlines()[0])
        assert record["choices"][1] == 0  # ada's slot: no choice before deadline


class TestServiceConfig:
    def test_file_and_env_overrides(self, tmp_path, monkeypatch):
        config = tmp_path / "service.json"
        config.write_text(json.dumps({"host": "0.0.0.0", "port": 9100, "log_dir": "x"}))
        settings = load_service_config(config)
        assert settings == {"host": "0.0.0.0", "port": 9100, "log_dir": "x"}
        monkeypatch.setenv("EFFBID_BIND", "10.0.0.1:9200")
        monkeypatch.setenv("EFFBID_LOG_DIR", str(tmp_path / "logs"))
        settings = load_service_config(config)
        assert settings["host"] == "10.0.0.1"
        assert settings["port"] == 9200
        assert settings["log_dir"] == str(tmp_path / "logs")

    def test_defaults_without_file(self):
        settings = load_service_config(None)
        assert settings["port"] == 8000
