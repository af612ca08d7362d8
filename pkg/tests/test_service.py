import json
import time

import pytest
from fastapi.testclient import TestClient

from cogest.config import HarnessConfig
from cogest.engine import SessionEngine
from cogest.service import create_app
from cogest.trace import loads

TIME_SCALE = 40.0  # simulated seconds per wall second: keeps tests quick


@pytest.fixture()
def client():
    app = create_app(HarnessConfig(), time_scale=TIME_SCALE)
    with TestClient(app) as client:
        yield client


def create_session(client, overrides=None):
    response = client.post("/api/sessions", json=overrides or {})
    assert response.status_code == 200
    return response.json()


def collect_until(ws, predicate, budget=4000):
    """Read stream messages until predicate(msg) is true; return all seen."""
    seen = []
    for _ in range(budget):
        message = ws.receive_json()
        seen.append(message)
        if predicate(message):
            return seen
    raise AssertionError(f"condition not met after {budget} messages")


def is_command(kind):
    return lambda m: m.get("type") == "record" and m.get("kind") == "command" and m.get("command") == kind


class TestSessionLifecycle:
    def test_create_returns_running_descriptor(self, client):
        desc = create_session(client)
        assert desc["status"] == "running"
        assert desc["session_id"]

    def test_session_ids_unique(self, client):
        a = create_session(client)
        b = create_session(client)
        assert a["session_id"] != b["session_id"]

    def test_invalid_config_rejected(self, client):
        response = client.post(
            "/api/sessions", json={"speech": {"pause_filter": -1.0}}
        )
        assert response.status_code == 400
        assert "invalid config" in response.json()["detail"]

    def test_unknown_session_404(self, client):
        assert client.get("/api/sessions/nope").status_code == 404

    def test_end_session(self, client):
        desc = create_session(client)
        sid = desc["session_id"]
        ended = client.post(f"/api/sessions/{sid}/end")
        assert ended.json()["status"] == "ended"


class TestStream:
    def test_snapshot_on_subscribe(self, client):
        sid = create_session(client)["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            first = ws.receive_json()
            assert first["type"] == "snapshot"
            assert first["state"]["phase"] == "idle"
            assert len(first["state"]["objects"]) == 9

    def test_unknown_session_stream_errors(self, client):
        with client.websocket_connect("/api/sessions/ghost/stream") as ws:
            message = ws.receive_json()
            assert message["type"] == "error"
            assert message["code"] == "malformed_message"

    def test_say_stop_halts_within_latency_model(self, client):
        sid = create_session(client)["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_json()  # snapshot
            sent_wall = time.time()
            ws.send_json({"type": "say", "text": "stop", "client_seq": 1})
            seen = collect_until(ws, is_command("halt"))
            elapsed_sim = (time.time() - sent_wall) * TIME_SCALE
            # pause filter 0.5 + latency 1.9 +- 0.2, plus streaming slack
            assert elapsed_sim < 10.0
            acks = [m for m in seen if m.get("type") == "ack"]
            assert acks and acks[0]["client_seq"] == 1

    def test_wrist_hold_in_stop_zone_pauses_robot(self, client):
        sid = create_session(client)["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_json()
            zone_point = {"x": 231.0, "y": 189.0}  # stop square centre
            for i in range(8):
                ws.send_json({"type": "wrist", "side": "left", **zone_point})
            collect_until(
                ws,
                lambda m: m.get("type") == "record"
                and m.get("kind") == "sim_event"
                and m.get("event") == "phase_changed"
                and m.get("data", {}).get("to") == "paused",
            )

    def test_point_click_grounds_handover(self, client):
        # perfect detector: the grounded id must then be exact
        sid = create_session(
            client, {"noise": {"detection_p_detect": 1.0, "detection_jitter_px": 0.0}}
        )["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_json()
            ws.send_json({"type": "say", "text": "give me this rod", "client_seq": 1})
            # a human clicks after speaking: land the click once the intent
            # is pending (recognition takes ~2.4s of session time)
            time.sleep(0.07)
            ws.send_json({"type": "point", "x": 100.0, "y": 270.0, "client_seq": 2})
            seen = collect_until(ws, is_command("handover"))
            handover = seen[-1]
            assert handover["object_id"] == 2
            assert "pointing" in handover["provenance"]

    def test_malformed_message_reported(self, client):
        sid = create_session(client)["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_json()
            ws.send_json({"type": "teleport"})
            message = collect_until(ws, lambda m: m.get("type") == "error")[-1]
            assert message["code"] == "malformed_message"

    def test_two_subscribers_see_identical_sequences(self, client):
        sid = create_session(client)["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws_a:
            with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws_b:
                ws_a.receive_json()
                ws_b.receive_json()
                ws_a.send_json({"type": "halt", "client_seq": 1})
                a = [
                    m
                    for m in collect_until(ws_a, is_command("halt"))
                    if m.get("type") == "record"
                ]
                b = [
                    m
                    for m in collect_until(ws_b, is_command("halt"))
                    if m.get("type") == "record"
                ]
                key = lambda ms: [(m["server_seq"], m["kind"]) for m in ms]
                assert key(b)[: len(key(a))] == key(a)[: len(key(b))]


class TestTraceDownload:
    def test_offline_replay_matches_live_commands(self, client):
        sid = create_session(
            client, {"noise": {"detection_p_detect": 1.0, "detection_jitter_px": 0.0}}
        )["session_id"]
        with client.websocket_connect(f"/api/sessions/{sid}/stream") as ws:
            ws.receive_json()
            ws.send_json({"type": "say", "text": "give me another rocker arm", "client_seq": 1})
            live = collect_until(ws, is_command("handover"))
        client.post(f"/api/sessions/{sid}/end")
        text = client.get(f"/api/sessions/{sid}/trace").text

        trace = loads(text)
        offline = SessionEngine(HarnessConfig(), auto_detections=False, record=False)
        offline.feed_trace(trace)

        live_commands = [
            {k: m[k] for k in ("command", "object_id", "provenance")}
            for m in live
            if m.get("type") == "record" and m.get("kind") == "command"
        ]
        offline_commands = [
            {
                "command": c.kind.value,
                "object_id": c.object_id,
                "provenance": dict(sorted(c.provenance.items())),
            }
            for c in offline.command_log
        ]
        assert offline_commands == live_commands
        assert offline_commands[0]["command"] == "handover"
        assert offline_commands[0]["object_id"] == 3


class TestConsoleAssets:
    def test_static_console_served_at_root(self, tmp_path):
        (tmp_path / "index.html").write_text("<title>console</title>", encoding="utf-8")
        app = create_app(HarnessConfig(), console_dir=str(tmp_path))
        with TestClient(app) as static_client:
            response = static_client.get("/")
            assert response.status_code == 200
            assert "console" in response.text
