"""Network session gateway: live input events in, state stream out.

Each session owns one engine instance; every client message is appended to
the session trace before it takes effect, and all mutation is serialized
through the session lock, so the downloaded trace replays offline to the
same command log the live session produced. State streaming is read-only
fan-out over per-subscriber queues.
"""

from __future__ import annotations

import asyncio
import time
import uuid
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .config import HarnessConfig
from .engine import SessionEngine
from .scenario import replace_scene

_TICK_SLEEP = 0.02  # wall seconds between session clock advances

PROTOCOL_VERSION = 1


class InvalidConfig(Exception):
    pass


@dataclass
class Session:
    session_id: str
    engine: SessionEngine
    time_scale: float
    started_at: float = field(default_factory=time.time)
    status: str = "running"
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    server_seq: int = 0
    ticker: asyncio.Task | None = None

    def session_time(self) -> float:
        return (time.time() - self.started_at) * self.time_scale

    def descriptor(self) -> dict:
        return {
            "session_id": self.session_id,
            "started_at": self.started_at,
            "status": self.status,
            "protocol_version": PROTOCOL_VERSION,
            "time_scale": self.time_scale,
        }

    def broadcast(self, message: dict) -> None:
        self.server_seq += 1
        message = {"session_id": self.session_id, "server_seq": self.server_seq, **message}
        for queue in list(self.subscribers):
            queue.put_nowait(message)


def _apply_overrides(config: HarnessConfig, overrides: dict) -> HarnessConfig:
    """Per-session config deltas: {"speech": {...}, "fusion": {...}, ...}."""
    out = replace_scene(config, config.scene)
    try:
        if "speech" in overrides:
            out.speech = replace(config.speech, **overrides["speech"])
        if "fusion" in overrides:
            out.fusion = replace(config.fusion, **overrides["fusion"])
        if "sim" in overrides:
            out.sim = replace(config.sim, **overrides["sim"])
        if "noise" in overrides:
            out.noise = replace(config.noise, **overrides["noise"])
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from exc
    return out


def create_app(
    config: HarnessConfig | None = None,
    time_scale: float = 1.0,
    console_dir: str | None = None,
) -> FastAPI:
    base_config = config or HarnessConfig()
    app = FastAPI(title="cogest session service")
    sessions: dict[str, Session] = {}
    counter = {"n": 0}

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    async def _ticker(session: Session) -> None:
        try:
            while session.status == "running":
                await asyncio.sleep(_TICK_SLEEP)
                async with session.lock:
                    target = session.session_time()
                    if target > session.engine.clock:
                        session.engine.run_until(target)
        except asyncio.CancelledError:
            pass

    @app.post("/api/sessions")
    async def create_session(overrides: dict | None = None):
        try:
            session_config = _apply_overrides(base_config, overrides or {})
        except InvalidConfig as exc:
            raise HTTPException(status_code=400, detail=f"invalid config: {exc}")
        counter["n"] += 1
        session_id = f"s{counter['n']:04d}-{uuid.uuid4().hex[:8]}"
        scale = float((overrides or {}).get("time_scale", time_scale))
        engine = SessionEngine(session_config)
        session = Session(session_id=session_id, engine=engine, time_scale=scale)

        def relay(kind: str, payload: dict) -> None:
            session.broadcast({"type": kind, **payload})

        engine.add_listener(relay)
        sessions[session_id] = session
        session.ticker = asyncio.create_task(_ticker(session))
        return session.descriptor()

    @app.get("/api/sessions/{session_id}")
    async def describe_session(session_id: str):
        return get_session(session_id).descriptor()

    @app.post("/api/sessions/{session_id}/end")
    async def end_session(session_id: str):
        session = get_session(session_id)
        session.status = "ended"
        if session.ticker is not None:
            session.ticker.cancel()
        session.broadcast({"type": "session_ended"})
        return session.descriptor()

    @app.get("/api/sessions/{session_id}/trace")
    async def download_trace(session_id: str):
        session = get_session(session_id)
        async with session.lock:
            trace = session.engine.trace()
            text = trace.dumps() if trace is not None else ""
        return PlainTextResponse(text, media_type="text/plain; charset=utf-8")

    async def _handle_client_message(session: Session, message: dict) -> dict:
        kind = message.get("type")
        async with session.lock:
            t = max(session.session_time(), session.engine.clock)
            engine = session.engine
            if kind == "say":
                engine.submit_utterance(str(message["text"]), t, t)
            elif kind == "wrist":
                side = message.get("side", "left")
                point = (float(message["x"]), float(message["y"]))
                engine.submit_skeleton(
                    t,
                    point if side == "left" else None,
                    point if side == "right" else None,
                )
            elif kind == "point":
                engine.submit_pointing(t, float(message["x"]), float(message["y"]))
            elif kind == "halt":
                engine.submit_halt(t)
            elif kind == "resume":
                engine.submit_resume(t)
            else:
                raise KeyError(f"unknown message type {kind!r}")
        return {"type": "ack", "acked": kind, "client_seq": message.get("client_seq")}

    @app.websocket("/api/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        session = sessions.get(session_id)
        await websocket.accept()
        if session is None:
            await websocket.send_json(
                {"type": "error", "code": "malformed_message", "detail": "unknown session"}
            )
            await websocket.close()
            return

        queue: asyncio.Queue = asyncio.Queue()
        session.subscribers.append(queue)
        async with session.lock:
            snapshot = {
                "session_id": session.session_id,
                "server_seq": session.server_seq,
                "type": "snapshot",
                "state": session.engine.state_snapshot(),
            }
        await websocket.send_json(snapshot)

        async def pump_out() -> None:
            while True:
                message = await queue.get()
                await websocket.send_json(message)
                if message.get("type") == "session_ended":
                    return

        async def pump_in() -> None:
            while True:
                message = await websocket.receive_json()
                if session.status != "running":
                    await websocket.send_json(
                        {"type": "error", "code": "session_ended", "detail": "session has ended"}
                    )
                    continue
                try:
                    ack = await _handle_client_message(session, message)
                except (KeyError, TypeError, ValueError) as exc:
                    await websocket.send_json(
                        {"type": "error", "code": "malformed_message", "detail": str(exc)}
                    )
                    continue
                await websocket.send_json(ack)

        out_task = asyncio.create_task(pump_out())
        in_task = asyncio.create_task(pump_in())
        try:
            done, pending = await asyncio.wait(
                {out_task, in_task}, return_when=asyncio.FIRST_COMPLETED
            )
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            if queue in session.subscribers:
                session.subscribers.remove(queue)

    if console_dir is not None:
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")
    return app
