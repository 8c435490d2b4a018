"""Live control/observation service.

One multiplexed duplex channel carries the protocol: the server pushes
snapshot frames on tick cadence (decimated when the wall clock cannot
keep up), clients push command frames, and a read-only endpoint returns
the current node table. Every frame is a JSON object with a ``v``
version field. The service talks to the engine only through its ordered
command queue and immutable published snapshots; the headless run path
never imports this module.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time

from fastapi import FastAPI
from starlette.websockets import WebSocket, WebSocketDisconnect

from .engine import Engine, TICK_SECONDS

RUNNER_COMMANDS = {"pause", "resume", "set_speed"}


class EngineRunner(threading.Thread):
    """Paces the engine against the wall clock and publishes immutable
    snapshots for any number of readers."""

    def __init__(self, engine: Engine, speed: float = 1.0):
        super().__init__(daemon=True)
        self.engine = engine
        self.speed = max(1e-3, speed)
        self.paused = False
        self.latest: dict | None = engine.snapshot()
        self.generation = 0
        self._stop_event = threading.Event()

    def stop(self) -> None:
        self._stop_event.set()

    def apply(self, command: dict) -> None:
        kind = command.get("type")
        if kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "set_speed":
            self.speed = max(1e-3, float(command.get("multiplier", 1.0)))

    def run(self) -> None:
        next_at = time.monotonic()
        while not self._stop_event.is_set():
            if self.paused:
                time.sleep(0.01)
                next_at = time.monotonic()
                continue
            self.latest = self.engine.step()
            self.generation += 1
            next_at += TICK_SECONDS / self.speed
            delay = next_at - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_at = time.monotonic()  # running behind; do not bank time


def build_app(runner: EngineRunner, push_interval_s: float = 0.02) -> FastAPI:
    app = FastAPI(title="uaanet gateway")
    engine = runner.engine

    @app.get("/nodes")
    def nodes():
        snap = runner.latest
        table = snap["node_table"] if snap else engine.registry.table_rows()
        return {"v": 1, "node_table": table}

    @app.get("/health")
    def health():
        return {"v": 1, "tick": engine.clock.tick}

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()

        async def push_snapshots():
            seen = -1
            while True:
                if runner.generation != seen:
                    seen = runner.generation
                    await ws.send_text(json.dumps(
                        {"v": 1, "type": "snapshot", "data": runner.latest}
                    ))
                await asyncio.sleep(push_interval_s)

        pusher = asyncio.create_task(push_snapshots())
        try:
            while True:
                raw = await ws.receive_text()
                reply = handle_frame(runner, raw)
                await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            pusher.cancel()

    return app


def handle_frame(runner: EngineRunner, raw: str) -> dict:
    """Validate one client frame; returns the ack or error frame to send."""
    try:
        command = json.loads(raw)
    except json.JSONDecodeError as exc:
        return {"v": 1, "type": "error", "reason": f"bad json: {exc}"}
    if not isinstance(command, dict) or "type" not in command:
        return {"v": 1, "type": "error", "reason": "frame must be an object with a type"}
    echo = {k: command[k] for k in ("id",) if k in command}
    kind = command["type"]
    if kind in RUNNER_COMMANDS:
        runner.apply(command)
        return {"v": 1, "type": "ack", "command": kind, **echo}
    reason = runner.engine.validate_command(command)
    if reason is not None:
        return {"v": 1, "type": "error", "reason": reason, **echo}
    runner.engine.submit({k: v for k, v in command.items() if k != "id"})
    return {"v": 1, "type": "ack", "command": kind, **echo}


def serve(engine: Engine, port: int = 8000, speed: float = 1.0,
          host: str = "127.0.0.1") -> None:
    """Run the gateway until interrupted."""
    import uvicorn

    runner = EngineRunner(engine, speed=speed)
    runner.start()
    app = build_app(runner)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        runner.stop()
