"""Live transports around the session engine.

Three activities share the engine: a UDP thread ingests pose datagrams, a
tick thread runs the loop and publishes state snapshots, and the web app
relays snapshots to browser clients and feeds their control/input
messages back. The engine is the only writer of session state; everything
else communicates through submissions, the command queue, and a
latest-state slot.
"""
from __future__ import annotations

import asyncio
import json
import logging
import socket
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..geom import RigidTransform, UnitQuaternion, Vector3, handedness_convert
from ..task import collision_threshold, Ring
from .engine import Phase, SessionEngine
from .protocol import DatagramError, decode_datagram

log = logging.getLogger(__name__)


class UdpPoseListener(threading.Thread):
    """Receives 73-byte pose datagrams and forwards the freshest ones.

    Out-of-order packets (seq not above the highest seen) are dropped, so
    the submitted pose is always a function of the max-seq datagram.
    Malformed packets are counted and skipped.
    """

    def __init__(
        self,
        bridge: "SessionBridge",
        host: str = "127.0.0.1",
        port: int = 9870,
        flip_handedness: bool = False,
    ) -> None:
        super().__init__(daemon=True, name="udp-pose-listener")
        self.bridge = bridge
        self.flip_handedness = flip_handedness
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((host, port))
        self.sock.settimeout(0.2)
        self.port = self.sock.getsockname()[1]
        self.received = 0
        self.dropped = 0
        self.malformed = 0
        self._last_seq: int | None = None
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                buf, _ = self.sock.recvfrom(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                dg = decode_datagram(buf)
            except DatagramError as exc:
                self.malformed += 1
                log.debug("dropping malformed datagram: %s", exc)
                continue
            if self._last_seq is not None and dg.seq <= self._last_seq:
                self.dropped += 1
                continue
            self._last_seq = dg.seq
            self.received += 1
            pose = dg.pose()
            if self.flip_handedness:
                p, q = handedness_convert(pose.translation, pose.rotation)
                pose = RigidTransform(q, p)
            self.bridge.submit_pose(pose)

    def stop(self) -> None:
        self._stop.set()
        self.sock.close()


class SessionBridge:
    """Shared glue: engine + clock + latest published state."""

    def __init__(self, engine: SessionEngine) -> None:
        self.engine = engine
        self._t0 = time.monotonic()
        self._lock = threading.Lock()
        self._state_id = 0
        self._state: dict | None = None
        self._summary_id = 0
        self._summary: dict | None = None
        self._trials_seen = 0

    def now(self) -> float:
        return time.monotonic() - self._t0

    # ingestion --------------------------------------------------------

    def submit_pose(self, pose: RigidTransform) -> None:
        self.engine.submit_pose(self.now(), pose)

    def handle_client_message(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind in ("start", "stop", "clutch"):
            self.engine.command(msg)
        elif kind == "input_pose":
            pose = RigidTransform(
                UnitQuaternion.from_seq(msg["q"]), Vector3.from_seq(msg["p"])
            )
            self.submit_pose(pose)
        elif kind == "input_joints":
            self.engine.submit_joints(self.now(), tuple(float(v) for v in msg["q"]))
        else:
            raise ValueError(f"unknown client message type {kind!r}")

    # tick side --------------------------------------------------------

    def tick_once(self, t: float | None = None) -> dict:
        state = self.engine.tick(self.now() if t is None else t)
        summary = None
        if len(self.engine.trials) > self._trials_seen:
            self._trials_seen = len(self.engine.trials)
            trial = self.engine.trials[-1]
            if trial.samples:
                from ..task import summarize

                s = summarize(trial)
                summary = {
                    "type": "summary",
                    "completed": s.completed,
                    "completion_time_s": s.completion_time_s,
                    "mean_position_error_mm": s.mean_position_error_mm,
                    "mean_orientation_error_deg": s.mean_orientation_error_deg,
                    "non_collision_pct": s.non_collision_pct,
                }
        with self._lock:
            self._state_id += 1
            self._state = state
            if summary is not None:
                self._summary_id += 1
                self._summary = summary
        return state

    def latest_state(self) -> tuple[int, dict | None]:
        with self._lock:
            return self._state_id, self._state

    def latest_summary(self) -> tuple[int, dict | None]:
        with self._lock:
            return self._summary_id, self._summary

    def scene_message(self) -> dict:
        cfg = self.engine.config
        ring = Ring(
            inner_radius=cfg.ring_inner_radius, outer_radius=cfg.ring_outer_radius
        )
        return {
            "type": "scene",
            "wire": {
                "name": cfg.wire.name,
                "polyline": [list(p.as_tuple()) for p in cfg.wire.polyline(200)],
                "tube_radius": cfg.wire.tube_radius,
                "length": cfg.wire.length,
            },
            "ring": {
                "inner_radius": cfg.ring_inner_radius,
                "outer_radius": cfg.ring_outer_radius,
            },
            "threshold_mm": 1000.0 * collision_threshold(cfg.wire, ring),
            "loop_rate": cfg.loop_rate,
        }


class TickLoop(threading.Thread):
    """Fixed-rate driver of the engine; sole writer of session state."""

    def __init__(self, bridge: SessionBridge, on_trial_done=None) -> None:
        super().__init__(daemon=True, name="session-tick-loop")
        self.bridge = bridge
        self.on_trial_done = on_trial_done
        self._stop = threading.Event()

    def run(self) -> None:
        dt = 1.0 / self.bridge.engine.config.loop_rate
        next_t = time.monotonic()
        prev_phase = self.bridge.engine.phase
        while not self._stop.is_set():
            self.bridge.tick_once()
            phase = self.bridge.engine.phase
            if phase is Phase.DONE and prev_phase is not Phase.DONE and self.on_trial_done:
                try:
                    self.on_trial_done(self.bridge.engine.last_trial)
                except Exception:
                    log.exception("trial-done hook failed")
            prev_phase = phase
            next_t += dt
            delay = next_t - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_t = time.monotonic()

    def stop(self) -> None:
        self._stop.set()


def build_app(bridge: SessionBridge, frontend_dir: str | Path | None = None) -> FastAPI:
    """FastAPI app: /ws state+control channel, static UI assets at /."""
    app = FastAPI(title="imuteleop console")
    send_interval = 1.0 / max(30.0, bridge.engine.config.loop_rate)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        await ws.send_text(json.dumps(bridge.scene_message()))

        async def reader() -> None:
            while True:
                msg = json.loads(await ws.receive_text())
                try:
                    bridge.handle_client_message(msg)
                except (ValueError, KeyError, TypeError) as exc:
                    log.debug("ignoring bad client message: %s", exc)

        reader_task = asyncio.create_task(reader())
        last_sent = -1
        last_summary = bridge.latest_summary()[0]
        try:
            while True:
                await asyncio.sleep(send_interval)
                state_id, state = bridge.latest_state()
                if state is not None and state_id != last_sent:
                    await ws.send_text(json.dumps(state))
                    last_sent = state_id
                summary_id, summary = bridge.latest_summary()
                if summary is not None and summary_id != last_summary:
                    await ws.send_text(json.dumps(summary))
                    last_summary = summary_id
                if reader_task.done():
                    break
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            reader_task.cancel()

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"ok": True, "phase": bridge.engine.phase.value}

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
    return app


@dataclass
class ServeOptions:
    http_host: str = "127.0.0.1"
    http_port: int = 8000
    udp_host: str = "127.0.0.1"
    udp_port: int = 9870
    flip_handedness: bool = False
    frontend_dir: str | None = None
    record_dir: str | None = None


class ServeRuntime:
    """Owns the live session: tick loop, UDP ingestion, web app."""

    def __init__(self, engine: SessionEngine, options: ServeOptions) -> None:
        self.engine = engine
        self.options = options
        self.bridge = SessionBridge(engine)
        self._trial_count = 0
        self.tick_loop = TickLoop(self.bridge, on_trial_done=self._persist_trial)
        self.udp: UdpPoseListener | None = None
        if engine.config.source == "datagram":
            self.udp = UdpPoseListener(
                self.bridge,
                host=options.udp_host,
                port=options.udp_port,
                flip_handedness=options.flip_handedness,
            )
        self.app = build_app(self.bridge, options.frontend_dir)

    def _persist_trial(self, trial) -> None:
        if self.options.record_dir is None or trial is None:
            return
        from ..session.archive import build_archive, save_archive
        from ..task import format_wire

        cfg = self.engine.config
        meta = {
            "label": f"{cfg.wire.name}/{cfg.source}",
            "source": cfg.source,
            "wire_id": cfg.wire.name,
            "wire": format_wire(cfg.wire),
            "loop_rate": cfg.loop_rate,
            "scale": cfg.mapping.scale,
            "offset_p": list(cfg.mapping.offset.translation.as_tuple()),
            "ring": {
                "inner_radius": cfg.ring_inner_radius,
                "outer_radius": cfg.ring_outer_radius,
            },
            "trial": {
                "start_margin": cfg.trial.start_margin,
                "end_margin": cfg.trial.end_margin,
            },
        }
        archive = build_archive(meta, ticks=self.engine.ticks, trials=[trial])
        out = Path(self.options.record_dir)
        out.mkdir(parents=True, exist_ok=True)
        self._trial_count += 1
        save_archive(archive, out / f"trial-{self._trial_count:03d}.jsonl")
        log.info("persisted trial %d", self._trial_count)

    def start_background(self) -> None:
        self.tick_loop.start()
        if self.udp is not None:
            self.udp.start()

    def stop(self) -> None:
        self.tick_loop.stop()
        if self.udp is not None:
            self.udp.stop()

    def serve_forever(self) -> None:
        import uvicorn

        self.start_background()
        try:
            uvicorn.run(
                self.app,
                host=self.options.http_host,
                port=self.options.http_port,
                log_level="warning",
            )
        finally:
            self.stop()


class ImusimFeeder(threading.Thread):
    """Demo input source: replays simulated sensor traversals in real time."""

    def __init__(self, bridge: SessionBridge, make_stream) -> None:
        super().__init__(daemon=True, name="imusim-feeder")
        self.bridge = bridge
        self.make_stream = make_stream  # (pass_index) -> list[ImuPair]
        self._stop = threading.Event()

    def run(self) -> None:
        pass_index = 0
        t_base = self.bridge.now()
        while not self._stop.is_set():
            pairs = self.make_stream(pass_index)
            for pair in pairs:
                if self._stop.is_set():
                    return
                target = t_base + pair.t
                delay = target - self.bridge.now()
                if delay > 0:
                    time.sleep(delay)
                self.bridge.engine.submit_imus(target, pair)
            t_base += pairs[-1].t
            pass_index += 1

    def stop(self) -> None:
        self._stop.set()
