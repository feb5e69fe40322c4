"""Deterministic session core: one tick loop owns all mutable state.

The engine is transport-agnostic: input poses, joint configurations or
sensor pairs are submitted from any thread (freshest one wins), control
commands are queued, and `tick(t)` consumes both, updates the ring, runs
the task metrics, and returns the state message broadcast to UI clients.
All computation is pure given the submitted inputs, which is what makes
archived sessions replayable bit-for-bit.
"""
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

from ..arm import ArmModel, ImuPair, JointConfig, arm_skeleton, joints_to_imus, wrist_pose
from ..geom import RigidTransform, Vector3
from ..task import (
    Ring,
    TrialConfig,
    TrialRecord,
    TrialRunner,
    Wire,
    closest_point,
    collision_threshold,
)
from .mapping import Mapping, apply_mapping, engage_clutch, release_clutch

INPUT_SOURCES = ("imusim", "datagram", "ui")

_X = Vector3(1.0, 0.0, 0.0)


class Phase(str, enum.Enum):
    IDLE = "idle"
    RUNNING = "running"
    DONE = "done"


@dataclass(frozen=True, slots=True)
class SessionConfig:
    wire: Wire
    source: str = "ui"
    loop_rate: float = 50.0
    mapping: Mapping = Mapping()
    arm: ArmModel = ArmModel()
    ring_inner_radius: float = 0.030
    ring_outer_radius: float = 0.050
    trial: TrialConfig = field(default_factory=TrialConfig)
    stale_timeout: float = 1.0

    def __post_init__(self) -> None:
        if self.source not in INPUT_SOURCES:
            raise ValueError(f"unknown input source {self.source!r}")
        if self.loop_rate <= 0.0:
            raise ValueError("loop rate must be positive")


@dataclass(frozen=True, slots=True)
class TickRecord:
    """What one tick consumed; enough to replay the session exactly."""

    index: int
    t: float
    pose: RigidTransform | None
    commands: tuple[dict, ...] = ()


@dataclass(frozen=True, slots=True)
class _Submission:
    t: float
    pose: RigidTransform
    skeleton: tuple[Vector3, Vector3, Vector3, Vector3] | None = None


class SessionEngine:
    """Single-writer session state machine.

    Thread model: `submit_*` and `command` may be called from ingestion
    threads; `tick` must be called from exactly one loop thread and is the
    only writer of session state.
    """

    def __init__(self, config: SessionConfig) -> None:
        self.config = config
        self.mapping = config.mapping
        self._lock = threading.Lock()
        self._pending: _Submission | None = None
        self._commands: list[dict] = []
        self._applied: _Submission | None = None
        self._last_submit_t: float | None = None
        self.phase = Phase.IDLE
        self._runner: TrialRunner | None = None
        self.last_trial: TrialRecord | None = None
        self.trials: list[TrialRecord] = []
        self.ticks: list[TickRecord] = []
        self._tick_index = 0
        self._output_pose = apply_mapping(self.mapping, RigidTransform())
        self._ring = self._make_ring(self._output_pose)
        self._stale = False

    # -- ingestion side --------------------------------------------------

    def submit_pose(self, t: float, pose: RigidTransform) -> None:
        self._submit(_Submission(t=t, pose=pose))

    def submit_imus(self, t: float, imus: ImuPair) -> None:
        pose = wrist_pose(self.config.arm, imus)
        self._submit(_Submission(t=t, pose=pose, skeleton=arm_skeleton(self.config.arm, imus)))

    def submit_joints(self, t: float, q: tuple[float, float, float, float, float]) -> None:
        self.submit_imus(t, joints_to_imus(JointConfig(*q), t=t))

    def command(self, msg: dict) -> None:
        if msg.get("type") not in ("start", "stop", "clutch"):
            raise ValueError(f"unknown command {msg!r}")
        with self._lock:
            self._commands.append(dict(msg))

    def _submit(self, sub: _Submission) -> None:
        with self._lock:
            # freshest-sample semantics: drop anything older than the last
            # submission instead of queueing history
            if self._last_submit_t is None or sub.t >= self._last_submit_t:
                self._pending = sub
                self._last_submit_t = sub.t

    # -- tick loop --------------------------------------------------------

    def tick(self, t: float) -> dict:
        with self._lock:
            commands = tuple(self._commands)
            self._commands.clear()
            pending = self._pending
            self._pending = None
            last_submit_t = self._last_submit_t

        consumed_pose = None
        if pending is not None and (
            self._applied is None or pending.t >= self._applied.t
        ):
            self._applied = pending
            consumed_pose = pending.pose

        for cmd in commands:
            self._handle_command(cmd)

        # The ring holds on stale input simply because the applied pose
        # stops changing; the flag is surfaced to the UI.
        input_pose = self._applied.pose if self._applied is not None else RigidTransform()
        self._stale = last_submit_t is not None and (t - last_submit_t) > self.config.stale_timeout
        self._output_pose = apply_mapping(self.mapping, input_pose)
        self._ring = self._make_ring(self._output_pose)

        if self.phase is Phase.RUNNING and self._runner is not None:
            self._runner.feed(t, self._ring)
            if self._runner.completed:
                self._finish_trial()

        self.ticks.append(
            TickRecord(index=self._tick_index, t=t, pose=consumed_pose, commands=commands)
        )
        self._tick_index += 1
        return self._state_message(t)

    def finish(self) -> None:
        """Finalize a still-running trial (stream ended)."""
        if self.phase is Phase.RUNNING:
            self._finish_trial()

    # -- internals --------------------------------------------------------

    def _make_ring(self, pose: RigidTransform) -> Ring:
        return Ring(
            center=pose.translation,
            axis=pose.rotation.rotate(_X),
            inner_radius=self.config.ring_inner_radius,
            outer_radius=self.config.ring_outer_radius,
        )

    def _handle_command(self, cmd: dict) -> None:
        kind = cmd["type"]
        input_pose = self._applied.pose if self._applied is not None else RigidTransform()
        if kind == "clutch":
            if cmd.get("engaged"):
                self.mapping = engage_clutch(self.mapping, input_pose)
            else:
                self.mapping = release_clutch(self.mapping, input_pose)
        elif kind == "start":
            if self.phase is Phase.RUNNING:
                return
            self._runner = TrialRunner(self.config.wire, self.config.trial)
            self.phase = Phase.RUNNING
        elif kind == "stop":
            if self.phase is Phase.RUNNING:
                self._finish_trial()
            elif self.phase is Phase.DONE:
                self.phase = Phase.IDLE

    def _finish_trial(self) -> None:
        record = self._runner.record()
        self.last_trial = record
        self.trials.append(record)
        self._runner = None
        self.phase = Phase.DONE

    def _state_message(self, t: float) -> dict:
        ring = self._ring
        c_wire, v_wire, s = closest_point(self.config.wire, ring.center)
        pos_err = ring.center.distance_to(c_wire)
        ori_err = math.degrees(math.acos(min(1.0, abs(v_wire.dot(ring.axis)))))
        hit = pos_err > collision_threshold(self.config.wire, ring)

        skeleton = self._applied.skeleton if self._applied is not None else None
        arm_msg = None
        if skeleton is not None:
            names = ("shoulder", "elbow", "wrist", "fingertip")
            arm_msg = {n: list(p.as_tuple()) for n, p in zip(names, skeleton)}

        elapsed = None
        if self.phase is Phase.RUNNING and self._runner is not None:
            rec = self._runner.record()
            elapsed = (t - rec.samples[0].t) if rec.samples else 0.0
        elif self.phase is Phase.DONE and self.last_trial and self.last_trial.samples:
            elapsed = self.last_trial.samples[-1].t - self.last_trial.samples[0].t

        return {
            "t": t,
            "ring": {
                "p": list(ring.center.as_tuple()),
                "q": list(self._output_pose.rotation.as_tuple()),
            },
            "arm": arm_msg,
            "pos_err_mm": 1000.0 * pos_err,
            "ori_err_deg": ori_err,
            "collision": hit,
            "trial": {
                "phase": self.phase.value,
                "elapsed_s": elapsed,
                "progress_s": s,
            },
            "stale": self._stale,
        }
