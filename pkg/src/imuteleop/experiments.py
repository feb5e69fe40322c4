"""Scripted-operator simulations and the drift-tolerance experiment.

A simulated operator follows the wire with the arm model: a joint-space
trajectory is fit so that the true wrist path slides along the centerline,
the sensors corrupt it with drift, and the session engine runs exactly as
it would live. An optional proportional correction models the human
closing the loop on what they see: each tick it steers the input a bit
toward the wire, which is the mechanism the whole system design leans on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .arm import ArmModel, JointConfig, wrist_pose
from .geom import RigidTransform, Vector3, rot_y, rot_z
from .imusim import DriftModel, Segment, Trajectory, stream
from .task import TrialConfig, Wire, closest_point, make_straight_wire
from .teleop import Mapping, SessionConfig, SessionEngine

# Keeps both default wires inside the arm's comfortable reach: the task
# frame sits 0.35 m in front of the shoulder (task = input + offset).
DEFAULT_OFFSET = Vector3(0.0, -0.35, 0.0)

_Z = Vector3(0.0, 0.0, 1.0)
_Y = Vector3(0.0, 1.0, 0.0)


def reach_joints(arm: ArmModel, target: Vector3) -> JointConfig:
    """Joint configuration placing the wrist exactly on `target`.

    Elbow-down branch of the two-link reach, bending in the vertical plane
    through the target. Raises if the point is outside the annular
    workspace or needs more than the 150 deg elbow range.
    """
    l1, l2 = arm.l_u, arm.l_f
    d = target.norm()
    if d >= l1 + l2 - 1e-9:
        raise ValueError(f"target at {d:.3f} m beyond reach {l1 + l2:.3f} m")
    cos_q4 = (d * d - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    q4 = math.acos(max(-1.0, min(1.0, cos_q4)))
    if q4 > math.radians(150.0):
        raise ValueError(f"target at {d:.3f} m needs elbow beyond 150 deg")

    u = target.normalized()
    n = u.cross(_Z)
    if n.norm() <= 1e-9:
        raise ValueError("target on the vertical axis is a singular direction")
    n = n.normalized()
    cos_gamma = (d * d + l1 * l1 - l2 * l2) / (2.0 * d * l1)
    gamma = math.acos(max(-1.0, min(1.0, cos_gamma)))

    from .geom import quat_from_axis_angle

    cand = [quat_from_axis_angle(n, sign * gamma).rotate(u) for sign in (1.0, -1.0)]
    a1 = min(cand, key=lambda v: v.z)  # elbow down
    a2 = ((target - a1 * l1) * (1.0 / l2)).normalized()

    q2 = math.asin(max(-1.0, min(1.0, -a1.z)))
    if math.cos(q2) <= 1e-9:
        raise ValueError("straight-up arm pose is singular")
    q1 = math.atan2(a1.y, a1.x)

    if q4 < 1e-9:
        q3 = 0.0
    else:
        rq = rot_z(q1) * rot_y(q2)
        j_hat = rq.rotate(_Y)
        k_hat = rq.rotate(_Z)
        b = (a2 - a1 * math.cos(q4)) * (1.0 / math.sin(q4))
        q3 = math.atan2(b.dot(k_hat), b.dot(j_hat))
    return JointConfig(q1=q1, q2=q2, q3=q3, q4=q4, q5=0.0)


def wire_follow_trajectory(
    wire: Wire,
    arm: ArmModel,
    offset: Vector3 = DEFAULT_OFFSET,
    duration: float = 20.0,
    step: float = 0.1,
) -> Trajectory:
    """Joint trajectory whose true wrist path traverses the wire centerline.

    A short hold parks the wrist on the wire start, then densely spaced
    linear segments sweep it to the far end at constant speed (the
    joint-space interpolation error between knots is far below a
    millimeter at this spacing).
    """
    if duration <= 2 * step:
        raise ValueError("duration too short for the traverse")
    n = max(1, round((duration - step) / step))
    segs = [Segment(step, reach_joints(arm, wire.point_at(0.0) - offset), "hold")]
    lin = (duration - step) / n
    for k in range(1, n + 1):
        s = wire.length * k / n
        segs.append(Segment(lin, reach_joints(arm, wire.point_at(s) - offset), "linear"))
    return Trajectory(segments=tuple(segs))


@dataclass(frozen=True, slots=True)
class SimulationSetup:
    wire: Wire
    arm: ArmModel = ArmModel()
    drift: DriftModel = field(default_factory=DriftModel)
    duration: float = 20.0
    sensor_rate: float = 100.0
    loop_rate: float = 50.0
    feedback_gain: float = 0.0  # 1/s; 0 = open loop
    offset: Vector3 = DEFAULT_OFFSET
    scale: float = 1.0
    trial: TrialConfig = field(default_factory=TrialConfig)
    start_trial: bool = True


@dataclass(slots=True)
class SimulationRun:
    setup: SimulationSetup
    engine: SessionEngine
    states: list[dict]
    imu_stream: list


def simulated_stream(setup: SimulationSetup) -> list:
    """Corrupted sensor stream for a setup (reusable across runs)."""
    traj = wire_follow_trajectory(setup.wire, setup.arm, setup.offset, setup.duration)
    return stream(traj, setup.drift, setup.sensor_rate)


def run_simulation(setup: SimulationSetup, imu_stream: list | None = None) -> SimulationRun:
    """Drive a full teleoperation session from the simulated sensors."""
    pairs = imu_stream if imu_stream is not None else simulated_stream(setup)
    mapping = Mapping(
        scale=setup.scale,
        offset=RigidTransform(translation=setup.offset),
    )
    engine = SessionEngine(
        SessionConfig(
            wire=setup.wire,
            source="imusim",
            loop_rate=setup.loop_rate,
            mapping=mapping,
            arm=setup.arm,
            trial=setup.trial,
        )
    )
    if setup.start_trial:
        engine.command({"type": "start"})

    states = []
    correction = Vector3()
    dt = 1.0 / setup.loop_rate
    n_ticks = int(math.floor(setup.duration * setup.loop_rate)) + 1
    idx = 0
    for k in range(n_ticks):
        t = k / setup.loop_rate
        while idx + 1 < len(pairs) and pairs[idx + 1].t <= t:
            idx += 1
        pose = wrist_pose(setup.arm, pairs[idx])
        engine.submit_pose(
            pairs[idx].t, RigidTransform(pose.rotation, pose.translation + correction)
        )
        state = engine.tick(t)
        states.append(state)
        if setup.feedback_gain > 0.0:
            ring_center = Vector3.from_seq(state["ring"]["p"])
            c_wire, _, _ = closest_point(setup.wire, ring_center)
            correction = correction + (c_wire - ring_center) * (setup.feedback_gain * dt)
    engine.finish()
    return SimulationRun(setup=setup, engine=engine, states=states, imu_stream=pairs)


def position_error_series(run: SimulationRun) -> tuple[list[float], list[float]]:
    """(tick times, position errors in meters) for a finished run."""
    ts = [s["t"] for s in run.states]
    errs = [s["pos_err_mm"] / 1000.0 for s in run.states]
    return ts, errs


def non_collision_fraction(run: SimulationRun) -> float:
    n = len(run.states)
    return sum(1 for s in run.states if not s["collision"]) / n if n else 0.0


def window_means(values: list[float], windows: int) -> list[float]:
    """Means over equal consecutive windows (trend instrumentation)."""
    size = len(values) // windows
    if size == 0:
        raise ValueError("fewer samples than windows")
    return [
        sum(values[k * size : (k + 1) * size]) / size for k in range(windows)
    ]


@dataclass(frozen=True, slots=True)
class DriftToleranceResult:
    """Open-loop growth vs. closed-loop containment, aggregated over seeds."""

    open_loop_profile: tuple[float, ...]  # seed-mean tracking error per window
    non_collision_pcts: tuple[float, ...]  # per seed, visual-feedback run

    @property
    def open_loop_monotone(self) -> bool:
        return all(a < b for a, b in zip(self.open_loop_profile, self.open_loop_profile[1:]))

    @property
    def mean_non_collision_pct(self) -> float:
        return sum(self.non_collision_pcts) / len(self.non_collision_pcts)


def drift_tolerance_experiment(
    seeds: int = 20,
    duration: float = 60.0,
    gain: float = 2.0,
    windows: int = 6,
    wire: Wire | None = None,
) -> DriftToleranceResult:
    """Open loop, drift accumulates into ever-growing position error; with
    the visual-feedback correction the same sensor streams stay on task.

    The open-loop error is measured against the drift-free reference
    trajectory (what the ring would do with ideal sensors), since that is
    exactly the induced error an operator would be compensating.
    """
    wire = wire or make_straight_wire(0.4)
    base = SimulationSetup(wire=wire, duration=duration, start_trial=False)
    ref = run_simulation(replace(base, drift=DriftModel.zero()))
    ref_pos = [Vector3.from_seq(s["ring"]["p"]) for s in ref.states]

    profiles = []
    non_collision = []
    for seed in range(seeds):
        setup = replace(base, drift=DriftModel(seed=seed))
        pairs = simulated_stream(setup)
        open_run = run_simulation(setup, pairs)
        track = [
            Vector3.from_seq(s["ring"]["p"]).distance_to(r)
            for s, r in zip(open_run.states, ref_pos)
        ]
        profiles.append(window_means(track, windows))
        fb_run = run_simulation(replace(setup, feedback_gain=gain), pairs)
        non_collision.append(100.0 * non_collision_fraction(fb_run))

    profile = tuple(
        sum(p[k] for p in profiles) / len(profiles) for k in range(windows)
    )
    return DriftToleranceResult(
        open_loop_profile=profile, non_collision_pcts=tuple(non_collision)
    )
