"""Synthetic stand-in for the wireless sensors.

Scripted joint trajectories drive the arm model to produce ground-truth
orientation streams; a parameterized drift-plus-noise error process then
corrupts them. Drift is modeled post-fusion as an orientation error
composed onto the truth (a gyro-bias random walk integrated into an error
rotation, plus per-sample white noise), which is the level the rest of the
system consumes. Each sensor gets an independent error process split off
one seed, so a fixed seed always reproduces the same stream.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arm import ImuPair, JointConfig, joints_to_imus
from .geom import UnitQuaternion, Vector3, quat_from_rotvec

RATE_MIN = 10.0
RATE_MAX = 400.0

INTERPOLATIONS = ("hold", "linear", "sinusoid")


@dataclass(frozen=True, slots=True)
class DriftModel:
    """Orientation error process parameters (per sensor, per axis)."""

    bias_rw_sigma: float = 0.001  # rad/s per sqrt(s)
    noise_sigma: float = 0.002  # rad per sample
    initial_bias: tuple[float, float, float] = (0.005, 0.005, 0.005)  # rad/s
    seed: int = 0

    def __post_init__(self) -> None:
        if self.bias_rw_sigma < 0.0 or self.noise_sigma < 0.0:
            raise ValueError("drift sigmas must be non-negative")

    @classmethod
    def zero(cls, seed: int = 0) -> "DriftModel":
        return cls(bias_rw_sigma=0.0, noise_sigma=0.0, initial_bias=(0.0, 0.0, 0.0), seed=seed)

    @property
    def is_zero(self) -> bool:
        return (
            self.bias_rw_sigma == 0.0
            and self.noise_sigma == 0.0
            and all(b == 0.0 for b in self.initial_bias)
        )


@dataclass(frozen=True, slots=True)
class Segment:
    duration: float
    target: JointConfig
    interpolation: str = "linear"

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("segment duration must be positive")
        if self.interpolation not in INTERPOLATIONS:
            raise ValueError(f"unknown interpolation {self.interpolation!r}")


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Piecewise joint-space script; starts from the zero configuration."""

    segments: tuple[Segment, ...]
    _ends: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("trajectory needs at least one segment")
        ends, acc = [], 0.0
        for seg in self.segments:
            acc += seg.duration
            ends.append(acc)
        object.__setattr__(self, "_ends", tuple(ends))

    @property
    def duration(self) -> float:
        return self._ends[-1]


def _lerp_config(a: JointConfig, b: JointConfig, u: float) -> JointConfig:
    return JointConfig(
        *(av + (bv - av) * u for av, bv in zip(a.as_tuple(), b.as_tuple()))
    )


def sample_trajectory(traj: Trajectory, t: float) -> JointConfig:
    """Joint configuration at time t.

    hold: constant at the segment target. linear/sinusoid: interpolate from
    the previous segment's target (zero configuration before the first
    segment), so those segments are continuous across boundaries.
    """
    if t < -1e-12 or t > traj.duration + 1e-9:
        raise ValueError(f"t={t} outside trajectory span [0, {traj.duration}]")
    t = min(max(t, 0.0), traj.duration)
    i = min(bisect.bisect_left(traj._ends, t), len(traj.segments) - 1)
    seg = traj.segments[i]
    if seg.interpolation == "hold":
        return seg.target
    prev = traj.segments[i - 1].target if i > 0 else JointConfig()
    start = traj._ends[i] - seg.duration
    u = min(max((t - start) / seg.duration, 0.0), 1.0)
    if seg.interpolation == "sinusoid":
        u = 0.5 * (1.0 - math.cos(math.pi * u))
    return _lerp_config(prev, seg.target, u)


def ground_truth_stream(traj: Trajectory, rate: float) -> list[ImuPair]:
    """Uncorrupted sensor stream sampled on the uniform grid k/rate."""
    if not RATE_MIN <= rate <= RATE_MAX:
        raise ValueError(f"rate {rate} Hz outside [{RATE_MIN}, {RATE_MAX}]")
    n = int(math.floor(traj.duration * rate + 1e-9)) + 1
    return [
        joints_to_imus(sample_trajectory(traj, k / rate), t=k / rate) for k in range(n)
    ]


def _error_rotvecs(
    n: int, dt: float, drift: DriftModel, rng: np.random.Generator
) -> np.ndarray:
    # bias_k random-walks between samples; the accumulated rotation vector
    # theta_k integrates the bias seen before sample k; white noise on top.
    noise = (
        rng.normal(0.0, drift.noise_sigma, (n, 3))
        if drift.noise_sigma > 0.0
        else np.zeros((n, 3))
    )
    steps = (
        rng.normal(0.0, drift.bias_rw_sigma * math.sqrt(dt), (n, 3))
        if drift.bias_rw_sigma > 0.0
        else np.zeros((n, 3))
    )
    b0 = np.asarray(drift.initial_bias, dtype=float)
    bias = b0 + np.vstack([np.zeros(3), np.cumsum(steps[:-1], axis=0)])
    theta = np.vstack([np.zeros(3), np.cumsum(bias[:-1] * dt, axis=0)])
    return theta + noise


def stream(traj: Trajectory, drift: DriftModel, rate: float = 100.0) -> list[ImuPair]:
    """Corrupted sensor stream: r_k = error_k * r_true_k per sensor.

    With an all-zero drift model the ground truth is returned bit-exactly.
    """
    truth = ground_truth_stream(traj, rate)
    if drift.is_zero:
        return truth
    dt = 1.0 / rate
    child1, child2 = np.random.SeedSequence(drift.seed).spawn(2)
    errs1 = _error_rotvecs(len(truth), dt, drift, np.random.default_rng(child1))
    errs2 = _error_rotvecs(len(truth), dt, drift, np.random.default_rng(child2))
    out = []
    for pair, e1, e2 in zip(truth, errs1, errs2):
        out.append(
            ImuPair(
                t=pair.t,
                r1=quat_from_rotvec(Vector3(*e1)) * pair.r1,
                r2=quat_from_rotvec(Vector3(*e2)) * pair.r2,
            )
        )
    return out


def drift_angle(
    corrupted: Sequence[UnitQuaternion], truth: Sequence[UnitQuaternion]
) -> list[float]:
    """Per-sample geodesic angle between corrupted and true orientation."""
    if len(corrupted) != len(truth):
        raise ValueError(
            f"length mismatch: {len(corrupted)} corrupted vs {len(truth)} true"
        )
    return [c.angle_to(t) for c, t in zip(corrupted, truth)]


# ----------------------------------------------------------------------
# File formats.
# ----------------------------------------------------------------------

def parse_trajectory(text: str) -> Trajectory:
    """Lines of: duration q1 q2 q3 q4 q5 interpolation (targets in degrees)."""
    segments = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        if len(fields) != 7:
            raise ValueError(
                f"trajectory line {lineno}: expected 7 fields, got {len(fields)}"
            )
        try:
            duration = float(fields[0])
            target = JointConfig(*(math.radians(float(f)) for f in fields[1:6]))
        except ValueError as exc:
            raise ValueError(f"trajectory line {lineno}: {exc}") from exc
        segments.append(Segment(duration, target, fields[6]))
    return Trajectory(segments=tuple(segments))


def format_trajectory(traj: Trajectory) -> str:
    lines = ["# duration q1 q2 q3 q4 q5 interpolation (deg)"]
    for seg in traj.segments:
        angles = " ".join(repr(math.degrees(q)) for q in seg.target.as_tuple())
        lines.append(f"{seg.duration!r} {angles} {seg.interpolation}")
    return "\n".join(lines) + "\n"


def imu_record(pair: ImuPair) -> dict:
    """JSON record shape shared with the session archive."""
    return {
        "kind": "imu",
        "t": pair.t,
        "r1": list(pair.r1.as_tuple()),
        "r2": list(pair.r2.as_tuple()),
    }


def imu_from_record(rec: dict) -> ImuPair:
    return ImuPair(
        t=float(rec["t"]),
        r1=UnitQuaternion.from_seq(rec["r1"]),
        r2=UnitQuaternion.from_seq(rec["r2"]),
    )


def dump_stream(pairs: Sequence[ImuPair]) -> str:
    return "\n".join(json.dumps(imu_record(p)) for p in pairs) + "\n"


def parse_stream(text: str) -> list[ImuPair]:
    out = []
    for line in text.splitlines():
        if line.strip():
            out.append(imu_from_record(json.loads(line)))
    return out
