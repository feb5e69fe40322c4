"""Steady-hand ring-on-wire task: geometry, accuracy metrics, trials.

The wire centerline is a G1-continuous chain of line segments and circular
arcs. Position accuracy is the distance from the ring center to the
closest centerline point; orientation accuracy is the angle between the
ring axis and the wire tangent there. A trial records both per sample and
flags collisions against the ring-clearance threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .geom import Vector3

CHAIN_TOL = 1e-9

DEFAULT_TUBE_RADIUS = 0.0125  # wire diameter 25 mm
DEFAULT_INNER_RADIUS = 0.030  # ring inner diameter 60 mm
DEFAULT_OUTER_RADIUS = 0.050  # ring outer diameter 100 mm


def _renorm(v: Vector3) -> Vector3:
    # No-op for already-unit vectors so persisted geometry reloads bit-exactly.
    n2 = v.dot(v)
    if abs(n2 - 1.0) <= 1e-12:
        return v
    return v.normalized()


@dataclass(frozen=True, slots=True)
class LineSegment:
    start: Vector3
    end: Vector3

    def __post_init__(self) -> None:
        if self.start.distance_to(self.end) <= 1e-12:
            raise ValueError("degenerate line segment")

    @property
    def length(self) -> float:
        return self.start.distance_to(self.end)

    def _dir(self) -> Vector3:
        return (self.end - self.start).normalized()

    def start_tangent(self) -> Vector3:
        return self._dir()

    def end_tangent(self) -> Vector3:
        return self._dir()

    def point_at(self, s: float) -> Vector3:
        return self.start + self._dir() * s

    def tangent_at(self, s: float) -> Vector3:
        return self._dir()

    def closest(self, p: Vector3) -> tuple[float, Vector3, Vector3, float]:
        d = self._dir()
        s = min(max((p - self.start).dot(d), 0.0), self.length)
        c = self.start + d * s
        return p.distance_to(c), c, d, s


@dataclass(frozen=True, slots=True)
class ArcSegment:
    """Circular arc, counterclockwise about `axis` from start to end."""

    start: Vector3
    end: Vector3
    center: Vector3
    axis: Vector3

    def __post_init__(self) -> None:
        object.__setattr__(self, "axis", _renorm(self.axis))
        r0 = self.start.distance_to(self.center)
        r1 = self.end.distance_to(self.center)
        if r0 <= 1e-9:
            raise ValueError("arc start coincides with center")
        if abs(r0 - r1) > 1e-9:
            raise ValueError(f"arc endpoints at different radii: {r0} vs {r1}")
        u = (self.start - self.center) * (1.0 / r0)
        if abs(self.axis.dot(u)) > 1e-9:
            raise ValueError("arc axis not perpendicular to the radial direction")
        if self.sweep <= 1e-12:
            raise ValueError("arc sweep must be positive")

    @property
    def radius(self) -> float:
        return self.start.distance_to(self.center)

    def _basis(self) -> tuple[Vector3, Vector3]:
        u = (self.start - self.center) * (1.0 / self.radius)
        return u, self.axis.cross(u)

    @property
    def sweep(self) -> float:
        u, w = self._basis()
        e = (self.end - self.center) * (1.0 / self.radius)
        phi = math.atan2(e.dot(w), e.dot(u))
        if phi <= 1e-12:
            phi += 2.0 * math.pi
        return phi

    @property
    def length(self) -> float:
        return self.radius * self.sweep

    def _point_at_angle(self, phi: float) -> Vector3:
        u, w = self._basis()
        return self.center + (u * math.cos(phi) + w * math.sin(phi)) * self.radius

    def _tangent_at_angle(self, phi: float) -> Vector3:
        u, w = self._basis()
        return w * math.cos(phi) - u * math.sin(phi)

    def start_tangent(self) -> Vector3:
        return self._tangent_at_angle(0.0)

    def end_tangent(self) -> Vector3:
        return self._tangent_at_angle(self.sweep)

    def point_at(self, s: float) -> Vector3:
        return self._point_at_angle(s / self.radius)

    def tangent_at(self, s: float) -> Vector3:
        return self._tangent_at_angle(s / self.radius)

    def closest(self, p: Vector3) -> tuple[float, Vector3, Vector3, float]:
        u, w = self._basis()
        q = p - self.center
        a, b = q.dot(u), q.dot(w)
        sweep = self.sweep
        candidates = [0.0, sweep]
        if a * a + b * b > 1e-24:
            phi = math.atan2(b, a)
            if phi < 0.0:
                phi += 2.0 * math.pi
            if phi <= sweep:
                candidates.append(phi)
        best = None
        for phi in candidates:
            c = self._point_at_angle(phi)
            d = p.distance_to(c)
            if best is None or d < best[0] - 1e-15:
                best = (d, c, self._tangent_at_angle(phi), phi * self.radius)
        return best


WireSegment = LineSegment | ArcSegment


@dataclass(frozen=True, slots=True)
class Wire:
    """Centerline chain plus the tube radius of the physical wire."""

    segments: tuple[WireSegment, ...]
    tube_radius: float = DEFAULT_TUBE_RADIUS
    name: str = "wire"

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("wire needs at least one segment")
        if self.tube_radius <= 0.0:
            raise ValueError("tube radius must be positive")
        for i, (a, b) in enumerate(zip(self.segments, self.segments[1:])):
            if a.end.distance_to(b.start) > CHAIN_TOL:
                raise ValueError(f"segments {i} and {i + 1} are not connected")
            if a.end_tangent().distance_to(b.start_tangent()) > CHAIN_TOL:
                raise ValueError(f"tangent break between segments {i} and {i + 1}")
        if self.length <= 0.0:
            raise ValueError("wire must have positive arclength")

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def point_at(self, s: float) -> Vector3:
        seg, local = self._locate(s)
        return seg.point_at(local)

    def tangent_at(self, s: float) -> Vector3:
        seg, local = self._locate(s)
        return seg.tangent_at(local)

    def _locate(self, s: float) -> tuple[WireSegment, float]:
        if s < -1e-9 or s > self.length + 1e-9:
            raise ValueError(f"arclength {s} outside [0, {self.length}]")
        s = min(max(s, 0.0), self.length)
        offset = 0.0
        for seg in self.segments:
            if s <= offset + seg.length or seg is self.segments[-1]:
                return seg, min(max(s - offset, 0.0), seg.length)
            offset += seg.length
        raise AssertionError("unreachable")

    def polyline(self, n: int = 200) -> list[Vector3]:
        """Evenly spaced centerline samples, endpoints included."""
        return [self.point_at(self.length * k / (n - 1)) for k in range(n)]


def closest_point(wire: Wire, p: Vector3) -> tuple[Vector3, Vector3, float]:
    """Closest centerline point to p: (c_wire, unit tangent, arclength)."""
    best = None
    offset = 0.0
    for seg in wire.segments:
        d, c, tangent, local_s = seg.closest(p)
        if best is None or d < best[0] - 1e-15:
            best = (d, c, tangent, offset + local_s)
        offset += seg.length
    _, c, tangent, s = best
    return c, tangent, s


@dataclass(frozen=True, slots=True)
class Ring:
    """The operator-held ring: center, symmetry axis, radii in meters."""

    center: Vector3 = Vector3()
    axis: Vector3 = Vector3(1.0, 0.0, 0.0)
    inner_radius: float = DEFAULT_INNER_RADIUS
    outer_radius: float = DEFAULT_OUTER_RADIUS

    def __post_init__(self) -> None:
        if not 0.0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")
        object.__setattr__(self, "axis", _renorm(self.axis))


def make_straight_wire(
    length: float = 0.4, tube_radius: float = DEFAULT_TUBE_RADIUS
) -> Wire:
    """Horizontal straight wire along x, centered at the task origin."""
    if length <= 0.0:
        raise ValueError("wire length must be positive")
    half = 0.5 * length
    seg = LineSegment(Vector3(-half, 0.0, 0.0), Vector3(half, 0.0, 0.0))
    return Wire(segments=(seg,), tube_radius=tube_radius, name=f"straight-{length:g}")


def make_s_wire(
    arc_radius: float = 0.15,
    arc_angle: float = 2.0 * math.pi / 3.0,
    tube_radius: float = DEFAULT_TUBE_RADIUS,
    ring_clearance: float = DEFAULT_INNER_RADIUS - DEFAULT_TUBE_RADIUS,
) -> Wire:
    """Two mirrored arcs joined G1-continuously in the vertical x-z plane.

    Default dimensions are a stand-in (two 150 mm, 120 deg arcs); the
    radius must exceed the ring's inner clearance for the task to be
    feasible at all.
    """
    if arc_radius <= ring_clearance:
        raise ValueError(
            f"arc radius {arc_radius} too tight for ring clearance {ring_clearance}"
        )
    if not 0.0 < arc_angle < math.pi:
        raise ValueError("arc angle must be in (0, pi)")
    r, phi = arc_radius, arc_angle
    sin, cos = math.sin(phi), math.cos(phi)
    p0 = Vector3(0.0, 0.0, 0.0)
    p1 = Vector3(r * sin, 0.0, r * (1.0 - cos))
    p2 = Vector3(2.0 * r * sin, 0.0, 2.0 * r * (1.0 - cos))
    arc1 = ArcSegment(start=p0, end=p1, center=Vector3(0.0, 0.0, r), axis=Vector3(0.0, -1.0, 0.0))
    arc2 = ArcSegment(
        start=p1,
        end=p2,
        center=Vector3(2.0 * r * sin, 0.0, r - 2.0 * r * cos),
        axis=Vector3(0.0, 1.0, 0.0),
    )
    # Center the chord midpoint on the task origin.
    shift = p2 * -0.5
    arc1 = ArcSegment(arc1.start + shift, arc1.end + shift, arc1.center + shift, arc1.axis)
    arc2 = ArcSegment(arc2.start + shift, arc2.end + shift, arc2.center + shift, arc2.axis)
    return Wire(
        segments=(arc1, arc2),
        tube_radius=tube_radius,
        name=f"s-{arc_radius:g}-{math.degrees(arc_angle):g}",
    )


# ----------------------------------------------------------------------
# Accuracy metrics.
# ----------------------------------------------------------------------

def position_error(wire: Wire, ring: Ring) -> float:
    c_wire, _, _ = closest_point(wire, ring.center)
    return ring.center.distance_to(c_wire)


def orientation_error(wire: Wire, ring: Ring) -> float:
    """Angle between ring axis and wire tangent, degrees, folded to [0, 90].

    A ring has no front or back, so an anti-parallel axis is the same
    physical alignment; folding via |dot| avoids double-counting.
    """
    _, v_wire, _ = closest_point(wire, ring.center)
    d = abs(v_wire.dot(ring.axis))
    return math.degrees(math.acos(min(1.0, d)))


def collision_threshold(wire: Wire, ring: Ring) -> float:
    """Centerline clearance before ring and wire touch."""
    return ring.inner_radius - wire.tube_radius


def collision(wire: Wire, ring: Ring) -> bool:
    return position_error(wire, ring) > collision_threshold(wire, ring)


# ----------------------------------------------------------------------
# Trial lifecycle.
# ----------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TrialConfig:
    start_margin: float = 0.010  # arclength from the wire start, meters
    end_margin: float = 0.010

    def __post_init__(self) -> None:
        if self.start_margin < 0.0 or self.end_margin < 0.0:
            raise ValueError("margins must be non-negative")


@dataclass(frozen=True, slots=True)
class TrialSample:
    t: float
    ring: Ring
    c_wire: Vector3
    v_wire: Vector3
    pos_err: float
    ori_err_deg: float
    collision: bool
    s: float


@dataclass(frozen=True, slots=True)
class TrialRecord:
    wire_id: str
    samples: tuple[TrialSample, ...]
    completed: bool

    def __post_init__(self) -> None:
        for a, b in zip(self.samples, self.samples[1:]):
            if b.t <= a.t:
                raise ValueError("trial sample timestamps must strictly increase")
        for s in self.samples:
            if s.pos_err < 0.0 or s.ori_err_deg < 0.0:
                raise ValueError("errors must be non-negative")


@dataclass(frozen=True, slots=True)
class TrialSummary:
    completion_time_s: float
    mean_position_error_mm: float
    mean_orientation_error_deg: float
    non_collision_pct: float
    completed: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.non_collision_pct <= 100.0:
            raise ValueError("non-collision percentage outside [0, 100]")


class TrialRunner:
    """Incremental trial: waits for the start zone, records until the end.

    Recording begins when the ring first comes within `start_margin` of the
    wire start (by arclength of its closest point) and stops, completed,
    once it reaches `end_margin` from the far end. Feeding a stream that
    ends early yields a partial, uncompleted record.
    """

    def __init__(self, wire: Wire, config: TrialConfig | None = None) -> None:
        self.wire = wire
        self.config = config or TrialConfig()
        self.started = False
        self.completed = False
        self._samples: list[TrialSample] = []
        self._last_t: float | None = None

    def feed(self, t: float, ring: Ring) -> TrialSample | None:
        if self._last_t is not None and t <= self._last_t:
            raise ValueError(f"non-increasing timestamp {t} after {self._last_t}")
        self._last_t = t
        if self.completed:
            return None
        c_wire, v_wire, s = closest_point(self.wire, ring.center)
        if not self.started:
            if s < self.config.start_margin:
                self.started = True
            else:
                return None
        pos = ring.center.distance_to(c_wire)
        sample = TrialSample(
            t=t,
            ring=ring,
            c_wire=c_wire,
            v_wire=v_wire,
            pos_err=pos,
            ori_err_deg=math.degrees(math.acos(min(1.0, abs(v_wire.dot(ring.axis))))),
            collision=pos > collision_threshold(self.wire, ring),
            s=s,
        )
        self._samples.append(sample)
        if s >= self.wire.length - self.config.end_margin:
            self.completed = True
        return sample

    def record(self) -> TrialRecord:
        return TrialRecord(
            wire_id=self.wire.name,
            samples=tuple(self._samples),
            completed=self.completed,
        )


def run_trial(
    wire: Wire,
    ring_pose_stream: Iterable[tuple[float, Ring]],
    config: TrialConfig | None = None,
) -> TrialRecord:
    """Batch trial over a time-stamped ring pose stream."""
    runner = TrialRunner(wire, config)
    for t, ring in ring_pose_stream:
        runner.feed(t, ring)
        if runner.completed:
            break
    return runner.record()


def summarize(rec: TrialRecord) -> TrialSummary:
    if not rec.samples:
        raise ValueError("cannot summarize an empty trial record")
    n = len(rec.samples)
    clean = sum(1 for s in rec.samples if not s.collision)
    return TrialSummary(
        completion_time_s=rec.samples[-1].t - rec.samples[0].t,
        mean_position_error_mm=1000.0 * sum(s.pos_err for s in rec.samples) / n,
        mean_orientation_error_deg=sum(s.ori_err_deg for s in rec.samples) / n,
        non_collision_pct=100.0 * clean / n,
        completed=rec.completed,
    )


def autopilot_ring_stream(
    wire: Wire,
    duration: float = 10.0,
    rate: float = 50.0,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    outer_radius: float = DEFAULT_OUTER_RADIUS,
) -> list[tuple[float, Ring]]:
    """Scripted perfect traversal: ring slides along the centerline."""
    if duration <= 0.0 or rate <= 0.0:
        raise ValueError("duration and rate must be positive")
    n = int(math.floor(duration * rate)) + 1
    out = []
    for k in range(n):
        t = k / rate
        s = wire.length * (t / duration)
        out.append(
            (
                t,
                Ring(
                    center=wire.point_at(s),
                    axis=wire.tangent_at(s),
                    inner_radius=inner_radius,
                    outer_radius=outer_radius,
                ),
            )
        )
    return out


# ----------------------------------------------------------------------
# Wire definition files: keyword lines, '#' comments, meters.
# ----------------------------------------------------------------------

def parse_wire(text: str) -> Wire:
    """Keyword format: name/tube_radius headers, then line/arc segments."""
    name = "wire"
    tube = DEFAULT_TUBE_RADIUS
    segments: list[WireSegment] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        kind, args = fields[0].lower(), fields[1:]
        try:
            if kind == "name":
                name = args[0]
            elif kind == "tube_radius":
                tube = float(args[0])
            elif kind == "line":
                if len(args) != 6:
                    raise ValueError(f"line segment needs 6 numbers, got {len(args)}")
                v = [float(a) for a in args]
                segments.append(LineSegment(Vector3(*v[0:3]), Vector3(*v[3:6])))
            elif kind == "arc":
                if len(args) != 12:
                    raise ValueError(f"arc segment needs 12 numbers, got {len(args)}")
                v = [float(a) for a in args]
                segments.append(
                    ArcSegment(
                        Vector3(*v[0:3]), Vector3(*v[3:6]), Vector3(*v[6:9]), Vector3(*v[9:12])
                    )
                )
            else:
                raise ValueError(f"unknown keyword {kind!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"wire line {lineno}: {exc}") from exc
    return Wire(segments=tuple(segments), tube_radius=tube, name=name)


def format_wire(wire: Wire) -> str:
    lines = [f"name {wire.name}", f"tube_radius {wire.tube_radius!r}"]
    for seg in wire.segments:
        if isinstance(seg, LineSegment):
            coords = (*seg.start.as_tuple(), *seg.end.as_tuple())
            lines.append("line " + " ".join(repr(c) for c in coords))
        else:
            coords = (
                *seg.start.as_tuple(),
                *seg.end.as_tuple(),
                *seg.center.as_tuple(),
                *seg.axis.as_tuple(),
            )
            lines.append("arc " + " ".join(repr(c) for c in coords))
    return "\n".join(lines) + "\n"
