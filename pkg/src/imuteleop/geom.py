"""Quaternion and rigid-transform algebra.

Scalar-first convention everywhere, including wire formats: q = (w, x, y, z).
All types are frozen value objects and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Constructors renormalize only when the squared norm drifts beyond this,
# so pure sign flips (conjugate, handedness mirror) stay bit-exact.
_RENORM_SQ_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class Vector3:
    """3-vector in meters (or dimensionless for directions)."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite vector components: {self}")

    def __add__(self, other: "Vector3") -> "Vector3":
        return Vector3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vector3") -> "Vector3":
        return Vector3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vector3":
        return Vector3(-self.x, -self.y, -self.z)

    def __mul__(self, s: float) -> "Vector3":
        return Vector3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: "Vector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vector3") -> "Vector3":
        return Vector3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vector3":
        n = self.norm()
        if n <= 1e-12:
            raise ValueError("cannot normalize near-zero vector")
        return Vector3(self.x / n, self.y / n, self.z / n)

    def distance_to(self, other: "Vector3") -> float:
        return (self - other).norm()

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @classmethod
    def from_seq(cls, seq) -> "Vector3":
        x, y, z = seq
        return cls(float(x), float(y), float(z))


@dataclass(frozen=True, slots=True)
class UnitQuaternion:
    """Unit quaternion rotation, scalar first. Default is the identity.

    q and -q represent the same rotation; every consumer here is invariant
    under that sign flip.
    """

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self) -> None:
        n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(n2) or n2 <= 1e-24:
            raise ValueError(f"degenerate quaternion: {self}")
        if abs(n2 - 1.0) > _RENORM_SQ_TOL:
            n = math.sqrt(n2)
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    def __mul__(self, other: "UnitQuaternion") -> "UnitQuaternion":
        """Hamilton product: self applied after other."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return UnitQuaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    inverse = conjugate

    def rotate(self, v: Vector3) -> Vector3:
        """Apply the rotation to a vector (norm preserving)."""
        qv = Vector3(self.x, self.y, self.z)
        t = qv.cross(v) * 2.0
        return v + t * self.w + qv.cross(t)

    def angle_to(self, other: "UnitQuaternion") -> float:
        """Geodesic angle in radians, in [0, pi], sign-flip invariant."""
        r = self.conjugate() * other
        vec = math.sqrt(r.x * r.x + r.y * r.y + r.z * r.z)
        return 2.0 * math.atan2(vec, abs(r.w))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    @classmethod
    def from_seq(cls, seq) -> "UnitQuaternion":
        w, x, y, z = seq
        return cls(float(w), float(x), float(y), float(z))


@dataclass(frozen=True, slots=True)
class RigidTransform:
    """Rigid pose: rotation followed by translation (meters)."""

    rotation: UnitQuaternion = UnitQuaternion()
    translation: Vector3 = Vector3()

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_translation(cls, x: float, y: float, z: float) -> "RigidTransform":
        return cls(UnitQuaternion(), Vector3(x, y, z))

    def apply(self, v: Vector3) -> Vector3:
        return self.rotation.rotate(v) + self.translation

    def inverse(self) -> "RigidTransform":
        rinv = self.rotation.conjugate()
        return RigidTransform(rinv, -rinv.rotate(self.translation))


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Frame product a*b: apply b first, then a."""
    return RigidTransform(
        a.rotation * b.rotation,
        a.rotation.rotate(b.translation) + a.translation,
    )


def rotate_vector(q: UnitQuaternion, v: Vector3) -> Vector3:
    return q.rotate(v)


def quat_from_axis_angle(axis: Vector3, angle: float) -> UnitQuaternion:
    """Unit quaternion for a rotation of `angle` radians about `axis`."""
    n = axis.norm()
    if n <= 1e-12:
        raise ValueError("rotation axis must be non-zero")
    half = 0.5 * angle
    s = math.sin(half) / n
    return UnitQuaternion(math.cos(half), axis.x * s, axis.y * s, axis.z * s)


def quat_from_rotvec(v: Vector3) -> UnitQuaternion:
    """Rotation-vector (axis * angle) exponential."""
    angle = v.norm()
    if angle < 1e-12:
        # First-order expansion; renormalization is a no-op at this scale.
        return UnitQuaternion(1.0, 0.5 * v.x, 0.5 * v.y, 0.5 * v.z)
    return quat_from_axis_angle(v, angle)


def shortest_arc(a: Vector3, b: Vector3) -> UnitQuaternion:
    """Minimal rotation carrying direction a onto direction b."""
    ua = a.normalized()
    ub = b.normalized()
    d = ua.dot(ub)
    if d < -1.0 + 1e-12:
        # Antiparallel: half-turn about any perpendicular axis.
        axis = ua.cross(Vector3(0.0, 0.0, 1.0))
        if axis.norm() <= 1e-6:
            axis = ua.cross(Vector3(0.0, 1.0, 0.0))
        return quat_from_axis_angle(axis, math.pi)
    c = ua.cross(ub)
    return UnitQuaternion(1.0 + d, c.x, c.y, c.z)


def handedness_convert(
    p: Vector3, q: UnitQuaternion
) -> tuple[Vector3, UnitQuaternion]:
    """Mirror a pose across the z = 0 plane (right- to left-handed bridge).

    Conjugation of the rotation by M = diag(1, 1, -1) negates the quaternion
    x and y components. Involutive and bit-exact: applying twice returns the
    input unchanged.
    """
    return (
        Vector3(p.x, p.y, -p.z),
        UnitQuaternion(q.w, -q.x, -q.y, q.z),
    )


def rot_x(angle: float) -> UnitQuaternion:
    return quat_from_axis_angle(Vector3(1.0, 0.0, 0.0), angle)


def rot_y(angle: float) -> UnitQuaternion:
    return quat_from_axis_angle(Vector3(0.0, 1.0, 0.0), angle)


def rot_z(angle: float) -> UnitQuaternion:
    return quat_from_axis_angle(Vector3(0.0, 0.0, 1.0), angle)
