"""Simplified ball-joint arm: 3-dof shoulder, 2-dof elbow, rigid links.

The shoulder sits at the world origin; at the zero configuration the arm
extends along +x (y left, z up). Two body-mounted sensors report the world
orientations of the upper arm (r1) and forearm (r2); all kinematics here
consume those orientations, never joint angles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geom import RigidTransform, UnitQuaternion, Vector3, rot_x, rot_y, rot_z

_X = Vector3(1.0, 0.0, 0.0)

Q4_MAX = math.radians(150.0)


@dataclass(frozen=True, slots=True)
class ArmModel:
    """Link lengths in meters: upper arm, forearm, hand (wrist to fingertip)."""

    l_u: float = 0.30
    l_f: float = 0.25
    l_h: float = 0.20

    def __post_init__(self) -> None:
        for name, value in (("l_u", self.l_u), ("l_f", self.l_f), ("l_h", self.l_h)):
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name}={value!r} outside (0, 1) m human-scale range")


@dataclass(frozen=True, slots=True)
class JointConfig:
    """Joint angles in radians.

    q1 shoulder abduction/adduction, q2 shoulder flexion/extension,
    q3 shoulder medial/lateral rotation, q4 elbow flexion/extension,
    q5 forearm pronation/supination.
    """

    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0
    q4: float = 0.0
    q5: float = 0.0

    def __post_init__(self) -> None:
        limit = math.pi + 1e-12
        for name in ("q1", "q2", "q3", "q5"):
            v = getattr(self, name)
            if not -limit <= v <= limit:
                raise ValueError(f"{name}={v!r} outside [-180, 180] deg")
        if not -1e-12 <= self.q4 <= Q4_MAX + 1e-12:
            raise ValueError(f"q4={self.q4!r} outside [0, 150] deg elbow range")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.q1, self.q2, self.q3, self.q4, self.q5)


@dataclass(frozen=True, slots=True)
class ImuPair:
    """One time-stamped pair of fused sensor orientations (world frame)."""

    t: float
    r1: UnitQuaternion
    r2: UnitQuaternion


def joints_to_imus(j: JointConfig, t: float = 0.0) -> ImuPair:
    """Ground-truth sensor orientations for a joint configuration.

    Shoulder rotation rotZ(q1)*rotY(q2)*rotX(q3); elbow rotZ(q4)*rotX(q5)
    relative to the upper arm, flexion about +z. The sensors are assumed
    perfectly aligned with their segments.
    """
    r1 = rot_z(j.q1) * rot_y(j.q2) * rot_x(j.q3)
    r2 = r1 * (rot_z(j.q4) * rot_x(j.q5))
    return ImuPair(t=t, r1=r1, r2=r2)


def wrist_pose(arm: ArmModel, imus: ImuPair) -> RigidTransform:
    """Wrist pose w.r.t. the world frame.

    Chain product of the shoulder, elbow and wrist frames; collapses to
    translation r1*(l_u,0,0) + r2*(l_f,0,0) with rotation r2 because the
    wrist frame carries an identity rotation.
    """
    p = imus.r1.rotate(_X * arm.l_u) + imus.r2.rotate(_X * arm.l_f)
    return RigidTransform(imus.r2, p)


def fingertip_position(arm: ArmModel, imus: ImuPair) -> Vector3:
    """Extended-index fingertip: wrist plus the hand link along the forearm."""
    return wrist_pose(arm, imus).translation + imus.r2.rotate(_X * arm.l_h)


def arm_skeleton(
    arm: ArmModel, imus: ImuPair
) -> tuple[Vector3, Vector3, Vector3, Vector3]:
    """Shoulder, elbow, wrist and fingertip points for the skeleton view."""
    shoulder = Vector3()
    elbow = imus.r1.rotate(_X * arm.l_u)
    wrist = elbow + imus.r2.rotate(_X * arm.l_f)
    fingertip = wrist + imus.r2.rotate(_X * arm.l_h)
    return shoulder, elbow, wrist, fingertip
