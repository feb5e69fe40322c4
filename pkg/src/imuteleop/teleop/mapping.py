"""Input-to-ring pose mapping with workspace scaling and a clutch.

output = rebase * offset * scaled(input), where scaling applies to the
translation only (rotation passes through). Engaging the clutch freezes
the ring; releasing rebases the mapping so the frozen pose maps exactly
onto the current input, so the ring never jumps at release.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from ..geom import RigidTransform, compose

SCALE_MIN = 0.1
SCALE_MAX = 10.0


@dataclass(frozen=True, slots=True)
class Mapping:
    scale: float = 1.0
    offset: RigidTransform = RigidTransform()
    rebase: RigidTransform = RigidTransform()
    clutch_engaged: bool = False
    frozen_pose: RigidTransform | None = None

    def __post_init__(self) -> None:
        if not SCALE_MIN <= self.scale <= SCALE_MAX:
            raise ValueError(f"scale {self.scale} outside [{SCALE_MIN}, {SCALE_MAX}]")
        if self.clutch_engaged and self.frozen_pose is None:
            raise ValueError("engaged clutch requires a frozen pose")


def _scaled(m: Mapping, input_pose: RigidTransform) -> RigidTransform:
    return RigidTransform(input_pose.rotation, input_pose.translation * m.scale)


def apply_mapping(m: Mapping, input_pose: RigidTransform) -> RigidTransform:
    if m.clutch_engaged:
        return m.frozen_pose
    return compose(m.rebase, compose(m.offset, _scaled(m, input_pose)))


def engage_clutch(m: Mapping, input_pose: RigidTransform) -> Mapping:
    """Freeze the ring at its current mapped pose. Idempotent."""
    if m.clutch_engaged:
        return m
    return replace(m, clutch_engaged=True, frozen_pose=apply_mapping(m, input_pose))


def release_clutch(m: Mapping, input_pose: RigidTransform) -> Mapping:
    """Resume motion from the frozen pose: rebase so that the current
    input maps onto it exactly. Releasing without engaging is a no-op."""
    if not m.clutch_engaged:
        return m
    rebase = compose(
        m.frozen_pose, compose(m.offset, _scaled(m, input_pose)).inverse()
    )
    return replace(m, clutch_engaged=False, rebase=rebase, frozen_pose=None)
