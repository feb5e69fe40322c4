import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imuteleop.arm import (
    ArmModel,
    ImuPair,
    JointConfig,
    arm_skeleton,
    fingertip_position,
    joints_to_imus,
    wrist_pose,
)
from imuteleop.geom import UnitQuaternion, Vector3, quat_from_axis_angle, rot_z

from .oracles import frame, quat_to_mat, random_quat, rodrigues

ARM = ArmModel(l_u=0.30, l_f=0.25, l_h=0.20)


def pair(r1, r2, t=0.0):
    return ImuPair(t=t, r1=r1, r2=r2)


def chain_fk_oracle(arm, r1, r2, include_hand=False):
    """Direct frame-product evaluation of the wrist/fingertip chain."""
    R1 = quat_to_mat(*r1.as_tuple())
    R2 = quat_to_mat(*r2.as_tuple())
    Re = R1.T @ R2
    T = frame(R1, [0, 0, 0]) @ frame(Re, [arm.l_u, 0, 0]) @ frame(np.eye(3), [arm.l_f, 0, 0])
    if include_hand:
        T = T @ frame(np.eye(3), [arm.l_h, 0, 0])
    return T


def joint_chain_oracle(arm, j):
    """Independent 5-joint serial chain built from Rodrigues matrices."""
    Rs = rodrigues([0, 0, 1], j.q1) @ rodrigues([0, 1, 0], j.q2) @ rodrigues([1, 0, 0], j.q3)
    Re = rodrigues([0, 0, 1], j.q4) @ rodrigues([1, 0, 0], j.q5)
    return frame(Rs, [0, 0, 0]) @ frame(Re, [arm.l_u, 0, 0]) @ frame(np.eye(3), [arm.l_f, 0, 0])


def joint_configs():
    ang = st.floats(-math.pi, math.pi, allow_nan=False)
    elbow = st.floats(0.0, math.radians(150.0), allow_nan=False)
    return st.tuples(ang, ang, ang, elbow, ang).map(lambda t: JointConfig(*t))


class TestValidation:
    def test_nonpositive_length_rejected(self):
        with pytest.raises(ValueError):
            ArmModel(l_u=0.0)

    def test_superhuman_length_rejected(self):
        with pytest.raises(ValueError):
            ArmModel(l_f=1.2)

    def test_elbow_range(self):
        with pytest.raises(ValueError):
            JointConfig(q4=-0.1)
        with pytest.raises(ValueError):
            JointConfig(q4=math.radians(151.0))

    def test_shoulder_range(self):
        with pytest.raises(ValueError):
            JointConfig(q1=4.0)


class TestJointsToImus:
    def test_zero_config_is_identity(self):
        imus = joints_to_imus(JointConfig())
        assert imus.r1.angle_to(UnitQuaternion()) == 0.0
        assert imus.r2.angle_to(UnitQuaternion()) == 0.0

    def test_pure_elbow_flexion(self):
        imus = joints_to_imus(JointConfig(q4=math.pi / 2))
        assert imus.r1.angle_to(UnitQuaternion()) == 0.0
        assert imus.r2.angle_to(rot_z(math.pi / 2)) < 1e-12

    def test_roundtrip_against_serial_chain(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            j = JointConfig(
                *(rng.uniform(-math.pi, math.pi, 3)),
                rng.uniform(0.0, math.radians(150.0)),
                rng.uniform(-math.pi, math.pi),
            )
            T = joint_chain_oracle(ARM, j)
            got = wrist_pose(ARM, joints_to_imus(j))
            assert np.allclose(got.translation.as_tuple(), T[:3, 3], atol=1e-9)
            assert np.allclose(quat_to_mat(*got.rotation.as_tuple()), T[:3, :3], atol=1e-9)


class TestWristPose:
    def test_extended_along_x(self):
        got = wrist_pose(ARM, pair(UnitQuaternion(), UnitQuaternion()))
        assert got.translation.distance_to(Vector3(0.55, 0.0, 0.0)) < 1e-15
        assert got.rotation.as_tuple() == (1.0, 0.0, 0.0, 0.0)

    def test_single_axis_elbow_bend(self):
        got = wrist_pose(ARM, pair(UnitQuaternion(), rot_z(math.pi / 2)))
        assert got.translation.distance_to(Vector3(0.30, 0.25, 0.0)) < 1e-12

    def test_matches_frame_product_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            T = chain_fk_oracle(ARM, r1, r2)
            got = wrist_pose(ARM, pair(r1, r2))
            assert np.allclose(got.translation.as_tuple(), T[:3, 3], atol=1e-12)
            assert np.allclose(quat_to_mat(*got.rotation.as_tuple()), T[:3, :3], atol=1e-12)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(6)
        for _ in range(300):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            norm = wrist_pose(ARM, pair(r1, r2)).translation.norm()
            assert norm <= ARM.l_u + ARM.l_f + 1e-12

    def test_triangle_equality_iff_straight(self):
        r1 = UnitQuaternion(*random_quat(np.random.default_rng(1)))
        norm = wrist_pose(ARM, pair(r1, r1)).translation.norm()
        assert abs(norm - (ARM.l_u + ARM.l_f)) < 1e-12


class TestFingertip:
    def test_extended(self):
        got = fingertip_position(ARM, pair(UnitQuaternion(), UnitQuaternion()))
        assert got.distance_to(Vector3(0.75, 0.0, 0.0)) < 1e-15

    def test_elbow_bend_carries_hand(self):
        got = fingertip_position(ARM, pair(UnitQuaternion(), rot_z(math.pi / 2)))
        assert got.distance_to(Vector3(0.30, 0.45, 0.0)) < 1e-12

    def test_matches_four_frame_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            T = chain_fk_oracle(ARM, r1, r2, include_hand=True)
            got = fingertip_position(ARM, pair(r1, r2))
            assert np.allclose(got.as_tuple(), T[:3, 3], atol=1e-12)


class TestSkeleton:
    def test_collinear_at_identity(self):
        s, e, w, f = arm_skeleton(ARM, pair(UnitQuaternion(), UnitQuaternion()))
        assert s == Vector3()
        for got, x in ((e, 0.30), (w, 0.55), (f, 0.75)):
            assert got.distance_to(Vector3(x, 0.0, 0.0)) < 1e-15

    def test_rigid_link_lengths(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            s, e, w, f = arm_skeleton(ARM, pair(r1, r2))
            assert abs(e.distance_to(s) - ARM.l_u) < 1e-12
            assert abs(w.distance_to(e) - ARM.l_f) < 1e-12
            assert abs(f.distance_to(w) - ARM.l_h) < 1e-12

    def test_consistent_with_wrist_and_fingertip(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            imus = pair(r1, r2)
            _, _, w, f = arm_skeleton(ARM, imus)
            assert w.distance_to(wrist_pose(ARM, imus).translation) == 0.0
            assert f.distance_to(fingertip_position(ARM, imus)) == 0.0


class TestProperties:
    @given(
        st.integers(0, 2**32 - 1),
        st.booleans(),
        st.booleans(),
    )
    def test_double_cover(self, seed, flip1, flip2):
        rng = np.random.default_rng(seed)
        r1 = UnitQuaternion(*random_quat(rng))
        r2 = UnitQuaternion(*random_quat(rng))
        n1 = UnitQuaternion(-r1.w, -r1.x, -r1.y, -r1.z) if flip1 else r1
        n2 = UnitQuaternion(-r2.w, -r2.x, -r2.y, -r2.z) if flip2 else r2
        a = fingertip_position(ARM, pair(r1, r2))
        b = fingertip_position(ARM, pair(n1, n2))
        assert a.distance_to(b) < 1e-12

    def test_continuity_bound(self):
        # A perturbation of either sensor by angle eps moves the fingertip
        # by at most (l_u + l_f + l_h) * eps.
        rng = np.random.default_rng(21)
        total = ARM.l_u + ARM.l_f + ARM.l_h
        eps = 1e-2
        for _ in range(100):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            axis = rng.normal(size=3)
            d = quat_from_axis_angle(Vector3(*axis), eps)
            base = fingertip_position(ARM, pair(r1, r2))
            moved1 = fingertip_position(ARM, pair(d * r1, r2))
            moved2 = fingertip_position(ARM, pair(r1, d * r2))
            assert base.distance_to(moved1) <= total * eps + 1e-12
            assert base.distance_to(moved2) <= total * eps + 1e-12
