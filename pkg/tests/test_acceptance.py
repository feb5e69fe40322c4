"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line and holding to its runtime budget."""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from imuteleop.arm import ArmModel, ImuPair, fingertip_position, wrist_pose
from imuteleop.calib import (
    calibrate,
    default_grid,
    monte_carlo_study,
    synthesize_samples,
)
from imuteleop.experiments import (
    SimulationSetup,
    drift_tolerance_experiment,
    run_simulation,
)
from imuteleop.geom import RigidTransform, UnitQuaternion, Vector3
from imuteleop.imusim import DriftModel
from imuteleop.session import (
    build_archive,
    dump_archive,
    parse_archive,
    replay_archive,
    simulation_meta,
)
from imuteleop.session.report import make_table, render_table
from imuteleop.task import (
    Ring,
    autopilot_ring_stream,
    closest_point,
    collision,
    collision_threshold,
    make_s_wire,
    make_straight_wire,
    position_error,
    run_trial,
    summarize,
)
from imuteleop.teleop import (
    Mapping,
    PoseDatagram,
    apply_mapping,
    decode_datagram,
    encode_datagram,
    engage_clutch,
    release_clutch,
)

from .oracles import brute_force_distances, dense_centerline, frame, quat_to_mat, random_quat


@contextmanager
def criterion(name: str, budget_s: float):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"FAIL: {name}")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"{name}: {elapsed:.2f}s exceeds {budget_s}s budget"
    print(f"PASS: {name} ({elapsed:.2f}s)")


def test_collision_threshold_derivation():
    with criterion("collision threshold from ring ID 60 mm and wire diameter 25 mm", 1.0):
        wire = make_straight_wire(0.4)
        ring = Ring()
        thr = collision_threshold(wire, ring)
        assert thr == 0.060 / 2 - 0.025 / 2  # bit-exact derivation
        assert abs(thr - 0.0175) < 1e-12
        at = Ring(center=Vector3(0.0, thr, 0.0))
        assert position_error(wire, at) == thr and not collision(wire, at)
        assert collision(wire, Ring(center=Vector3(0.0, 0.0176, 0.0)))


def test_fk_oracle_equivalence():
    with criterion("forward kinematics vs frame-product oracle, 1000 sensor pairs", 1.0):
        arm = ArmModel(l_u=0.30, l_f=0.25, l_h=0.20)
        rng = np.random.default_rng(2024)
        total = arm.l_u + arm.l_f
        for _ in range(1000):
            r1 = UnitQuaternion(*random_quat(rng))
            r2 = UnitQuaternion(*random_quat(rng))
            imus = ImuPair(t=0.0, r1=r1, r2=r2)
            R1 = quat_to_mat(*r1.as_tuple())
            Re = R1.T @ quat_to_mat(*r2.as_tuple())
            T = (
                frame(R1, [0, 0, 0])
                @ frame(Re, [arm.l_u, 0, 0])
                @ frame(np.eye(3), [arm.l_f, 0, 0])
            )
            wp = wrist_pose(arm, imus)
            assert np.allclose(wp.translation.as_tuple(), T[:3, 3], atol=1e-12)
            Tf = T @ frame(np.eye(3), [arm.l_h, 0, 0])
            ft = fingertip_position(arm, imus)
            assert np.allclose(ft.as_tuple(), Tf[:3, 3], atol=1e-12)
            # triangle inequality
            assert wp.translation.norm() <= total + 1e-12
            # double cover
            neg = ImuPair(
                t=0.0,
                r1=UnitQuaternion(-r1.w, -r1.x, -r1.y, -r1.z),
                r2=UnitQuaternion(-r2.w, -r2.x, -r2.y, -r2.z),
            )
            assert fingertip_position(arm, neg).distance_to(ft) < 1e-12


def test_calibration_exact_recovery():
    with criterion("calibration recovers (0.28, 0.24) from noiseless touches", 1.0):
        truth = (0.28, 0.24)
        grid = default_grid()
        samples = synthesize_samples(ArmModel(truth[0], truth[1], 0.2), grid)
        assert len(samples) == 4
        result = calibrate(samples, grid, truth=truth)
        assert abs(result.l_u_est - truth[0]) / truth[0] < 0.001
        assert abs(result.l_f_est - truth[1]) / truth[1] < 0.001
        assert result.residual < 1e-8
        assert result.converged


def test_calibration_noise_study():
    with criterion("calibration under 2 deg RMS noise stays same-order as physical trials", 10.0):
        study = monte_carlo_study(
            truth=(0.28, 0.24), noise_rms_rad=math.radians(2.0), trials=10, seed=2024
        )
        mean_u, mean_f = study.mean
        std_u, std_f = study.std
        assert 0.0 < mean_u < 25.0
        assert 0.0 < mean_f < 25.0
        assert std_u > 0.0 and std_f > 0.0


def test_closest_point_oracle():
    with criterion("closest-point queries vs 1e5-sample brute force, 0.1 mm", 5.0):
        rng = np.random.default_rng(77)
        for wire in (make_straight_wire(0.4), make_s_wire()):
            table = dense_centerline(wire, 100_000)
            queries, got = [], []
            for _ in range(500):
                s = float(rng.uniform(0.0, wire.length))
                p = wire.point_at(s) + Vector3(*rng.normal(0.0, 0.05, 3))
                c, _, _ = closest_point(wire, p)
                queries.append(p.as_tuple())
                got.append(p.distance_to(c))
            want = brute_force_distances(table, np.array(queries))
            for g, w in zip(got, want):
                assert abs(g - w) < 1e-4
                assert g <= w + 1e-12  # analytic never loses to sampling


def test_autopilot_trial():
    with criterion("autopilot traversal: 100% non-collision, sub-0.1mm/0.1deg", 2.0):
        wire = make_straight_wire(0.4)
        stream = autopilot_ring_stream(wire, duration=8.0, rate=50.0)
        record = run_trial(wire, stream)
        assert record.completed
        summary = summarize(record)
        assert summary.non_collision_pct == 100.0
        assert summary.mean_position_error_mm < 0.1
        assert summary.mean_orientation_error_deg < 0.1


def test_drift_tolerance():
    with criterion("drift grows open loop; visual feedback holds >=95% non-collision", 30.0):
        result = drift_tolerance_experiment(seeds=20, duration=60.0, gain=2.0)
        profile = result.open_loop_profile
        assert all(a < b for a, b in zip(profile, profile[1:])), profile
        assert result.mean_non_collision_pct >= 95.0


def test_protocol_round_trips():
    with criterion("datagram codec, clutch continuity, archive replay", 5.0):
        # 1e4 random datagrams, bit-exact both directions
        rng = np.random.default_rng(5150)
        for _ in range(10_000):
            q = rng.normal(size=4)
            q = q / np.linalg.norm(q)
            d = PoseDatagram(
                seq=int(rng.integers(0, 2**32)),
                t=float(rng.uniform(0.0, 1e4)),
                position=tuple(float(v) for v in rng.normal(0.0, 5.0, 3)),
                quaternion=tuple(float(v) for v in q),
            )
            buf = encode_datagram(d)
            assert decode_datagram(buf) == d
            assert encode_datagram(decode_datagram(buf)) == buf
        golden = bytes.fromhex(
            "54504f5301000000000000000000000000"
            + "00" * 24
            + "000000000000f03f"
            + "00" * 24
        )
        assert encode_datagram(
            PoseDatagram(seq=0, t=0.0, position=(0.0, 0.0, 0.0), quaternion=(1.0, 0.0, 0.0, 0.0))
        ) == golden

        # clutch release continuity over random drift sequences
        for seed in range(200):
            r = np.random.default_rng(seed)

            def rand_pose():
                v = r.normal(size=4)
                return RigidTransform(
                    UnitQuaternion(*(v / np.linalg.norm(v))), Vector3(*r.normal(0.0, 0.4, 3))
                )

            m = Mapping(scale=float(r.uniform(0.1, 10.0)))
            m = engage_clutch(m, rand_pose())
            frozen = m.frozen_pose
            for _ in range(5):
                drifted = rand_pose()
                assert apply_mapping(m, drifted) == frozen
            m = release_clutch(m, drifted)
            resumed = apply_mapping(m, drifted)
            assert resumed.translation.distance_to(frozen.translation) <= 1e-9

        # archive replay reproduces trial records bit-exactly
        for drift in (DriftModel.zero(), DriftModel(seed=9)):
            setup = SimulationSetup(
                wire=make_straight_wire(0.4), drift=drift, duration=6.0
            )
            run = run_simulation(setup)
            archive = build_archive(
                simulation_meta(setup),
                imu_stream=run.imu_stream,
                ticks=run.engine.ticks,
                trials=run.engine.trials,
            )
            loaded = parse_archive(dump_archive(archive))
            assert loaded == archive
            assert replay_archive(loaded) == archive.trials


def test_report_fidelity():
    with criterion("report renders per-trial + mean layout; (6.8, 6.6, 5.8) -> 6.4", 1.0):
        table = make_table(
            "Completion times for tasks, in seconds", [("MTM", (6.8, 6.6, 5.8))]
        )
        assert math.isclose(table.groups[0].mean, 6.4, abs_tol=1e-9)
        text = render_table(table)
        lines = text.splitlines()
        assert lines[1].split() == ["1", "2", "3", "Mean"]
        assert lines[2].split() == ["MTM", "6.8", "6.6", "5.8", "6.4"]
