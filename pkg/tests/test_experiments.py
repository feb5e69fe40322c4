import math

import numpy as np
import pytest

from imuteleop.arm import ArmModel, joints_to_imus, wrist_pose
from imuteleop.experiments import (
    DEFAULT_OFFSET,
    SimulationSetup,
    non_collision_fraction,
    reach_joints,
    run_simulation,
    simulated_stream,
    window_means,
    wire_follow_trajectory,
)
from imuteleop.geom import Vector3
from imuteleop.imusim import DriftModel, sample_trajectory
from imuteleop.task import closest_point, make_s_wire, make_straight_wire, summarize

ARM = ArmModel()


class TestReachJoints:
    def test_exact_on_random_targets(self):
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 200:
            p = Vector3(*rng.normal(0.0, 0.25, 3))
            if not 0.25 < p.norm() < 0.5:
                continue
            try:
                j = reach_joints(ARM, p)
            except ValueError:
                continue
            got = wrist_pose(ARM, joints_to_imus(j)).translation
            assert got.distance_to(p) < 1e-9
            checked += 1

    def test_elbow_within_range(self):
        j = reach_joints(ARM, Vector3(0.1, 0.35, 0.0))
        assert 0.0 <= j.q4 <= math.radians(150.0)

    def test_elbow_down_branch(self):
        j = reach_joints(ARM, Vector3(0.0, 0.35, 0.0))
        elbow = joints_to_imus(j).r1.rotate(Vector3(ARM.l_u, 0.0, 0.0))
        assert elbow.z <= 1e-12

    def test_out_of_reach_rejected(self):
        with pytest.raises(ValueError):
            reach_joints(ARM, Vector3(0.6, 0.0, 0.0))

    def test_too_close_rejected(self):
        with pytest.raises(ValueError):
            reach_joints(ARM, Vector3(0.05, 0.0, 0.0))


class TestWireFollow:
    @pytest.mark.parametrize("wire", [make_straight_wire(0.4), make_s_wire()], ids=["straight", "s"])
    def test_path_stays_on_centerline(self, wire):
        traj = wire_follow_trajectory(wire, ARM, duration=10.0)
        for t in np.linspace(0.0, 10.0, 101):
            j = sample_trajectory(traj, float(t))
            task_pos = wrist_pose(ARM, joints_to_imus(j)).translation + DEFAULT_OFFSET
            c, _, _ = closest_point(wire, task_pos)
            assert task_pos.distance_to(c) < 1e-3

    def test_starts_at_wire_start(self):
        wire = make_straight_wire(0.4)
        traj = wire_follow_trajectory(wire, ARM, duration=10.0)
        j = sample_trajectory(traj, 0.0)
        task_pos = wrist_pose(ARM, joints_to_imus(j)).translation + DEFAULT_OFFSET
        assert task_pos.distance_to(wire.point_at(0.0)) < 1e-9


class TestSimulation:
    def test_zero_drift_completes_cleanly(self):
        run = run_simulation(
            SimulationSetup(wire=make_straight_wire(0.4), drift=DriftModel.zero(), duration=8.0)
        )
        rec = run.engine.last_trial
        assert rec is not None and rec.completed
        summary = summarize(rec)
        assert summary.non_collision_pct == 100.0
        assert summary.mean_position_error_mm < 0.1

    def test_same_seed_reproducible(self):
        setup = SimulationSetup(wire=make_straight_wire(0.4), drift=DriftModel(seed=4), duration=6.0)
        a = run_simulation(setup)
        b = run_simulation(setup)
        assert a.engine.trials == b.engine.trials
        assert [s["ring"]["p"] for s in a.states] == [s["ring"]["p"] for s in b.states]

    def test_stream_reuse_matches_regeneration(self):
        setup = SimulationSetup(wire=make_straight_wire(0.4), drift=DriftModel(seed=4), duration=6.0)
        pairs = simulated_stream(setup)
        a = run_simulation(setup, pairs)
        b = run_simulation(setup)
        assert a.engine.trials == b.engine.trials

    def test_feedback_beats_open_loop(self):
        setup = SimulationSetup(
            wire=make_straight_wire(0.4),
            drift=DriftModel(seed=11),
            duration=20.0,
            start_trial=False,
        )
        pairs = simulated_stream(setup)
        open_run = run_simulation(setup, pairs)
        from dataclasses import replace

        fb_run = run_simulation(replace(setup, feedback_gain=2.0), pairs)
        assert non_collision_fraction(fb_run) >= non_collision_fraction(open_run)
        open_final = open_run.states[-1]["pos_err_mm"]
        fb_final = fb_run.states[-1]["pos_err_mm"]
        assert fb_final < open_final


class TestWindowMeans:
    def test_simple(self):
        assert window_means([1.0, 1.0, 2.0, 2.0], 2) == [1.0, 2.0]

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            window_means([1.0], 5)
