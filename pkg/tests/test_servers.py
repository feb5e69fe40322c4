import json
import socket
import struct
import time

import pytest
from fastapi.testclient import TestClient

from imuteleop.geom import RigidTransform, UnitQuaternion, Vector3
from imuteleop.task import make_straight_wire
from imuteleop.teleop import Mapping, PoseDatagram, SessionConfig, SessionEngine, encode_datagram
from imuteleop.teleop.servers import SessionBridge, UdpPoseListener, build_app

WIRE = make_straight_wire(0.4)

STATE_KEYS = {"t", "ring", "arm", "pos_err_mm", "ori_err_deg", "collision", "trial", "stale"}


def make_bridge(source="ui"):
    engine = SessionEngine(SessionConfig(wire=WIRE, source=source))
    return SessionBridge(engine)


def wait_for(predicate, timeout=3.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        if predicate():
            return True
        time.sleep(0.01)
    return False


def dg(seq, x=0.0, y=0.0, z=0.0, t=None):
    return encode_datagram(
        PoseDatagram(seq=seq, t=seq * 0.01 if t is None else t, position=(x, y, z), quaternion=(1.0, 0.0, 0.0, 0.0))
    )


class TestUdpListener:
    @pytest.fixture
    def listener(self):
        bridge = make_bridge(source="datagram")
        lst = UdpPoseListener(bridge, host="127.0.0.1", port=0)
        lst.start()
        yield bridge, lst
        lst.stop()

    def send(self, lst, payload):
        tx = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        tx.sendto(payload, ("127.0.0.1", lst.port))
        tx.close()

    def test_pose_flows_to_engine(self, listener):
        bridge, lst = listener
        self.send(lst, dg(1, x=0.1))
        assert wait_for(lambda: lst.received == 1)
        state = bridge.tick_once()
        assert state["ring"]["p"][0] == 0.1

    def test_out_of_order_dropped(self, listener):
        bridge, lst = listener
        self.send(lst, dg(5, x=0.1))
        assert wait_for(lambda: lst.received == 1)
        self.send(lst, dg(7, x=0.2))  # gap is fine
        assert wait_for(lambda: lst.received == 2)
        self.send(lst, dg(6, x=0.9))  # stale: below max seq
        self.send(lst, dg(7, x=0.9))  # duplicate
        assert wait_for(lambda: lst.dropped == 2)
        state = bridge.tick_once()
        assert state["ring"]["p"][0] == 0.2

    def test_malformed_counted_and_skipped(self, listener):
        bridge, lst = listener
        self.send(lst, b"junk")
        self.send(lst, dg(1, x=0.3)[:60])
        bad_quat = dg(2)[:41] + struct.pack("<4d", 9.0, 0.0, 0.0, 0.0)
        self.send(lst, bad_quat)
        assert wait_for(lambda: lst.malformed == 3)
        self.send(lst, dg(3, x=0.3))
        assert wait_for(lambda: lst.received == 1)
        state = bridge.tick_once()
        assert state["ring"]["p"][0] == 0.3

    def test_handedness_flip(self):
        bridge = make_bridge(source="datagram")
        lst = UdpPoseListener(bridge, host="127.0.0.1", port=0, flip_handedness=True)
        lst.start()
        try:
            self.send(lst, dg(1, x=0.1, z=0.2))
            assert wait_for(lambda: lst.received == 1)
            state = bridge.tick_once()
            assert state["ring"]["p"] == [0.1, 0.0, -0.2]
        finally:
            lst.stop()


class TestWebSocketBridge:
    def test_scene_then_state(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            scene = ws.receive_json()
            assert scene["type"] == "scene"
            assert scene["wire"]["name"] == WIRE.name
            assert len(scene["wire"]["polyline"]) == 200
            assert abs(scene["threshold_mm"] - 17.5) < 1e-9
            bridge.tick_once(0.02)
            state = ws.receive_json()
            assert set(state.keys()) == STATE_KEYS
            assert state["trial"]["phase"] == "idle"

    def test_input_pose_moves_ring(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "input_pose", "p": [0.1, 0.0, 0.0], "q": [1, 0, 0, 0]}))
            assert wait_for(lambda: bridge.engine._pending is not None)
            bridge.tick_once()
            state = ws.receive_json()
            assert state["ring"]["p"][0] == 0.1

    def test_start_stop_controls_phase(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "start"}))
            assert wait_for(lambda: len(bridge.engine._commands) == 1)
            bridge.tick_once(0.02)
            assert ws.receive_json()["trial"]["phase"] == "running"
            ws.send_text(json.dumps({"type": "stop"}))
            assert wait_for(lambda: len(bridge.engine._commands) == 1)
            bridge.tick_once(0.04)
            assert ws.receive_json()["trial"]["phase"] == "done"

    def test_input_joints_reports_skeleton(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "input_joints", "q": [0, 0, 0, 1.2, 0]}))
            assert wait_for(lambda: bridge.engine._pending is not None)
            bridge.tick_once()
            state = ws.receive_json()
            assert state["arm"] is not None
            assert state["arm"]["shoulder"] == [0.0, 0.0, 0.0]

    def test_malformed_message_ignored(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "warp", "to": "narnia"}))
            ws.send_text(json.dumps({"type": "input_pose", "p": [0.05, 0, 0], "q": [1, 0, 0, 0]}))
            assert wait_for(lambda: bridge.engine._pending is not None)
            bridge.tick_once()
            state = ws.receive_json()
            assert state["ring"]["p"][0] == 0.05

    def test_healthz(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        res = client.get("/healthz")
        assert res.status_code == 200
        assert res.json()["ok"] is True

    def test_summary_broadcast_on_completion(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "start"}))
            wait_for(lambda: len(bridge.engine._commands) == 1)
            t = 0.0
            import numpy as np

            for x in np.linspace(-0.2, 0.2, 40):
                t += 0.02
                bridge.engine.submit_pose(t - 0.001, RigidTransform(
                    UnitQuaternion(), Vector3(float(x), 0.0, 0.0)
                ))
                bridge.tick_once(t)
            assert bridge.engine.last_trial is not None
            assert bridge.engine.last_trial.completed
            summary = None
            for _ in range(50):
                msg = ws.receive_json()
                if msg.get("type") == "summary":
                    summary = msg
                    break
            assert summary is not None
            from imuteleop.task import summarize

            want = summarize(bridge.engine.last_trial)
            assert summary["completed"] is True
            assert summary["non_collision_pct"] == want.non_collision_pct
            assert summary["completion_time_s"] == want.completion_time_s

    def test_clutch_over_ws(self):
        bridge = make_bridge()
        client = TestClient(build_app(bridge))
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "input_pose", "p": [0.1, 0, 0], "q": [1, 0, 0, 0]}))
            assert wait_for(lambda: bridge.engine._pending is not None)
            bridge.tick_once()
            ws.receive_json()
            ws.send_text(json.dumps({"type": "clutch", "engaged": True}))
            assert wait_for(lambda: len(bridge.engine._commands) == 1)
            bridge.tick_once()
            ws.receive_json()
            ws.send_text(json.dumps({"type": "input_pose", "p": [0.4, 0.2, 0], "q": [1, 0, 0, 0]}))
            assert wait_for(lambda: bridge.engine._pending is not None)
            bridge.tick_once()
            state = ws.receive_json()
            assert state["ring"]["p"] == [0.1, 0.0, 0.0]
