"""Independent matrix-form oracles used to cross-check the quaternion code.

Everything here goes through explicit 3x3 / 4x4 numpy matrices so that the
checks don't share a code path with the package under test.
"""
from __future__ import annotations

import math

import numpy as np


def quat_to_mat(w: float, x: float, y: float, z: float) -> np.ndarray:
    """Standard quaternion-to-rotation-matrix formula."""
    n = math.sqrt(w * w + x * x + y * y + z * z)
    w, x, y, z = w / n, x / n, y / n, z / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rodrigues(axis, angle: float) -> np.ndarray:
    """Rotation matrix about `axis` by `angle` via Rodrigues' formula."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def frame(rot: np.ndarray, p) -> np.ndarray:
    """Homogeneous 4x4 frame from a 3x3 rotation and a translation."""
    T = np.eye(4)
    T[:3, :3] = rot
    T[:3, 3] = np.asarray(p, dtype=float)
    return T


def random_quat(rng: np.random.Generator) -> tuple[float, float, float, float]:
    v = rng.normal(size=4)
    v = v / np.linalg.norm(v)
    return float(v[0]), float(v[1]), float(v[2]), float(v[3])


def random_unit_vec(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def dense_centerline(wire, n: int) -> np.ndarray:
    """Dense (n, 3) sampling of a wire centerline, built directly from the
    segment definitions rather than the package's arclength queries."""
    from imuteleop.task import LineSegment

    chunks = []
    total = wire.length
    for seg in wire.segments:
        k = max(2, int(round(n * seg.length / total)))
        if isinstance(seg, LineSegment):
            p0 = np.array(seg.start.as_tuple())
            p1 = np.array(seg.end.as_tuple())
            ts = np.linspace(0.0, 1.0, k)[:, None]
            chunks.append(p0 + ts * (p1 - p0))
        else:
            c = np.array(seg.center.as_tuple())
            a = np.array(seg.axis.as_tuple())
            a = a / np.linalg.norm(a)
            u = np.array(seg.start.as_tuple()) - c
            r = np.linalg.norm(u)
            u = u / r
            w = np.cross(a, u)
            e = (np.array(seg.end.as_tuple()) - c) / r
            sweep = math.atan2(float(e @ w), float(e @ u))
            if sweep <= 0.0:
                sweep += 2.0 * math.pi
            phis = np.linspace(0.0, sweep, k)[:, None]
            chunks.append(c + r * (np.cos(phis) * u + np.sin(phis) * w))
    return np.vstack(chunks)


def brute_force_distances(table: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Min distance from each query point to the sampled centerline."""
    t2 = (table * table).sum(axis=1)
    q2 = (queries * queries).sum(axis=1)
    d2 = q2[:, None] + t2[None, :] - 2.0 * (queries @ table.T)
    return np.sqrt(np.maximum(d2.min(axis=1), 0.0))
