"""Link-length calibration from touch-point samples.

The operator touches known points on a calibration grid with an extended
index finger; each touch records both sensor orientations. Candidate link
lengths predict fingertip positions, and the solver minimizes the summed
mismatch between predicted pairwise touch distances and the measured grid
distances. Only relative distances enter, so the grid pose need not be
known in the shoulder frame.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .arm import ArmModel, ImuPair, fingertip_position
from .geom import (
    UnitQuaternion,
    Vector3,
    quat_from_axis_angle,
    quat_from_rotvec,
    shortest_arc,
)

# Hand length (wrist to extended fingertip) is measured once, not calibrated.
HAND_LENGTH = 0.2

# Touch a spread-out subset by default: the four grid corners.
DEFAULT_TOUCH_IDS = (1, 3, 7, 9)

MIN_SAMPLES = 4


@dataclass(frozen=True, slots=True)
class CalibrationGrid:
    """True positions of the numbered touch points, meters."""

    points: tuple[tuple[int, Vector3], ...]

    def __post_init__(self) -> None:
        ids = [pid for pid, _ in self.points]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate point ids in calibration grid")
        if len(ids) < MIN_SAMPLES:
            raise ValueError(f"grid needs at least {MIN_SAMPLES} points")
        pts = list(self.points)
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                if pts[a][1].distance_to(pts[b][1]) <= 0.01:
                    raise ValueError(
                        f"grid points {pts[a][0]} and {pts[b][0]} closer than 1 cm"
                    )

    def point(self, point_id: int) -> Vector3:
        for pid, p in self.points:
            if pid == point_id:
                return p
        raise KeyError(f"unknown calibration point id {point_id}")

    def ids(self) -> tuple[int, ...]:
        return tuple(pid for pid, _ in self.points)


@dataclass(frozen=True, slots=True)
class CalibrationSample:
    """Sensor orientations recorded at the instant of one touch."""

    point_id: int
    r1: UnitQuaternion
    r2: UnitQuaternion


@dataclass(frozen=True, slots=True)
class CalibrationOptions:
    init: tuple[float, float] = (0.30, 0.25)
    bounds: tuple[tuple[float, float], tuple[float, float]] = (
        (0.15, 0.45),
        (0.15, 0.45),
    )
    tol: float = 1e-6
    max_iter: int = 500


@dataclass(frozen=True, slots=True)
class CalibrationResult:
    l_u_est: float
    l_f_est: float
    residual: float
    iterations: int
    converged: bool
    ill_conditioned: bool = False
    percent_errors: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.residual < 0.0:
            raise ValueError("residual must be non-negative")


def default_grid() -> CalibrationGrid:
    """3x3 grid, 0.1 m spacing, in the x-z plane centered 0.45 m ahead.

    Stand-in geometry: ids 1..9 run row-major from top-left, top row at
    z = +0.1. Fully overridable via a grid file.
    """
    pts = []
    pid = 1
    for dz in (0.1, 0.0, -0.1):
        for dx in (-0.1, 0.0, 0.1):
            pts.append((pid, Vector3(0.45 + dx, 0.0, dz)))
            pid += 1
    return CalibrationGrid(points=tuple(pts))


def predicted_fingertip(l_u: float, l_f: float, s: CalibrationSample) -> Vector3:
    """Fingertip the candidate lengths imply for one recorded touch."""
    arm = ArmModel(l_u=l_u, l_f=l_f, l_h=HAND_LENGTH)
    return fingertip_position(arm, ImuPair(t=0.0, r1=s.r1, r2=s.r2))


def _sorted_by_id(samples: Sequence[CalibrationSample]) -> list[CalibrationSample]:
    ordered = sorted(samples, key=lambda s: s.point_id)
    for a, b in zip(ordered, ordered[1:]):
        if a.point_id == b.point_id:
            raise ValueError(f"duplicate sample for point id {a.point_id}")
    return ordered


def fk_distances(
    l_u: float, l_f: float, samples: Sequence[CalibrationSample]
) -> dict[tuple[int, int], float]:
    """Pairwise fingertip distances predicted by the candidate lengths."""
    ordered = _sorted_by_id(samples)
    if len(ordered) < 2:
        raise ValueError("need at least 2 samples for pairwise distances")
    tips = [(s.point_id, predicted_fingertip(l_u, l_f, s)) for s in ordered]
    out: dict[tuple[int, int], float] = {}
    for a in range(len(tips)):
        for b in range(a + 1, len(tips)):
            out[(tips[a][0], tips[b][0])] = tips[a][1].distance_to(tips[b][1])
    return out


def true_distances(
    grid: CalibrationGrid, ids: Iterable[int]
) -> dict[tuple[int, int], float]:
    """Measured pairwise distances between the touched grid points."""
    ordered = sorted(ids)
    pts = [(pid, grid.point(pid)) for pid in ordered]
    out: dict[tuple[int, int], float] = {}
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            out[(pts[a][0], pts[b][0])] = pts[a][1].distance_to(pts[b][1])
    return out


def objective(
    l_u: float,
    l_f: float,
    samples: Sequence[CalibrationSample],
    grid: CalibrationGrid,
) -> float:
    """Sum of absolute per-pair distance mismatches; zero iff all pairs match."""
    ordered = _sorted_by_id(samples)
    if len(ordered) < MIN_SAMPLES:
        raise ValueError(
            f"under-determined: need at least {MIN_SAMPLES} samples, got {len(ordered)}"
        )
    d_fk = fk_distances(l_u, l_f, ordered)
    d_tr = true_distances(grid, [s.point_id for s in ordered])
    return sum(abs(d_fk[pair] - d_tr[pair]) for pair in sorted(d_fk))


def _touched_points_ill_conditioned(grid: CalibrationGrid, ids: Sequence[int]) -> bool:
    # Flat objective valley: all touched points within 1 cm of a single line.
    pts = np.array([grid.point(pid).as_tuple() for pid in sorted(ids)])
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    perp = centered - np.outer(centered @ vt[0], vt[0])
    return bool(np.linalg.norm(perp, axis=1).max() < 0.01)


def calibrate(
    samples: Sequence[CalibrationSample],
    grid: CalibrationGrid,
    options: CalibrationOptions | None = None,
    truth: tuple[float, float] | None = None,
) -> CalibrationResult:
    """Estimate (l_u, l_f) by derivative-free simplex search.

    Nelder-Mead over the 2-vector of lengths with box bounds enforced by
    projection; the absolute-value objective is non-smooth, so a
    derivative-free method is the robust default. Deterministic for fixed
    inputs and options; sample order does not matter.
    """
    opts = options or CalibrationOptions()
    ordered = _sorted_by_id(samples)
    if len(ordered) < MIN_SAMPLES:
        raise ValueError(
            f"under-determined: need at least {MIN_SAMPLES} samples, got {len(ordered)}"
        )
    ids = [s.point_id for s in ordered]
    for pid in ids:
        grid.point(pid)  # raises on unknown id

    (lo_u, hi_u), (lo_f, hi_f) = opts.bounds
    x0 = np.clip(np.asarray(opts.init, dtype=float), [lo_u, lo_f], [hi_u, hi_f])

    def cost(x: np.ndarray) -> float:
        return objective(float(x[0]), float(x[1]), ordered, grid)

    res = minimize(
        cost,
        x0,
        method="Nelder-Mead",
        bounds=[(lo_u, hi_u), (lo_f, hi_f)],
        options={
            "xatol": opts.tol,
            "fatol": 1e-12,
            "maxiter": opts.max_iter,
            "maxfev": 4 * opts.max_iter,
        },
    )

    result = CalibrationResult(
        l_u_est=float(res.x[0]),
        l_f_est=float(res.x[1]),
        residual=float(res.fun),
        iterations=int(res.nit),
        converged=bool(res.success),
        ill_conditioned=_touched_points_ill_conditioned(grid, ids),
    )
    if truth is not None:
        result = replace(result, percent_errors=percent_error(result, *truth))
    return result


def percent_error(
    result: CalibrationResult, true_lu: float, true_lf: float
) -> tuple[float, float]:
    """Per-link absolute errors as percentages of the true lengths."""
    if true_lu <= 0.0 or true_lf <= 0.0:
        raise ValueError("true lengths must be positive")
    return (
        100.0 * abs(result.l_u_est - true_lu) / true_lu,
        100.0 * abs(result.l_f_est - true_lf) / true_lf,
    )


# ----------------------------------------------------------------------
# Synthetic sample generation (drives tests, studies, and the CLI).
# ----------------------------------------------------------------------

def _reach_orientations(
    l1: float, l2: float, target: Vector3
) -> tuple[UnitQuaternion, UnitQuaternion]:
    """Two-link reach: orientations putting the chain tip exactly on target.

    The bend plane is chosen deterministically (vertical plane through the
    target); any consistent choice works because the objective consumes
    orientations only through fingertip positions.
    """
    d = target.norm()
    if not abs(l1 - l2) + 1e-9 <= d <= l1 + l2 - 1e-9:
        raise ValueError(f"target at {d:.3f} m unreachable with links {l1}, {l2}")
    u = target.normalized()
    n = u.cross(Vector3(0.0, 0.0, 1.0))
    if n.norm() <= 1e-9:
        n = u.cross(Vector3(0.0, 1.0, 0.0))
    n = n.normalized()
    cos_beta = (d * d + l1 * l1 - l2 * l2) / (2.0 * d * l1)
    beta = math.acos(max(-1.0, min(1.0, cos_beta)))
    a1 = quat_from_axis_angle(n, beta).rotate(u)
    a2 = ((target - a1 * l1) * (1.0 / l2)).normalized()
    x = Vector3(1.0, 0.0, 0.0)
    return shortest_arc(x, a1), shortest_arc(x, a2)


def synthesize_samples(
    arm: ArmModel,
    grid: CalibrationGrid,
    ids: Sequence[int] = DEFAULT_TOUCH_IDS,
    noise_rms_rad: float = 0.0,
    rng: np.random.Generator | None = None,
) -> list[CalibrationSample]:
    """Samples whose noiseless fingertips land exactly on the grid points.

    Wrist rotation is held (identity hand frame), matching the calibration
    protocol. Optional orientation noise perturbs each sensor by a random
    rotation with RMS angle `noise_rms_rad`.
    """
    if noise_rms_rad > 0.0 and rng is None:
        raise ValueError("noise requires an explicit rng")
    out = []
    for pid in ids:
        r1, r2 = _reach_orientations(arm.l_u, arm.l_f + arm.l_h, grid.point(pid))
        if noise_rms_rad > 0.0:
            sigma = noise_rms_rad / math.sqrt(3.0)
            r1 = quat_from_rotvec(Vector3(*rng.normal(0.0, sigma, 3))) * r1
            r2 = quat_from_rotvec(Vector3(*rng.normal(0.0, sigma, 3))) * r2
        out.append(CalibrationSample(point_id=pid, r1=r1, r2=r2))
    return out


@dataclass(frozen=True, slots=True)
class CalibrationStudy:
    """Monte-Carlo repeatability study in the per-trial percentage format."""

    trials: tuple[tuple[float, float], ...]

    @property
    def mean(self) -> tuple[float, float]:
        return (
            statistics.fmean(t[0] for t in self.trials),
            statistics.fmean(t[1] for t in self.trials),
        )

    @property
    def std(self) -> tuple[float, float]:
        if len(self.trials) < 2:
            return (0.0, 0.0)
        return (
            statistics.stdev(t[0] for t in self.trials),
            statistics.stdev(t[1] for t in self.trials),
        )


def monte_carlo_study(
    truth: tuple[float, float] = (0.28, 0.24),
    grid: CalibrationGrid | None = None,
    ids: Sequence[int] = DEFAULT_TOUCH_IDS,
    noise_rms_rad: float = math.radians(2.0),
    trials: int = 10,
    seed: int = 0,
    options: CalibrationOptions | None = None,
) -> CalibrationStudy:
    """Repeated noisy calibrations against a known arm."""
    grid = grid or default_grid()
    arm = ArmModel(l_u=truth[0], l_f=truth[1], l_h=HAND_LENGTH)
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(trials):
        samples = synthesize_samples(arm, grid, ids, noise_rms_rad, rng)
        result = calibrate(samples, grid, options, truth=truth)
        rows.append(result.percent_errors)
    return CalibrationStudy(trials=tuple(rows))


def study_table(study: CalibrationStudy) -> str:
    """Aligned per-trial error table with mean and standard deviation rows."""
    lines = [f"{'':<10}{'Upper arm':>12}{'Forearm':>12}"]
    for i, (pu, pf) in enumerate(study.trials, start=1):
        lines.append(f"{f'Trial {i}':<10}{pu:>11.1f}%{pf:>11.1f}%")
    mu, mf = study.mean
    su, sf = study.std
    lines.append(f"{'Mean':<10}{mu:>11.1f}%{mf:>11.1f}%")
    lines.append(f"{'Std Dev.':<10}{su:>11.1f}%{sf:>11.1f}%")
    return "\n".join(lines)


def study_records(study: CalibrationStudy) -> list[dict]:
    rows: list[dict] = [
        {"trial": i, "upper_arm_pct": pu, "forearm_pct": pf}
        for i, (pu, pf) in enumerate(study.trials, start=1)
    ]
    mu, mf = study.mean
    su, sf = study.std
    rows.append({"trial": "mean", "upper_arm_pct": mu, "forearm_pct": mf})
    rows.append({"trial": "std", "upper_arm_pct": su, "forearm_pct": sf})
    return rows


# ----------------------------------------------------------------------
# File formats: one record per line, whitespace separated, '#' comments.
# ----------------------------------------------------------------------

def _data_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def parse_samples(text: str) -> list[CalibrationSample]:
    """Lines of: point_id r1w r1x r1y r1z r2w r2x r2y r2z."""
    samples = []
    for lineno, line in _data_lines(text):
        fields = line.replace(",", " ").split()
        if len(fields) != 9:
            raise ValueError(f"samples line {lineno}: expected 9 fields, got {len(fields)}")
        try:
            pid = int(fields[0])
            vals = [float(f) for f in fields[1:]]
        except ValueError as exc:
            raise ValueError(f"samples line {lineno}: {exc}") from exc
        samples.append(
            CalibrationSample(
                point_id=pid,
                r1=UnitQuaternion(*vals[0:4]),
                r2=UnitQuaternion(*vals[4:8]),
            )
        )
    return samples


def format_samples(samples: Sequence[CalibrationSample]) -> str:
    lines = ["# point_id r1w r1x r1y r1z r2w r2x r2y r2z"]
    for s in samples:
        q1 = " ".join(repr(c) for c in s.r1.as_tuple())
        q2 = " ".join(repr(c) for c in s.r2.as_tuple())
        lines.append(f"{s.point_id} {q1} {q2}")
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> CalibrationGrid:
    """Lines of: id x y z (meters)."""
    pts = []
    for lineno, line in _data_lines(text):
        fields = line.replace(",", " ").split()
        if len(fields) != 4:
            raise ValueError(f"grid line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            pts.append((int(fields[0]), Vector3(*(float(f) for f in fields[1:]))))
        except ValueError as exc:
            raise ValueError(f"grid line {lineno}: {exc}") from exc
    return CalibrationGrid(points=tuple(pts))


def format_grid(grid: CalibrationGrid) -> str:
    lines = ["# id x y z"]
    for pid, p in grid.points:
        lines.append(f"{pid} {p.x!r} {p.y!r} {p.z!r}")
    return "\n".join(lines) + "\n"
