"""Session persistence: line-delimited JSON archives and exact replay.

A header line pins format and version and carries the config snapshot;
every following line is one record (sensor sample, engine tick, trial
sample, summary); a final end line makes truncation detectable. Floats
survive the text round-trip exactly, so a loaded archive compares equal
to the one that was saved, and replaying the recorded ticks through a
fresh engine reproduces every trial record bit-for-bit.
"""
from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..arm import ImuPair
from ..geom import RigidTransform, UnitQuaternion, Vector3
from ..imusim import imu_from_record, imu_record
from ..task import (
    Ring,
    TrialConfig,
    TrialRecord,
    TrialSample,
    TrialSummary,
    parse_wire,
    summarize,
)
from ..teleop import Mapping, SessionConfig, SessionEngine, TickRecord

FORMAT = "imuteleop-archive"
VERSION = 1


class CorruptArchiveError(ValueError):
    """File is not a complete, well-formed archive."""


class ArchiveVersionError(CorruptArchiveError):
    """Archive format version not supported by this build."""


@dataclass(frozen=True, slots=True)
class SessionArchive:
    meta: dict
    imu_stream: tuple[ImuPair, ...] = ()
    ticks: tuple[TickRecord, ...] = ()
    trials: tuple[TrialRecord, ...] = ()
    summaries: tuple[TrialSummary, ...] = ()


def simulation_meta(setup, label: str | None = None) -> dict:
    """Config snapshot for an experiments.SimulationSetup."""
    from ..task import format_wire

    return {
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "label": label or f"{setup.wire.name}/imusim",
        "source": "imusim",
        "wire_id": setup.wire.name,
        "wire": format_wire(setup.wire),
        "seed": setup.drift.seed,
        "drift": {
            "bias_rw_sigma": setup.drift.bias_rw_sigma,
            "noise_sigma": setup.drift.noise_sigma,
            "initial_bias": list(setup.drift.initial_bias),
        },
        "arm": {"l_u": setup.arm.l_u, "l_f": setup.arm.l_f, "l_h": setup.arm.l_h},
        "duration": setup.duration,
        "sensor_rate": setup.sensor_rate,
        "loop_rate": setup.loop_rate,
        "feedback_gain": setup.feedback_gain,
        "scale": setup.scale,
        "offset_p": list(setup.offset.as_tuple()),
        "ring": {"inner_radius": 0.030, "outer_radius": 0.050},
        "trial": {
            "start_margin": setup.trial.start_margin,
            "end_margin": setup.trial.end_margin,
        },
    }


def build_archive(
    meta: dict,
    imu_stream: Sequence[ImuPair] = (),
    ticks: Sequence[TickRecord] = (),
    trials: Sequence[TrialRecord] = (),
) -> SessionArchive:
    summaries = tuple(summarize(t) for t in trials if t.samples)
    return SessionArchive(
        meta=dict(meta),
        imu_stream=tuple(imu_stream),
        ticks=tuple(ticks),
        trials=tuple(trials),
        summaries=summaries,
    )


# ----------------------------------------------------------------------
# Record codecs.
# ----------------------------------------------------------------------

def _tick_record(t: TickRecord) -> dict:
    rec: dict = {"kind": "tick", "i": t.index, "t": t.t}
    if t.pose is not None:
        rec["p"] = list(t.pose.translation.as_tuple())
        rec["q"] = list(t.pose.rotation.as_tuple())
    if t.commands:
        rec["cmds"] = list(t.commands)
    return rec


def _tick_from_record(rec: dict) -> TickRecord:
    pose = None
    if "p" in rec:
        pose = RigidTransform(
            UnitQuaternion.from_seq(rec["q"]), Vector3.from_seq(rec["p"])
        )
    return TickRecord(
        index=int(rec["i"]),
        t=float(rec["t"]),
        pose=pose,
        commands=tuple(rec.get("cmds", ())),
    )


def _sample_record(s: TrialSample) -> dict:
    return {
        "kind": "trial_sample",
        "t": s.t,
        "ring_p": list(s.ring.center.as_tuple()),
        "ring_axis": list(s.ring.axis.as_tuple()),
        "ring_inner": s.ring.inner_radius,
        "ring_outer": s.ring.outer_radius,
        "c_wire": list(s.c_wire.as_tuple()),
        "v_wire": list(s.v_wire.as_tuple()),
        "pos_err": s.pos_err,
        "ori_err_deg": s.ori_err_deg,
        "collision": s.collision,
        "s": s.s,
    }


def _sample_from_record(rec: dict) -> TrialSample:
    return TrialSample(
        t=float(rec["t"]),
        ring=Ring(
            center=Vector3.from_seq(rec["ring_p"]),
            axis=Vector3.from_seq(rec["ring_axis"]),
            inner_radius=float(rec["ring_inner"]),
            outer_radius=float(rec["ring_outer"]),
        ),
        c_wire=Vector3.from_seq(rec["c_wire"]),
        v_wire=Vector3.from_seq(rec["v_wire"]),
        pos_err=float(rec["pos_err"]),
        ori_err_deg=float(rec["ori_err_deg"]),
        collision=bool(rec["collision"]),
        s=float(rec["s"]),
    )


def _summary_record(s: TrialSummary) -> dict:
    return {
        "kind": "summary",
        "completion_time_s": s.completion_time_s,
        "mean_position_error_mm": s.mean_position_error_mm,
        "mean_orientation_error_deg": s.mean_orientation_error_deg,
        "non_collision_pct": s.non_collision_pct,
        "completed": s.completed,
    }


def _summary_from_record(rec: dict) -> TrialSummary:
    return TrialSummary(
        completion_time_s=float(rec["completion_time_s"]),
        mean_position_error_mm=float(rec["mean_position_error_mm"]),
        mean_orientation_error_deg=float(rec["mean_orientation_error_deg"]),
        non_collision_pct=float(rec["non_collision_pct"]),
        completed=bool(rec["completed"]),
    )


# ----------------------------------------------------------------------
# Whole-archive serialization.
# ----------------------------------------------------------------------

def dump_archive(archive: SessionArchive) -> str:
    lines = [json.dumps({"format": FORMAT, "version": VERSION, "meta": archive.meta})]
    for pair in archive.imu_stream:
        lines.append(json.dumps(imu_record(pair)))
    for tick in archive.ticks:
        lines.append(json.dumps(_tick_record(tick)))
    for trial in archive.trials:
        lines.append(json.dumps({"kind": "trial_start", "wire_id": trial.wire_id}))
        for s in trial.samples:
            lines.append(json.dumps(_sample_record(s)))
        lines.append(json.dumps({"kind": "trial_end", "completed": trial.completed}))
    for summary in archive.summaries:
        lines.append(json.dumps(_summary_record(summary)))
    lines.append(json.dumps({"kind": "end", "records": len(lines) - 1}))
    return "\n".join(lines) + "\n"


def parse_archive(text: str) -> SessionArchive:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CorruptArchiveError("empty archive")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptArchiveError(f"bad header: {exc}") from exc
    if header.get("format") != FORMAT:
        raise CorruptArchiveError(f"not an archive: format {header.get('format')!r}")
    if header.get("version") != VERSION:
        raise ArchiveVersionError(f"unsupported archive version {header.get('version')!r}")

    imu_stream: list[ImuPair] = []
    ticks: list[TickRecord] = []
    trials: list[TrialRecord] = []
    summaries: list[TrialSummary] = []
    open_trial: dict | None = None
    saw_end = False
    body = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if saw_end:
            raise CorruptArchiveError(f"line {lineno}: records after end marker")
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptArchiveError(f"line {lineno}: {exc}") from exc
        kind = rec.get("kind")
        try:
            if kind == "imu":
                imu_stream.append(imu_from_record(rec))
            elif kind == "tick":
                ticks.append(_tick_from_record(rec))
            elif kind == "trial_start":
                if open_trial is not None:
                    raise CorruptArchiveError(f"line {lineno}: nested trial_start")
                open_trial = {"wire_id": rec["wire_id"], "samples": []}
            elif kind == "trial_sample":
                if open_trial is None:
                    raise CorruptArchiveError(f"line {lineno}: sample outside trial")
                open_trial["samples"].append(_sample_from_record(rec))
            elif kind == "trial_end":
                if open_trial is None:
                    raise CorruptArchiveError(f"line {lineno}: trial_end without start")
                trials.append(
                    TrialRecord(
                        wire_id=open_trial["wire_id"],
                        samples=tuple(open_trial["samples"]),
                        completed=bool(rec["completed"]),
                    )
                )
                open_trial = None
            elif kind == "summary":
                summaries.append(_summary_from_record(rec))
            elif kind == "end":
                if rec.get("records") != body:
                    raise CorruptArchiveError(
                        f"record count mismatch: end says {rec.get('records')}, found {body}"
                    )
                saw_end = True
                continue
            else:
                raise CorruptArchiveError(f"line {lineno}: unknown record kind {kind!r}")
        except (KeyError, TypeError) as exc:
            raise CorruptArchiveError(f"line {lineno}: malformed {kind} record: {exc}") from exc
        body += 1
    if open_trial is not None:
        raise CorruptArchiveError("archive ends inside a trial")
    if not saw_end:
        raise CorruptArchiveError("missing end marker (truncated archive)")
    return SessionArchive(
        meta=header.get("meta", {}),
        imu_stream=tuple(imu_stream),
        ticks=tuple(ticks),
        trials=tuple(trials),
        summaries=tuple(summaries),
    )


def save_archive(archive: SessionArchive, path: str | Path) -> None:
    Path(path).write_text(dump_archive(archive))


def load_archive(path: str | Path) -> SessionArchive:
    return parse_archive(Path(path).read_text())


# ----------------------------------------------------------------------
# Replay.
# ----------------------------------------------------------------------

def engine_from_meta(meta: dict) -> SessionEngine:
    from ..arm import ArmModel

    wire = parse_wire(meta["wire"])
    trial = meta.get("trial", {})
    arm_cfg = meta.get("arm", {})
    ring = meta.get("ring", {})
    mapping = Mapping(
        scale=float(meta.get("scale", 1.0)),
        offset=RigidTransform(
            translation=Vector3.from_seq(meta.get("offset_p", (0.0, 0.0, 0.0)))
        ),
    )
    config = SessionConfig(
        wire=wire,
        source=meta.get("source", "ui"),
        loop_rate=float(meta.get("loop_rate", 50.0)),
        mapping=mapping,
        arm=ArmModel(
            l_u=float(arm_cfg.get("l_u", 0.30)),
            l_f=float(arm_cfg.get("l_f", 0.25)),
            l_h=float(arm_cfg.get("l_h", 0.20)),
        ),
        ring_inner_radius=float(ring.get("inner_radius", 0.030)),
        ring_outer_radius=float(ring.get("outer_radius", 0.050)),
        trial=TrialConfig(
            start_margin=float(trial.get("start_margin", 0.010)),
            end_margin=float(trial.get("end_margin", 0.010)),
        ),
    )
    return SessionEngine(config)


def replay_archive(archive: SessionArchive) -> tuple[TrialRecord, ...]:
    """Re-run the recorded ticks through a fresh engine."""
    engine = engine_from_meta(archive.meta)
    for tick in archive.ticks:
        for cmd in tick.commands:
            engine.command(cmd)
        if tick.pose is not None:
            engine.submit_pose(tick.t, tick.pose)
        engine.tick(tick.t)
    engine.finish()
    return tuple(engine.trials)
