"""Command-line surface: calibrate, simulate, replay, report, serve."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .. import calib
from ..arm import ArmModel
from ..experiments import DEFAULT_OFFSET, SimulationSetup, run_simulation
from ..imusim import DriftModel
from ..task import Wire, make_s_wire, make_straight_wire, parse_wire
from .archive import (
    CorruptArchiveError,
    build_archive,
    load_archive,
    replay_archive,
    save_archive,
    simulation_meta,
)
from .report import make_report, render_table, table_records

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NO_CONVERGE = 3
EXIT_REPLAY_MISMATCH = 4

CONFIG_ENV = "IMUTELEOP_CONFIG"


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}")


class SystemExit2(Exception):
    """Bad input file or argument combination."""


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return float(parts[0]), float(parts[1])


def _ids(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _load_wire(args) -> Wire:
    if getattr(args, "wire", None):
        return parse_wire(_read_text(args.wire))
    preset = getattr(args, "wire_preset", "straight")
    if preset == "straight":
        return make_straight_wire(0.4)
    if preset == "s":
        return make_s_wire()
    raise SystemExit2(f"unknown wire preset {preset!r}")


# ----------------------------------------------------------------------
# Subcommands.
# ----------------------------------------------------------------------

def cmd_calibrate(args) -> int:
    grid = calib.parse_grid(_read_text(args.grid)) if args.grid else calib.default_grid()
    if args.synthetic:
        study = calib.monte_carlo_study(
            truth=args.truth or (0.28, 0.24),
            grid=grid,
            ids=args.points,
            noise_rms_rad=math.radians(args.noise_deg),
            trials=args.trials,
            seed=args.seed,
        )
        if args.json:
            print(json.dumps(calib.study_records(study)))
        else:
            print("Calibration study: link length errors as percentages of truth")
            print(calib.study_table(study))
        return EXIT_OK

    if not args.samples:
        raise SystemExit2("either --samples or --synthetic is required")
    samples = calib.parse_samples(_read_text(args.samples))
    options = calib.CalibrationOptions(max_iter=args.max_iter)
    result = calib.calibrate(samples, grid, options, truth=args.truth)
    payload = {
        "l_u_est": result.l_u_est,
        "l_f_est": result.l_f_est,
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "ill_conditioned": result.ill_conditioned,
        "percent_errors": result.percent_errors,
    }
    if args.json:
        print(json.dumps(payload))
    else:
        print(f"upper arm: {result.l_u_est:.4f} m")
        print(f"forearm:   {result.l_f_est:.4f} m")
        print(f"residual:  {result.residual:.3e} m over {result.iterations} iterations")
        if result.ill_conditioned:
            print("warning: touched points are nearly collinear; estimates unreliable")
        if result.percent_errors:
            pu, pf = result.percent_errors
            print(f"errors vs truth: {pu:.1f}% / {pf:.1f}%")
    if not result.converged:
        print("calibration did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGE
    return EXIT_OK


def cmd_simulate(args) -> int:
    wire = _load_wire(args)
    if args.drift == "zero":
        drift = DriftModel.zero(seed=args.seed)
    else:
        drift = DriftModel(seed=args.seed)
    setup = SimulationSetup(
        wire=wire,
        arm=ArmModel(),
        drift=drift,
        duration=args.duration,
        sensor_rate=args.sensor_rate,
        loop_rate=args.loop_rate,
        feedback_gain=args.gain,
        scale=args.scale,
    )
    run = run_simulation(setup)
    archive = build_archive(
        simulation_meta(setup, label=args.label),
        imu_stream=run.imu_stream,
        ticks=run.engine.ticks,
        trials=run.engine.trials,
    )
    if args.out:
        save_archive(archive, args.out)
        print(f"archive written to {args.out}")
    for summary in archive.summaries:
        line = {
            "completed": summary.completed,
            "completion_time_s": round(summary.completion_time_s, 3),
            "mean_position_error_mm": round(summary.mean_position_error_mm, 3),
            "mean_orientation_error_deg": round(summary.mean_orientation_error_deg, 3),
            "non_collision_pct": round(summary.non_collision_pct, 2),
        }
        print(json.dumps(line) if args.json else
              "trial: " + ", ".join(f"{k}={v}" for k, v in line.items()))
    if not archive.summaries:
        print("no trial recorded (ring never reached the start zone)")
    return EXIT_OK


def cmd_replay(args) -> int:
    archive = load_archive_or_exit(args.archive)
    got = replay_archive(archive)
    if got != archive.trials:
        print("replay mismatch: recomputed trials differ from the archive", file=sys.stderr)
        return EXIT_REPLAY_MISMATCH
    n_samples = sum(len(t.samples) for t in got)
    print(f"replay ok: {len(got)} trial(s), {n_samples} samples identical")
    return EXIT_OK


def load_archive_or_exit(path: str):
    try:
        return load_archive(path)
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}")
    except CorruptArchiveError as exc:
        raise SystemExit2(f"bad archive {path}: {exc}")


def cmd_report(args) -> int:
    by_group: dict[str, list] = {}
    for path in args.archives:
        archive = load_archive_or_exit(path)
        label = archive.meta.get("label", Path(path).stem)
        by_group.setdefault(label, []).extend(archive.summaries)
    by_group = {k: v for k, v in by_group.items() if v}
    if not by_group:
        raise SystemExit2("no trial summaries found in the given archives")
    tables = make_report(by_group)
    if args.json:
        print(json.dumps([row for t in tables for row in table_records(t)]))
    else:
        print("\n\n".join(render_table(t) for t in tables))
    return EXIT_OK


def cmd_serve(args) -> int:
    from ..teleop import Mapping, SessionConfig, SessionEngine
    from ..teleop.servers import ImusimFeeder, ServeOptions, ServeRuntime
    from ..geom import RigidTransform

    cfg_file: dict = {}
    config_path = args.config or os.environ.get(CONFIG_ENV)
    if config_path:
        try:
            cfg_file = json.loads(_read_text(config_path))
        except json.JSONDecodeError as exc:
            raise SystemExit2(f"bad config file {config_path}: {exc}")

    def setting(name, default):
        flag = getattr(args, name, None)
        return flag if flag is not None else cfg_file.get(name, default)

    wire_path = setting("wire", None)
    if wire_path:
        wire = parse_wire(_read_text(wire_path))
    else:
        preset = setting("wire_preset", "straight")
        wire = make_straight_wire(0.4) if preset == "straight" else make_s_wire()
    source = setting("source", "ui")
    loop_rate = float(setting("loop_rate", 50.0))
    scale = float(setting("scale", 1.0))

    offset = RigidTransform(translation=DEFAULT_OFFSET) if source == "imusim" else RigidTransform()
    engine = SessionEngine(
        SessionConfig(
            wire=wire,
            source=source,
            loop_rate=loop_rate,
            mapping=Mapping(scale=scale, offset=offset),
        )
    )
    frontend = setting("frontend", None) or _default_frontend_dir()
    options = ServeOptions(
        http_host=str(setting("http_host", "127.0.0.1")),
        http_port=int(setting("http_port", 8000)),
        udp_host=str(setting("udp_host", "127.0.0.1")),
        udp_port=int(setting("udp_port", 9870)),
        flip_handedness=bool(setting("flip_handedness", False)),
        frontend_dir=frontend,
        record_dir=setting("record", None),
    )
    runtime = ServeRuntime(engine, options)

    if source == "imusim":
        from ..experiments import simulated_stream

        def make_stream(pass_index: int):
            setup = SimulationSetup(
                wire=wire, drift=DriftModel(seed=pass_index), duration=30.0
            )
            return simulated_stream(setup)

        ImusimFeeder(runtime.bridge, make_stream).start()

    print(f"console: http://{options.http_host}:{options.http_port}/")
    if engine.config.source == "datagram":
        print(f"pose datagrams: udp://{options.udp_host}:{options.udp_port}")
    runtime.serve_forever()
    return EXIT_OK


def _default_frontend_dir() -> str | None:
    # src/imuteleop/session/cli.py -> repo root -> frontend/dist
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


# ----------------------------------------------------------------------
# Parser.
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imuteleop", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("calibrate", help="estimate arm link lengths from touch samples")
    c.add_argument("--samples", help="touch sample file")
    c.add_argument("--grid", help="calibration grid file (default: built-in 3x3)")
    c.add_argument("--synthetic", action="store_true", help="run a Monte-Carlo study on synthetic touches")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--trials", type=int, default=10)
    c.add_argument("--noise-deg", type=float, default=2.0)
    c.add_argument("--points", type=_ids, default=calib.DEFAULT_TOUCH_IDS)
    c.add_argument("--truth", type=_pair, help="true l_u,l_f for percent errors")
    c.add_argument("--max-iter", type=int, default=500)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("simulate", help="run a sensor-driven traversal and archive it")
    s.add_argument("--wire", help="wire definition file")
    s.add_argument("--wire-preset", choices=("straight", "s"), default="straight")
    s.add_argument("--drift", choices=("default", "zero"), default="default")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--duration", type=float, default=20.0)
    s.add_argument("--sensor-rate", type=float, default=100.0)
    s.add_argument("--loop-rate", type=float, default=50.0)
    s.add_argument("--gain", type=float, default=0.0, help="visual-feedback gain, 1/s")
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--label")
    s.add_argument("--out", help="archive output path")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("replay", help="recompute an archived session and verify it")
    r.add_argument("archive")
    r.set_defaults(func=cmd_replay)

    rep = sub.add_parser("report", help="tabulate trial summaries from archives")
    rep.add_argument("archives", nargs="+")
    rep.add_argument("--json", action="store_true")
    rep.set_defaults(func=cmd_report)

    sv = sub.add_parser("serve", help="run the live console (UDP + web UI)")
    sv.add_argument("--config", help=f"JSON config (or ${CONFIG_ENV})")
    sv.add_argument("--wire")
    sv.add_argument("--wire-preset", choices=("straight", "s"))
    sv.add_argument("--source", choices=("imusim", "datagram", "ui"))
    sv.add_argument("--http-host")
    sv.add_argument("--http-port", type=int)
    sv.add_argument("--udp-port", type=int)
    sv.add_argument("--loop-rate", type=float)
    sv.add_argument("--scale", type=float)
    sv.add_argument("--frontend", help="static UI directory")
    sv.add_argument("--record", help="directory for per-trial archives")
    sv.add_argument("--flip-handedness", action="store_true", default=None)
    sv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
