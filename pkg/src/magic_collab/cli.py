"""
cli.py
------

Command-line entry point.

    magic-collab retarget TRACE --out OUT [--config CFG] [--report] [--strict]
    magic-collab agree DEM_TRACE INT_TRACE [--out OUT]
    magic-collab simulate [--scene F | --generate SEED] [--agents F] --trials N --seed S --out CSV
    magic-collab calibrate [--scene F | --generate SEED] --targets JM JV --out AGENTS
    magic-collab scene generate --seed S --out SCENE

Exit codes: 0 success, 1 other failure, 2 parse error, 3 calibration
failure, 4 unreachable target with ``--strict``.

The workspace config for ``retarget`` defaults to the file named by the
``MAGIC_COLLAB_CONFIG`` environment variable, if set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from . import io
from .agreement import AgreementResult, pointing_agreement
from .retarget import (
    MirrorSpec,
    UnreachableTarget,
    avatar_fingertip,
    mirror_pose,
    placement_for_pose,
    retarget_pose,
)
from .sim import AgentModel, CalibrationFailed, calibrate, generate_scene, run_experiment

CONFIG_ENV = "MAGIC_COLLAB_CONFIG"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_CALIBRATION = 3
EXIT_UNREACHABLE = 4


class _Exit(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _load_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _Exit(EXIT_PARSE, f"{path}: line {exc.lineno}: invalid {what} ({exc.msg})") from None
    except OSError as exc:
        raise _Exit(EXIT_FAILURE, f"{path}: {exc.strerror}") from None


def _read_trace(path, require_pose=False):
    try:
        return io.read_trace(path, require_pose)
    except io.TraceParseError as exc:
        raise _Exit(EXIT_PARSE, f"{path}: {exc}") from None
    except OSError as exc:
        raise _Exit(EXIT_FAILURE, f"{path}: {exc.strerror}") from None


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


def _nearest_side(pose, fingertip):
    # which of the remote arms the record's fingertip belongs to
    arms = pose.arms()
    return min(arms, key=lambda side: float(np.linalg.norm(arms[side].fingertip - fingertip)))


# -- retarget -----------------------------------------------------------------


def _workspace_config(args):
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    cfg = _load_json(path, "workspace config")
    if not isinstance(cfg, dict):
        raise _Exit(EXIT_PARSE, f"{path}: workspace config must be a JSON object")
    return cfg


def cmd_retarget(args) -> int:
    header, records = _read_trace(args.trace, require_pose=True)
    cfg = _workspace_config(args)
    try:
        frame = io.frame_from_dict(cfg["frame"]) if "frame" in cfg else header.frame
        if "placement" in cfg:
            placement = io.placement_from_dict(cfg["placement"])
        elif records:
            placement = placement_for_pose(frame, records[0].pose, budget_fraction=cfg.get("budget_fraction", 0.9))
        else:
            placement = None
    except (KeyError, TypeError, ValueError) as exc:
        raise _Exit(EXIT_PARSE, f"bad workspace config: {exc}") from None

    mirror = MirrorSpec.from_frame(frame)
    out = []
    max_err = 0.0
    n_unreachable = 0
    for lineno, rec in enumerate(records, start=2):
        side = _nearest_side(rec.pose, rec.fingertip)
        try:
            avatar = retarget_pose(rec.pose, frame, placement)
        except UnreachableTarget as exc:
            if args.strict:
                raise _Exit(EXIT_UNREACHABLE, f"{args.trace}: record {lineno - 1}: {exc}") from None
            n_unreachable += 1
            avatar = mirror_pose(rec.pose, mirror)
            out.append(io.TraceRecord(rec.t, avatar_fingertip(avatar, side), avatar, "unreachable", exc.residual))
            continue
        tip = avatar_fingertip(avatar, side)
        if frame.in_workspace(rec.fingertip):
            max_err = max(max_err, float(np.linalg.norm(tip - rec.fingertip)))
        out.append(io.TraceRecord(rec.t, tip, avatar))

    io.write_trace(args.out, header, out)
    if args.report:
        print(_dumps({"samples": len(out), "unreachable": n_unreachable, "max_fingertip_error": max_err}))
    elif n_unreachable:
        print(f"warning: {n_unreachable} unreachable sample(s) flagged", file=sys.stderr)
    return EXIT_OK


# -- agree --------------------------------------------------------------------


def cmd_agree(args) -> int:
    _, dem = _read_trace(args.demonstrator)
    _, int_ = _read_trace(args.interpreter)
    for name, path, recs in (("demonstrator", args.demonstrator, dem), ("interpreter", args.interpreter, int_)):
        if not recs:
            print(f"warning: {name} trace {path} has no samples", file=sys.stderr)
    if dem and int_:
        res = pointing_agreement(io.records_to_outline(dem), io.records_to_outline(int_))
    else:
        res = AgreementResult(0.0, 0.0, 0.0, 0.0, not dem, not int_)
    for name, flag in (("demonstrator", res.degenerate_dem), ("interpreter", res.degenerate_int)):
        if flag:
            print(f"warning: degenerate {name} outline (flat or fewer than 4 samples); j set to 0", file=sys.stderr)
    text = _dumps(asdict(res)) + "\n"
    if args.out:
        io.atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


# -- scenes, agents, simulation -----------------------------------------------


def _scene(args):
    if args.scene:
        d = _load_json(args.scene, "scene")
        try:
            return io.scene_from_dict(d)
        except (KeyError, TypeError, ValueError) as exc:
            raise _Exit(EXIT_PARSE, f"{args.scene}: bad scene: {exc}") from None
    return generate_scene(args.generate if args.generate is not None else 0)


def _agents(args) -> AgentModel:
    if not args.agents:
        return AgentModel()
    d = _load_json(args.agents, "agent config")
    try:
        return io.agents_from_dict(d)
    except (TypeError, ValueError) as exc:
        raise _Exit(EXIT_PARSE, f"{args.agents}: bad agent config: {exc}") from None


def scale_noise(agents: AgentModel, scale: float) -> AgentModel:
    """Every sigma, the depth bias and the dropout multiplied by ``scale``."""
    if scale < 0:
        raise ValueError("noise scale must be >= 0")
    return replace(
        agents,
        motor_sigma=agents.motor_sigma * scale,
        perception_sigma_magic=agents.perception_sigma_magic * scale,
        perception_sigma_veridical=agents.perception_sigma_veridical * scale,
        depth_bias_veridical=agents.depth_bias_veridical * scale,
        occlusion_dropout=min(agents.occlusion_dropout * scale, 1.0),
    )


def _calibrate(scene, targets, tolerance, seed, trials, base):
    try:
        return calibrate(scene, tuple(targets), tolerance, seed=seed, trials=trials, base=base)
    except CalibrationFailed as exc:
        raise _Exit(EXIT_CALIBRATION, f"calibration failed: {exc}") from None


def _summary_dict(summary):
    d = {name: asdict(c) for name, c in summary.by_condition().items()}
    d["relative_improvement"] = summary.relative_improvement
    d["p_value"] = summary.p_value
    return d


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise _Exit(EXIT_FAILURE, "--trials must be >= 1")
    scene = _scene(args)
    agents = _agents(args)
    if args.noise is not None:
        agents = scale_noise(agents, args.noise)
    if args.calibrate is not None:
        agents = _calibrate(scene, args.calibrate, args.tolerance, args.seed, args.calibration_trials, agents)
    try:
        records, summary = run_experiment(scene, agents, args.trials, args.seed)
    except UnreachableTarget as exc:
        raise _Exit(EXIT_FAILURE, f"simulation hit an unreachable target: {exc}") from None
    io.write_results(args.out, records, summary)
    print(_dumps({"agents": asdict(agents), "summary": _summary_dict(summary)}))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    scene = _scene(args)
    agents = _calibrate(scene, args.targets, args.tolerance, args.seed, args.trials, _agents(args))
    io.save_agents(args.out, agents)
    print(_dumps(asdict(agents)))
    return EXIT_OK


def cmd_scene_generate(args) -> int:
    try:
        scene = generate_scene(args.seed)
    except ValueError as exc:
        raise _Exit(EXIT_FAILURE, f"scene generation failed: {exc}") from None
    io.save_scene(args.out, scene)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _scene_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--scene", help="scene JSON file")
    g.add_argument("--generate", type=int, metavar="SEED", help="generate the scene from this seed (default 0)")
    p.add_argument("--agents", help="agent model JSON file (default: built-in calibrated model)")


def _non_negative(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magic-collab", description=__doc__.split("\n\n")[1])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("retarget", help="retarget every pose of a trace for the avatar view")
    p.add_argument("trace")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--config", help=f"workspace config JSON (default: ${CONFIG_ENV})")
    p.add_argument("--report", action="store_true", help="print the max fingertip error")
    p.add_argument("--strict", action="store_true", help="exit 4 on the first unreachable sample")
    p.set_defaults(func=cmd_retarget)

    p = sub.add_parser("agree", help="pointing agreement of two outline traces")
    p.add_argument("demonstrator")
    p.add_argument("interpreter")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("simulate", help="run the two-condition experiment")
    _scene_args(p)
    p.add_argument("--trials", type=int, default=200, help="trials per condition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", required=True, help="results CSV")
    p.add_argument("--noise", type=_non_negative, help="scale every noise parameter; 0 gives the exact channel")
    p.add_argument("--calibrate", type=float, nargs=2, metavar=("J_MAGIC", "J_VERIDICAL"))
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--calibration-trials", type=int, default=500)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit agent noise to target condition means")
    _scene_args(p)
    p.add_argument("--targets", type=float, nargs=2, default=(0.24, 0.18), metavar=("J_MAGIC", "J_VERIDICAL"))
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--out", "-o", required=True, help="agent model JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("scene", help="scene files")
    scene_sub = p.add_subparsers(dest="scene_command", required=True)
    g = scene_sub.add_parser("generate", help="write a generated scene")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", "-o", required=True)
    g.set_defaults(func=cmd_scene_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
