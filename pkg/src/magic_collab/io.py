"""
io.py
-----

File formats. Traces are JSON lines (header first, one sample per line),
scenes and configs are JSON, experiment results are CSV. Lengths are
metres and times seconds everywhere. Floats are written with ``repr``
so they read back bit-identical.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .agreement import OutlineTrace
from .kinematics import ArmChain, BodyPose
from .retarget import AvatarPlacement, WorkspaceFrame
from .sim import (
    AgentModel,
    ConditionSummary,
    ExperimentSummary,
    Scene,
    SceneParams,
    TargetRegion,
    TrialRecord,
)

ROLES = ("demonstrator", "interpreter", "avatar")


class TraceParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _vec(v):
    return [float(x) for x in np.asarray(v, dtype=np.float64).reshape(-1)]


# -- frames, poses ------------------------------------------------------------


def frame_to_dict(frame: WorkspaceFrame) -> dict:
    return {
        "table_center": _vec(frame.table_center),
        "table_size": list(frame.table_size),
        "forward": _vec(frame.forward),
        "up": _vec(frame.up),
        "workspace_height": float(frame.workspace_height),
    }


def frame_from_dict(d: dict) -> WorkspaceFrame:
    return WorkspaceFrame(**d)


def arm_to_dict(arm: ArmChain) -> dict:
    return {"joints": [_vec(j) for j in arm.joints], "bone_lengths": _vec(arm.bone_lengths)}


def arm_from_dict(d: dict) -> ArmChain:
    return ArmChain(np.array(d["joints"], dtype=np.float64), d.get("bone_lengths"))


def pose_to_dict(pose: BodyPose) -> dict:
    return {
        "root": _vec(pose.root),
        "head": _vec(pose.head),
        "facing": _vec(pose.facing),
        "up": _vec(pose.up),
        "left_arm": arm_to_dict(pose.left_arm),
        "right_arm": arm_to_dict(pose.right_arm),
    }


def pose_from_dict(d: dict) -> BodyPose:
    return BodyPose(
        root=d["root"],
        head=d["head"],
        left_arm=arm_from_dict(d["left_arm"]),
        right_arm=arm_from_dict(d["right_arm"]),
        facing=d["facing"],
        up=d.get("up", (0.0, 1.0, 0.0)),
    )


def placement_to_dict(p: AvatarPlacement) -> dict:
    return {"m": p.m, "b": p.b, "default_stance": _vec(p.default_stance), "reach_budget": p.reach_budget}


def placement_from_dict(d: dict) -> AvatarPlacement:
    return AvatarPlacement(float(d["m"]), float(d["b"]), d["default_stance"], float(d["reach_budget"]))


# -- traces -------------------------------------------------------------------


@dataclass(frozen=True)
class TraceHeader:
    role: str = "demonstrator"
    frame: WorkspaceFrame = field(default_factory=WorkspaceFrame)
    units: dict = field(default_factory=lambda: {"length": "m", "time": "s"})
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TraceRecord:
    t: float
    fingertip: np.ndarray
    pose: BodyPose | None = None
    flag: str | None = None
    residual: float | None = None


def _header_to_json(h: TraceHeader) -> str:
    d = {"type": "header", "role": h.role, "units": h.units, "frame": frame_to_dict(h.frame)}
    d.update(h.extra)
    return json.dumps(d, sort_keys=True)


def _record_to_json(r: TraceRecord) -> str:
    d = {"t": float(r.t), "fingertip": _vec(r.fingertip)}
    if r.pose is not None:
        d["pose"] = pose_to_dict(r.pose)
    if r.flag is not None:
        d["flag"] = r.flag
    if r.residual is not None:
        d["residual"] = float(r.residual)
    return json.dumps(d, sort_keys=True)


def dumps_trace(header: TraceHeader, records) -> str:
    lines = [_header_to_json(header)] + [_record_to_json(r) for r in records]
    return "\n".join(lines) + "\n"


def write_trace(path, header: TraceHeader, records) -> None:
    atomic_write(path, dumps_trace(header, records))


def loads_trace(text: str, require_pose: bool = False):
    """
    Parse a trace document.

    Returns ``(header, records)``. Raises TraceParseError naming the
    1-based line of the first problem; with ``require_pose`` a record
    without a body pose is such a problem.
    """
    header = None
    records = []
    last_t = -math.inf
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError(lineno, f"invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise TraceParseError(lineno, "expected a JSON object")
        if header is None:
            if obj.get("type") != "header":
                raise TraceParseError(lineno, "first line must be the header")
            role = obj.get("role", "demonstrator")
            if role not in ROLES:
                raise TraceParseError(lineno, f"unknown role {role!r}")
            try:
                frame = frame_from_dict(obj["frame"]) if "frame" in obj else WorkspaceFrame()
            except (TypeError, ValueError) as exc:
                raise TraceParseError(lineno, f"bad frame: {exc}") from None
            units = obj.get("units", {"length": "m", "time": "s"})
            if units != {"length": "m", "time": "s"}:
                raise TraceParseError(lineno, f"units must be metres and seconds, got {units}")
            extra = {k: v for k, v in obj.items() if k not in ("type", "role", "units", "frame")}
            header = TraceHeader(role, frame, units, extra)
            continue
        try:
            t = float(obj["t"])
            tip = np.array(obj["fingertip"], dtype=np.float64)
            if tip.shape != (3,) or not np.all(np.isfinite(tip)) or not math.isfinite(t):
                raise ValueError("fingertip must be 3 finite numbers")
            if require_pose and "pose" not in obj:
                raise ValueError("record has no pose")
            pose = pose_from_dict(obj["pose"]) if "pose" in obj else None
            residual = float(obj["residual"]) if "residual" in obj else None
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceParseError(lineno, f"malformed record: {exc}") from None
        if t <= last_t:
            raise TraceParseError(lineno, "timestamps must be strictly increasing")
        last_t = t
        records.append(TraceRecord(t, tip, pose, obj.get("flag"), residual))
    if header is None:
        raise TraceParseError(1, "missing header")
    return header, records


def read_trace(path, require_pose: bool = False):
    with open(path) as fh:
        return loads_trace(fh.read(), require_pose)


def records_to_outline(records) -> OutlineTrace | None:
    if not records:
        return None
    return OutlineTrace([r.t for r in records], [r.fingertip for r in records])


def outline_records(trace: OutlineTrace):
    return [TraceRecord(float(t), p) for t, p in zip(trace.times, trace.points)]


# -- scenes and agents --------------------------------------------------------


def scene_to_dict(scene: Scene) -> dict:
    return {
        "seed": scene.seed,
        "frame": frame_to_dict(scene.frame),
        "params": asdict(scene.params),
        "spheres": [{"center": _vec(c), "radius": float(r)} for c, r in zip(scene.centers, scene.radii)],
        "target_sets": [[{"center": _vec(t.center), "radius": float(t.radius)} for t in s] for s in scene.target_sets],
    }


def scene_from_dict(d: dict) -> Scene:
    params = d.get("params", {})
    params = SceneParams(**{k: tuple(v) if isinstance(v, list) else v for k, v in params.items()})
    return Scene(
        frame=frame_from_dict(d["frame"]),
        centers=[s["center"] for s in d["spheres"]],
        radii=[s["radius"] for s in d["spheres"]],
        target_sets=[[TargetRegion(t["center"], t["radius"]) for t in s] for s in d["target_sets"]],
        params=params,
        seed=d.get("seed"),
    )


def save_scene(path, scene: Scene) -> None:
    atomic_write(path, json.dumps(scene_to_dict(scene), indent=1, sort_keys=True) + "\n")


def load_scene(path) -> Scene:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))


def agents_from_dict(d: dict) -> AgentModel:
    known = {f.name for f in fields(AgentModel)}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown agent parameters: {sorted(unknown)}")
    return AgentModel(**d)


def save_agents(path, agents: AgentModel) -> None:
    atomic_write(path, json.dumps(asdict(agents), indent=1, sort_keys=True) + "\n")


def load_agents(path) -> AgentModel:
    with open(path) as fh:
        return agents_from_dict(json.load(fh))


# -- results ------------------------------------------------------------------

RESULT_COLUMNS = ["condition", "set_id", "target_id", "j", "duration_proxy", "seed"]
SUMMARY_COLUMNS = ["summary", "n", "mean", "sd", "median"]


def dumps_results(records, summary: ExperimentSummary) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([r.condition, r.set_id, r.target_id, repr(float(r.j)), repr(float(r.duration_proxy)), r.seed])
    w.writerow([])
    w.writerow(SUMMARY_COLUMNS)
    for name, c in summary.by_condition().items():
        w.writerow([name, c.n, repr(c.mean), repr(c.sd), repr(c.median)])
    w.writerow(["relative_improvement", repr(float(summary.relative_improvement))])
    w.writerow(["p_value", repr(float(summary.p_value))])
    return buf.getvalue()


def write_results(path, records, summary: ExperimentSummary) -> None:
    atomic_write(path, dumps_results(records, summary))


def loads_results(text: str):
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or rows[0] != RESULT_COLUMNS:
        raise ValueError("not a results table")
    records = []
    i = 1
    while i < len(rows) and rows[i]:
        c, s, t, j, dur, seed = rows[i]
        records.append(TrialRecord(c, int(s), int(t), float(j), float(dur), int(seed)))
        i += 1
    i += 1
    if i >= len(rows) or rows[i] != SUMMARY_COLUMNS:
        raise ValueError("results table has no summary block")
    conds = {}
    extra = {}
    for row in rows[i + 1 :]:
        if len(row) == 5:
            conds[row[0]] = ConditionSummary(int(row[1]), float(row[2]), float(row[3]), float(row[4]))
        elif len(row) == 2:
            extra[row[0]] = float(row[1])
    summary = ExperimentSummary(conds["MAGIC"], conds["Veridical"], extra["relative_improvement"], extra["p_value"])
    return records, summary


def read_results(path):
    with open(path) as fh:
        return loads_results(fh.read())
