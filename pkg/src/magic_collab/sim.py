"""
sim.py
------

Deterministic two-agent simulation of the outlining task.

A Demonstrator outlines a spherical target on a blob model; an
Interpreter sees that outline through a perception channel and outlines
what they understood. The MAGIC channel shows the retargeted avatar's
fingertip (shared viewpoint, no occlusion); the Veridical channel shows
the real fingertip from the opposite side of the table, with a depth
misjudgement along the line of sight and occluded samples dropped.
Agreement between the two outlines is the volumetric Jaccard index.

Human behaviour is replaced by these parametric channels, so absolute J
values are whatever the channel parameters make them; :func:`calibrate`
fits the parameters to target condition means.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats

from .agreement import AgreementResult, OutlineTrace, hull_agreement
from .geometry import as_vec3
from .hull import ConvexHull, DegenerateOutline, convex_hull
from .kinematics import DEFAULT_BONES, BodyPose, fabrik_solve, reach, standing_pose
from .retarget import (
    AvatarPlacement,
    MirrorSpec,
    WorkspaceFrame,
    avatar_fingertip,
    mirror_pose,
    placement_for_pose,
    retarget_pose,
)

MAGIC = "MAGIC"
VERIDICAL = "Veridical"
CONDITIONS = (MAGIC, VERIDICAL)
N_SETS = 4
TARGETS_PER_SET = 16
SAMPLE_DWELL = 0.1  # seconds per outline sample
EYE_HEIGHT = 1.60
# lag-one correlation of perception error between consecutive samples
PERCEPTION_CORRELATION = 0.98


class CalibrationFailed(RuntimeError):
    """No channel parameters within the search bounds reach the target means."""


@dataclass(frozen=True)
class TargetRegion:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if not self.radius > 0:
            raise ValueError("target radius must be positive")


@dataclass(frozen=True)
class SceneParams:
    table_size: tuple = (1.0, 0.8, 0.75)
    workspace_height: float = 0.6
    n_spheres: int = 12
    sphere_radius: tuple = (0.04, 0.08)
    blob_height: float = 0.25  # blob seed centre above the table top
    blob_spread: float = 0.12  # max distance of any sphere centre from the seed
    target_radius: float = 0.025
    stance_gap: float = 0.05  # demonstrator root distance behind the table edge
    shoulder_height: float = 1.40
    body_height: float = 1.70
    bones: tuple = DEFAULT_BONES

    def __post_init__(self):
        object.__setattr__(self, "table_size", tuple(float(x) for x in self.table_size))
        object.__setattr__(self, "sphere_radius", tuple(float(x) for x in self.sphere_radius))
        object.__setattr__(self, "bones", tuple(float(x) for x in self.bones))


@dataclass(frozen=True)
class Scene:
    frame: WorkspaceFrame
    centers: np.ndarray
    radii: np.ndarray
    target_sets: tuple  # N_SETS tuples of TARGETS_PER_SET TargetRegion
    params: SceneParams = field(default_factory=SceneParams)
    seed: int | None = None

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64).reshape(-1, 3)
        r = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        if len(c) != len(r):
            raise ValueError("centers and radii differ in length")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "target_sets", tuple(tuple(s) for s in self.target_sets))
        if len(self.target_sets) != N_SETS or any(len(s) != TARGETS_PER_SET for s in self.target_sets):
            raise ValueError(f"scene needs {N_SETS} sets of {TARGETS_PER_SET} targets")

    def demonstrator_pose(self) -> BodyPose:
        """Rest pose at the near side of the table, facing forward."""
        return _near_pose(self.frame, self.params)

    def placement(self) -> AvatarPlacement:
        return placement_for_pose(self.frame, self.demonstrator_pose())

    def interpreter_eye(self) -> np.ndarray:
        pose = self.demonstrator_pose()
        return pose.root + self.frame.up * EYE_HEIGHT


@dataclass(frozen=True)
class AgentModel:
    """
    Noise model standing in for the two participants. Lengths in metres.

    Defaults are the output of ``calibrate(generate_scene(0), (0.24, 0.18),
    seed=0, trials=500)`` with 2 mm motor jitter and 30 % dropout.
    """

    motor_sigma: float = 0.002
    perception_sigma_magic: float = 0.014013671875000001
    perception_sigma_veridical: float = 0.014013671875000001
    depth_bias_veridical: float = 0.014453125
    occlusion_dropout: float = 0.3
    samples_per_outline: int = 24

    def __post_init__(self):
        for name in ("motor_sigma", "perception_sigma_magic", "perception_sigma_veridical", "depth_bias_veridical"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0")
        if not 0.0 <= self.occlusion_dropout <= 1.0:
            raise ValueError("occlusion_dropout must be in [0, 1]")
        if self.samples_per_outline < 4:
            raise ValueError("samples_per_outline must be at least 4")

    @classmethod
    def noiseless(cls, samples_per_outline: int = 24) -> "AgentModel":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, samples_per_outline)


@dataclass(frozen=True)
class TrialRecord:
    condition: str
    set_id: int
    target_id: int
    j: float
    duration_proxy: float
    seed: int


@dataclass(frozen=True)
class ConditionSummary:
    n: int
    mean: float
    sd: float
    median: float


@dataclass(frozen=True)
class ExperimentSummary:
    magic: ConditionSummary
    veridical: ConditionSummary
    relative_improvement: float
    p_value: float

    def by_condition(self):
        return {MAGIC: self.magic, VERIDICAL: self.veridical}


# -- scene generation ---------------------------------------------------------


def _near_pose(frame: WorkspaceFrame, params: SceneParams) -> BodyPose:
    floor = frame.table_center - frame.up * params.table_size[2]
    root = floor - frame.forward * (frame.half_depth + params.stance_gap)
    return standing_pose(
        root,
        frame.forward,
        frame.up,
        height=params.body_height,
        shoulder_height=params.shoulder_height,
        bones=params.bones,
    )


def blob_components(centers, radii) -> int:
    """Number of connected components of the sphere-overlap graph."""
    centers = np.asarray(centers, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    parent = list(range(len(radii)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(radii)):
        for k in range(i + 1, len(radii)):
            if np.linalg.norm(centers[i] - centers[k]) < radii[i] + radii[k]:
                parent[find(i)] = find(k)
    return len({find(i) for i in range(len(radii))})


def _random_unit(rng, n=None):
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _inside_box(frame, pts, margin):
    lo, hi = frame.workspace_bounds()
    q = frame.to_local(pts)
    return np.all((q >= lo + margin) & (q <= hi - margin), axis=-1)


def _farthest_point_order(pts, k, start=0):
    chosen = [start]
    d = np.linalg.norm(pts - pts[start], axis=1)
    while len(chosen) < k:
        i = int(np.argmax(d))
        chosen.append(i)
        d = np.minimum(d, np.linalg.norm(pts - pts[i], axis=1))
    return chosen


def _reachable_targets(frame, params, pts, margin):
    """Mask of candidate centres whose whole outline sphere is reachable in both conditions."""
    pose = _near_pose(frame, params)
    arm = pose.right_arm
    R = reach(arm)
    rad = params.target_radius
    ok = np.linalg.norm(pts - arm.shoulder, axis=1) <= R - rad - margin

    # avatar side: after placement, its (mirrored) shoulder must also reach
    placement = placement_for_pose(frame, pose)
    mirrored = mirror_pose(pose, MirrorSpec.from_frame(frame))
    shoulder0 = mirrored.left_arm.shoulder
    f_default = float(frame.to_local(placement.default_stance)[2])
    for df in (-rad, 0.0, rad):
        # place_avatar for every candidate at once
        f = np.clip(frame.to_local(pts)[:, 2] + df, -frame.half_depth, frame.half_depth)
        root_shift = placement.m * f + placement.b - f_default
        shoulder = placement.default_stance - mirrored.root + shoulder0 + np.outer(root_shift, frame.forward)
        ok &= np.linalg.norm(pts - shoulder, axis=1) <= R - rad - margin
    return ok


def generate_scene(seed: int, params: SceneParams = SceneParams(), frame: WorkspaceFrame | None = None) -> Scene:
    """
    Random blob model above the table and four matched sets of 16 targets.

    Targets are spread over the reachable part of the blob surface by
    farthest-point sampling into 16 spots; each set takes a different
    nearby point for every spot, so sets cover the same parts of the
    model without repeating positions.
    """
    if frame is None:
        frame = WorkspaceFrame(table_size=params.table_size, workspace_height=params.workspace_height)
    r_lo, r_hi = params.sphere_radius
    w, d, _ = frame.table_size
    needed = 2 * (params.blob_spread + r_hi + params.target_radius)
    if not 0 < r_lo <= r_hi or needed > min(w, d, frame.workspace_height) or params.blob_height < needed / 2:
        raise ValueError("blob does not fit inside the workspace with these parameters")

    rng = np.random.default_rng(seed)
    seed_center = frame.table_center + frame.up * params.blob_height
    centers = [seed_center]
    radii = [rng.uniform(r_lo, r_hi)]
    while len(centers) < params.n_spheres:
        for _ in range(1000):
            parent = int(rng.integers(len(centers)))
            r = rng.uniform(r_lo, r_hi)
            c = centers[parent] + _random_unit(rng) * (radii[parent] + r) * rng.uniform(0.45, 0.8)
            if np.linalg.norm(c - seed_center) <= params.blob_spread:
                break
        else:
            raise ValueError("could not grow blob within blob_spread")
        centers.append(c)
        radii.append(r)
    centers = np.array(centers)
    radii = np.array(radii)

    # dense sample of the union surface
    area = radii**2
    owner = rng.choice(len(radii), size=6000, p=area / area.sum())
    pts = centers[owner] + _random_unit(rng, len(owner)) * radii[owner, None]
    dist = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    covered = (dist < radii[None, :] - 1e-9).any(axis=1)
    pts = pts[~covered]
    margin = params.target_radius + 0.01
    pts = pts[_inside_box(frame, pts, margin)]
    pts = pts[_reachable_targets(frame, params, pts, 0.02)]
    if len(pts) < N_SETS * TARGETS_PER_SET:
        raise ValueError("too few reachable surface points for the target sets")

    # deterministic start: the candidate nearest the near side
    start = int(np.argmin(frame.to_local(pts)[:, 2]))
    anchors = _farthest_point_order(pts, TARGETS_PER_SET, start)
    spacing = 2.0 * params.target_radius
    sets = [[] for _ in range(N_SETS)]
    free = np.ones(len(pts), dtype=bool)
    for a in anchors:
        nd = np.linalg.norm(pts - pts[a], axis=1)
        radius = 2.5 * spacing
        pool = np.flatnonzero((nd <= radius) & free)
        while len(pool) < N_SETS:
            radius *= 1.5
            pool = np.flatnonzero((nd <= radius) & free)
        local = pts[pool]
        order = _farthest_point_order(local, N_SETS, int(np.argmin(nd[pool])))
        for s, i in enumerate(order):
            sets[s].append(TargetRegion(local[i], params.target_radius))
        free[pool[order]] = False
    return Scene(frame, centers, radii, sets, params, seed)


# -- one trial ----------------------------------------------------------------


def spiral_outline(center, radius, n, rotation=None) -> np.ndarray:
    """``n`` points winding pole to pole over a sphere, in drawing order."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(1.0 - z * z)
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    u = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    if rotation is not None:
        u = u @ np.asarray(rotation).T
    return as_vec3(center) + radius * u


def _random_rotation(rng) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def correlated_noise(z, rho: float) -> np.ndarray:
    """
    AR(1) filter over rows of unit normals ``z``; keeps unit marginal variance.

    Misjudging a moving fingertip drifts slowly along the outline rather
    than jumping independently at every sample.
    """
    e = np.empty_like(z)
    e[0] = z[0]
    k = math.sqrt(1.0 - rho * rho)
    for i in range(1, len(z)):
        e[i] = rho * e[i - 1] + k * z[i]
    return e


def occluded(eye, points, centers, radii) -> np.ndarray:
    """True where the segment eye -> point passes through any blob sphere."""
    seg = points - eye
    rel = centers[None, :, :] - eye
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    t = np.einsum("ij,ikj->ik", seg, rel) / seg_len2[:, None]
    t = np.clip(t, 0.0, 1.0)
    closest = eye + t[:, :, None] * seg[:, None, :]
    d = np.linalg.norm(closest - centers[None, :, :], axis=2)
    return (d < radii[None, :]).any(axis=1)


def magic_channel(scene: Scene, points) -> np.ndarray:
    """
    Avatar fingertip positions seen by the interpreter when the remote
    demonstrator's fingertip visits ``points`` from the near side.
    """
    pose = scene.demonstrator_pose()
    placement = scene.placement()
    arm = pose.right_arm
    seen = np.empty_like(points)
    for k, p in enumerate(points):
        arm = fabrik_solve(arm, p, tol=1e-6)
        remote = replace(pose, right_arm=arm)
        avatar = retarget_pose(remote, scene.frame, placement)
        seen[k] = avatar_fingertip(avatar, "right")
    return seen


@dataclass
class _PreparedTrial:
    # everything about a trial that does not depend on the perception parameters
    condition: str
    set_id: int
    target_id: int
    seed: int
    n: int
    dem: np.ndarray
    dem_hull: ConvexHull | None
    truth: np.ndarray
    view_dirs: np.ndarray
    occluded: np.ndarray
    z_perceive: np.ndarray
    u_drop: np.ndarray
    z_motor: np.ndarray


def _prepare(scene, set_id, target_id, condition, agents, seed) -> _PreparedTrial:
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    target = scene.target_sets[set_id][target_id]
    n = agents.samples_per_outline
    rng = np.random.default_rng(seed)
    rot = _random_rotation(rng)
    z_dem = rng.normal(size=(n, 3))
    z_perceive = correlated_noise(rng.normal(size=(n, 3)), PERCEPTION_CORRELATION)
    u_drop = rng.random(n)
    z_motor = rng.normal(size=(n, 3))

    dem = spiral_outline(target.center, target.radius, n, rot) + agents.motor_sigma * z_dem
    try:
        dem_hull = convex_hull(dem)
    except DegenerateOutline:
        dem_hull = None
    eye = scene.interpreter_eye()
    truth = magic_channel(scene, dem) if condition == MAGIC else dem
    view = truth - eye
    view /= np.linalg.norm(view, axis=1, keepdims=True)
    occ = occluded(eye, truth, scene.centers, scene.radii) if condition == VERIDICAL else np.zeros(n, bool)
    return _PreparedTrial(condition, set_id, target_id, seed, n, dem, dem_hull, truth, view, occ, z_perceive, u_drop, z_motor)


def _interpreter_points(prep: _PreparedTrial, agents: AgentModel) -> np.ndarray:
    if prep.condition == MAGIC:
        seen = prep.truth + agents.perception_sigma_magic * prep.z_perceive
        keep = np.ones(prep.n, bool)
    else:
        seen = (
            prep.truth
            + agents.perception_sigma_veridical * prep.z_perceive
            + agents.depth_bias_veridical * prep.view_dirs
        )
        keep = ~(prep.occluded & (prep.u_drop < agents.occlusion_dropout))
    return seen[keep] + agents.motor_sigma * prep.z_motor[keep]


def _score(prep: _PreparedTrial, agents: AgentModel) -> tuple[AgreementResult, int]:
    pts = _interpreter_points(prep, agents)
    if prep.dem_hull is None:
        return AgreementResult(0.0, 0.0, 0.0, 0.0, True, False), len(pts)
    try:
        int_hull = convex_hull(pts)
    except DegenerateOutline:
        return AgreementResult(0.0, prep.dem_hull.volume, 0.0, 0.0, False, True), len(pts)
    return hull_agreement(prep.dem_hull, int_hull), len(pts)


def _record(prep, agents) -> TrialRecord:
    res, n_int = _score(prep, agents)
    duration = (prep.n + n_int) * SAMPLE_DWELL
    return TrialRecord(prep.condition, prep.set_id, prep.target_id, res.j, duration, prep.seed)


def simulate_trial(
    scene: Scene,
    set_id: int,
    target_id: int,
    condition: str,
    agents: AgentModel,
    seed: int,
) -> TrialRecord:
    """
    One outlining round: the demonstrator traces the target, the
    interpreter re-traces what the condition's channel let them see.

    Raises
    ------
    UnreachableTarget
      The MAGIC avatar cannot reach an outline sample.
    """
    if not (0 <= set_id < N_SETS and 0 <= target_id < TARGETS_PER_SET):
        raise IndexError(f"no target {set_id}/{target_id}")
    return _record(_prepare(scene, set_id, target_id, condition, agents, seed), agents)


def trial_traces(scene, set_id, target_id, condition, agents, seed):
    """
    Demonstrator and interpreter outlines of one trial, for inspection
    and export. The interpreter trace is None when every sample was lost.
    """
    prep = _prepare(scene, set_id, target_id, condition, agents, seed)
    interp = _interpreter_points(prep, agents)
    dem = OutlineTrace.from_points(prep.dem, SAMPLE_DWELL)
    if len(interp) == 0:
        return dem, None
    return dem, OutlineTrace.from_points(interp, SAMPLE_DWELL, t0=prep.n * SAMPLE_DWELL)


# -- experiments --------------------------------------------------------------


def _trial_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32)]


def schedule(trials_per_condition: int, seed: int):
    """
    Counterbalanced trial plan: ``(condition, set_id, target_id, seed)``.

    Trial pair ``k`` runs MAGIC on set ``k % 4`` and Veridical on set
    ``(k + 2) % 4`` with the same target index and the same trial seed,
    so both conditions see the same demonstrator motion and noise draws;
    which condition comes first alternates with ``k`` and the master seed.
    """
    if trials_per_condition < 1:
        raise ValueError("trials_per_condition must be >= 1")
    seeds = _trial_seeds(seed, trials_per_condition)
    plan = []
    for k in range(trials_per_condition):
        target_id = (k // N_SETS) % TARGETS_PER_SET
        pair = [
            (MAGIC, k % N_SETS, target_id, seeds[k]),
            (VERIDICAL, (k + 2) % N_SETS, target_id, seeds[k]),
        ]
        if (k + seed) % 2:
            pair.reverse()
        plan.extend(pair)
    return plan


def summarize(records, seed: int = 0, n_resamples: int = 9999) -> ExperimentSummary:
    """Per-condition mean / SD / median, relative improvement and permutation p-value."""
    rows = sorted(records, key=lambda r: (r.condition, r.set_id, r.target_id, r.seed))
    js = {c: np.array([r.j for r in rows if r.condition == c]) for c in CONDITIONS}

    def cond(x):
        if len(x) == 0:
            return ConditionSummary(0, math.nan, math.nan, math.nan)
        sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
        return ConditionSummary(len(x), float(np.mean(x)), sd, float(np.median(x)))

    m, v = cond(js[MAGIC]), cond(js[VERIDICAL])
    rel = (m.mean - v.mean) / v.mean if v.mean > 0 else math.nan
    p = permutation_p_value(js[MAGIC], js[VERIDICAL], seed, n_resamples)
    return ExperimentSummary(m, v, float(rel), p)


def permutation_p_value(a, b, seed: int = 0, n_resamples: int = 9999) -> float:
    """Two-sided permutation test on the difference of means."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        return math.nan
    if np.ptp(np.concatenate([a, b])) == 0:
        return 1.0
    res = stats.permutation_test(
        (a, b),
        lambda x, y: np.mean(x) - np.mean(y),
        permutation_type="independent",
        alternative="two-sided",
        n_resamples=n_resamples,
        vectorized=False,
        rng=np.random.default_rng(seed),
    )
    return float(res.pvalue)


def run_experiment(scene: Scene, agents: AgentModel, trials_per_condition: int, seed: int):
    """
    Run the counterbalanced plan and summarise it.

    Returns
    -------
    records : list of TrialRecord
      In execution order.
    summary : ExperimentSummary
    """
    records = [simulate_trial(scene, s, t, c, agents, ts) for c, s, t, ts in schedule(trials_per_condition, seed)]
    return records, summarize(records, seed)


# -- calibration --------------------------------------------------------------


def _mean_j(prepared, agents) -> float:
    return float(np.mean([_score(p, agents)[0].j for p in prepared]))


def _bisect(f, lo, hi, target, tol, max_iter=30):
    # f is non-increasing on [lo, hi]; find x with |f(x) - target| <= tol
    f_lo = f(lo)
    if f_lo <= target + tol:
        return (lo, f_lo) if abs(f_lo - target) <= tol else None
    f_hi = f(hi)
    if f_hi >= target - tol:
        return (hi, f_hi) if abs(f_hi - target) <= tol else None
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if best is None or abs(f_mid - target) < abs(best[1] - target):
            best = (mid, f_mid)
        if abs(f_mid - target) <= tol / 20:
            break
        if f_mid > target:
            lo = mid
        else:
            hi = mid
    return best if abs(best[1] - target) <= tol else None


def calibrate(
    scene: Scene,
    target_means=(0.24, 0.18),
    tolerance: float = 0.02,
    seed: int = 0,
    trials: int = 500,
    base: AgentModel | None = None,
    sigma_max: float = 0.1,
    bias_max: float = 0.1,
) -> AgentModel:
    """
    Fit channel parameters so the simulated condition means hit ``target_means``.

    Coordinate bisection: the MAGIC perception sigma is fitted first;
    the Veridical channel then gets the same sigma and its depth bias is
    fitted. Motor jitter, dropout and samples come from ``base``. If the
    MAGIC target is above what ``base`` motor jitter allows, the
    all-zero (exact) channel is tried instead. All evaluations reuse the
    same ``trials`` seeded trials per condition.

    Raises
    ------
    CalibrationFailed
    """
    j_magic, j_ver = target_means
    if not (0 < j_magic <= 1 and 0 < j_ver <= 1):
        raise ValueError("target means must lie in (0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = AgentModel() if base is None else base

    def prepare(agents):
        plan = schedule(trials, seed)
        return {
            c: [_prepare(scene, s, t, c, agents, ts) for cc, s, t, ts in plan if cc == c]
            for c in CONDITIONS
        }

    prepared = prepare(base)

    def f_magic(sigma):
        return _mean_j(prepared[MAGIC], replace(base, perception_sigma_magic=sigma))

    if f_magic(0.0) < j_magic - tolerance:
        exact = AgentModel.noiseless(base.samples_per_outline)
        exact_prep = prepare(exact)
        means = (_mean_j(exact_prep[MAGIC], exact), _mean_j(exact_prep[VERIDICAL], exact))
        if abs(means[0] - j_magic) <= tolerance and abs(means[1] - j_ver) <= tolerance:
            return exact
        raise CalibrationFailed(f"MAGIC target {j_magic} above the exact-channel mean {means[0]:.3f}")

    fit = _bisect(f_magic, 0.0, sigma_max, j_magic, tolerance)
    if fit is None:
        raise CalibrationFailed(f"no MAGIC perception sigma in [0, {sigma_max}] gives mean J {j_magic}")
    sigma = fit[0]
    agents = replace(base, perception_sigma_magic=sigma, perception_sigma_veridical=sigma)

    def f_ver(bias):
        return _mean_j(prepared[VERIDICAL], replace(agents, depth_bias_veridical=bias))

    fit = _bisect(f_ver, 0.0, bias_max, j_ver, tolerance)
    if fit is None:
        raise CalibrationFailed(
            f"no Veridical depth bias in [0, {bias_max}] gives mean J {j_ver} with perception sigma {sigma:.4f}"
        )
    return replace(agents, depth_bias_veridical=fit[0])


def agent_to_dict(agents: AgentModel) -> dict:
    return asdict(agents)
