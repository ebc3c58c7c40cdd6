"""
kinematics.py
-------------

Arm chains, body poses and a FABRIK solver for the pointing arm.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import as_vec3, unit

UP = np.array([0.0, 1.0, 0.0])
BONE_TOL = 1e-6
DEFAULT_BONES = (0.30, 0.27, 0.18)


@dataclass(frozen=True)
class ArmChain:
    """
    Shoulder, elbow, wrist and fingertip positions.

    ``bone_lengths`` are measured from ``joints`` when omitted and carried
    unchanged through every solve.
    """

    joints: np.ndarray
    bone_lengths: np.ndarray = None

    def __post_init__(self):
        j = np.array(self.joints, dtype=np.float64).reshape(4, 3)
        if not np.all(np.isfinite(j)):
            raise ValueError("non-finite joint position")
        if self.bone_lengths is None:
            lengths = np.linalg.norm(np.diff(j, axis=0), axis=1)
        else:
            lengths = np.array(self.bone_lengths, dtype=np.float64).reshape(3)
        if np.any(lengths <= 0):
            raise ValueError(f"bone lengths must be positive, got {lengths}")
        j.flags.writeable = False
        lengths.flags.writeable = False
        object.__setattr__(self, "joints", j)
        object.__setattr__(self, "bone_lengths", lengths)

    @property
    def shoulder(self) -> np.ndarray:
        return self.joints[0]

    @property
    def fingertip(self) -> np.ndarray:
        return self.joints[3]

    def translated(self, offset) -> "ArmChain":
        return ArmChain(self.joints + as_vec3(offset), self.bone_lengths)

    @classmethod
    def straight(cls, shoulder, direction, bones=DEFAULT_BONES) -> "ArmChain":
        """Fully extended chain from ``shoulder`` along ``direction``."""
        s = as_vec3(shoulder)
        u = unit(as_vec3(direction))
        offsets = np.concatenate([[0.0], np.cumsum(bones)])
        return cls(s + np.outer(offsets, u), np.asarray(bones, dtype=np.float64))


def reach(chain: ArmChain) -> float:
    """Total length of the chain."""
    return float(np.sum(chain.bone_lengths))


@dataclass(frozen=True)
class BodyPose:
    root: np.ndarray
    head: np.ndarray
    left_arm: ArmChain
    right_arm: ArmChain
    facing: np.ndarray
    up: np.ndarray = field(default_factory=lambda: UP.copy())

    def __post_init__(self):
        for name in ("root", "head", "facing", "up"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        if abs(np.linalg.norm(self.facing) - 1.0) > 1e-9:
            raise ValueError("facing must be a unit vector")
        if (self.head - self.root) @ self.up <= 0:
            raise ValueError("head must be above root")

    def translated(self, offset) -> "BodyPose":
        o = as_vec3(offset)
        return replace(
            self,
            root=self.root + o,
            head=self.head + o,
            left_arm=self.left_arm.translated(o),
            right_arm=self.right_arm.translated(o),
        )

    def arms(self):
        return {"left": self.left_arm, "right": self.right_arm}


def standing_pose(
    root,
    facing,
    up=UP,
    height: float = 1.70,
    shoulder_height: float = 1.40,
    shoulder_width: float = 0.38,
    bones=DEFAULT_BONES,
) -> BodyPose:
    """Upright pose with both arms hanging straight down."""
    root = as_vec3(root)
    facing = unit(as_vec3(facing))
    up = unit(as_vec3(up))
    right = np.cross(facing, up)
    arms = []
    for side in (-1.0, 1.0):
        shoulder = root + up * shoulder_height + right * side * shoulder_width / 2
        arms.append(ArmChain.straight(shoulder, -up, bones))
    return BodyPose(root, root + up * height, arms[0], arms[1], facing, up)


def _limit_cone(direction, axis, max_angle):
    # rotate `direction` toward `axis` until within `max_angle` of it
    cos_a = float(np.clip(direction @ axis, -1.0, 1.0))
    angle = np.arccos(cos_a)
    if angle <= max_angle:
        return direction
    perp = direction - cos_a * axis
    n = np.linalg.norm(perp)
    if n < 1e-12:
        perp = _any_perpendicular(axis)
    else:
        perp = perp / n
    return np.cos(max_angle) * axis + np.sin(max_angle) * perp


def _direction(v, fallback):
    n = np.linalg.norm(v)
    return v / n if n > 0.0 else fallback


def _any_perpendicular(v):
    a = np.eye(3)[int(np.argmin(np.abs(v)))]
    p = np.cross(v, a)
    return p / np.linalg.norm(p)


def _seed_bend(joints, lengths, target, hint):
    # collinear start: nudge the elbow sideways so the passes can bend it
    s = joints[0]
    axis = unit(target - s)
    if hint is None:
        side = _any_perpendicular(axis)
    else:
        side = np.asarray(hint, dtype=np.float64) - (np.asarray(hint) @ axis) * axis
        side = _any_perpendicular(axis) if np.linalg.norm(side) < 1e-9 else unit(side)
    out = joints.copy()
    out[1] = s + lengths[0] * unit(axis + 0.5 * side)
    out[2] = out[1] + lengths[1] * axis
    out[3] = out[2] + lengths[2] * axis
    return out


def _circle_point(a, b, ra, rb, near):
    """Point at distance ``ra`` from ``a`` and ``rb`` from ``b``, closest to ``near``."""
    d_vec = b - a
    d = np.linalg.norm(d_vec)
    if d == 0.0 or d > ra + rb or d < abs(ra - rb):
        return None
    u = d_vec / d
    along = (ra * ra - rb * rb + d * d) / (2.0 * d)
    r = np.sqrt(max(ra * ra - along * along, 0.0))
    c = a + along * u
    v = (near - c) - ((near - c) @ u) * u
    nv = np.linalg.norm(v)
    if nv < 1e-12:
        if r > 1e-12:
            return None
        return c
    return c + r * v / nv


def _close_on_target(joints, lengths, target):
    # put the fingertip exactly on target, moving as little as possible:
    # first try the wrist alone, then the elbow with the hand direction kept
    w = _circle_point(joints[1], target, lengths[1], lengths[2], joints[2])
    if w is not None:
        out = joints.copy()
        out[2] = w
        out[3] = target
        return out
    out = joints.copy()
    out[3] = target
    hand = _direction(joints[3] - joints[2], None)
    if hand is not None:
        w = target - lengths[2] * hand
        e = _circle_point(joints[0], w, lengths[0], lengths[1], joints[1])
        if e is not None:
            out[1] = e
            out[2] = w
            return out
    # near full extension: pull the elbow until the wrist circle exists
    slack = lengths.sum() - np.linalg.norm(target - joints[0])
    l2, l3 = lengths[1], lengths[2]
    rho = np.clip(np.linalg.norm(target - joints[1]), abs(l2 - l3), l2 + l3 - 0.5 * slack)
    e = _circle_point(joints[0], target, lengths[0], rho, joints[1])
    if e is None:
        return None
    w = _circle_point(e, target, l2, l3, joints[2])
    if w is None:
        return None
    out[1] = e
    out[2] = w
    return out


def fabrik_solve(
    chain: ArmChain,
    target,
    tol: float = 1e-3,
    max_iter: int = 100,
    bend_hint=None,
    max_bend=None,
    full_output: bool = False,
):
    """
    Move the chain so the fingertip reaches ``target``, shoulder fixed.

    Parameters
    ----------
    chain : ArmChain
      Starting configuration.
    target : (3,) float
      Desired fingertip position.
    tol : float
      Stop once the fingertip is within this distance of the target.
    max_iter : int
      Maximum number of backward/forward pass pairs.
    bend_hint : (3,) float or None
      Direction the elbow is pushed toward when the start pose is
      collinear with the target.
    max_bend : (float, float) or None
      Optional cone limits in radians at elbow and wrist.
    full_output : bool
      Also return the number of iterations used.

    Returns
    -------
    chain : ArmChain
    iterations : int
      Only when ``full_output`` is set.

    Notes
    -----
    Targets beyond reach give the straightened chain pointing at the
    target. Reachable solves end with an analytic wrist placement that
    puts the fingertip on the target to rounding error whenever the
    converged elbow allows it.
    """
    t = np.asarray(target, dtype=np.float64).reshape(-1)
    if t.shape != (3,) or not np.all(np.isfinite(t)):
        raise ValueError(f"target must be a finite 3-vector, got {target!r}")
    lengths = chain.bone_lengths
    joints = chain.joints.copy()
    s = joints[0].copy()

    def done(result, n):
        return (result, n) if full_output else result

    if np.linalg.norm(joints[3] - t) <= tol:
        return done(chain, 0)

    to_target = t - s
    dist = float(np.linalg.norm(to_target))
    total = float(lengths.sum())
    if dist >= total:
        u = to_target / dist
        offsets = np.concatenate([[0.0], np.cumsum(lengths)])
        return done(ArmChain(s + np.outer(offsets, u), lengths), 0)

    rel = joints[1:] - s
    axis = to_target / dist if dist > 0 else UP
    perp = rel - np.outer(rel @ axis, axis)
    if np.max(np.linalg.norm(perp, axis=1)) < 1e-9:
        joints = _seed_bend(joints, lengths, t, bend_hint)

    n = 0
    for n in range(1, max_iter + 1):
        # backward: tip to target, walk toward the shoulder
        joints[3] = t
        for i in (2, 1, 0):
            joints[i] = joints[i + 1] + lengths[i] * _direction(joints[i] - joints[i + 1], -axis)
        # forward: shoulder back in place, walk toward the tip
        joints[0] = s
        prev_dir = None
        for i in range(3):
            direction = _direction(joints[i + 1] - joints[i], axis)
            if max_bend is not None and prev_dir is not None and max_bend[i - 1] is not None:
                direction = _limit_cone(direction, prev_dir, max_bend[i - 1])
            joints[i + 1] = joints[i] + lengths[i] * direction
            prev_dir = direction
        if np.linalg.norm(joints[3] - t) <= tol:
            break

    if max_bend is None:
        closed = _close_on_target(joints, lengths, t)
        if closed is not None:
            drift = np.abs(np.linalg.norm(np.diff(closed, axis=0), axis=1) - lengths).max()
            if drift <= 1e-9:
                joints = closed
    return done(ArmChain(joints, lengths), n)
