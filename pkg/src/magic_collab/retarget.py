"""
retarget.py
-----------

Turn a remote user's pose, captured while sharing the local user's
viewpoint, into the avatar the local user sees across the table:
mirror it, slide it along the forward axis so the pointing hand can
reach, and re-solve the arm so the fingertip lands exactly where the
remote user is pointing in the shared workspace.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import PlaneSpec, as_vec3, reflect_direction, reflect_point
from .kinematics import ArmChain, BodyPose, fabrik_solve, reach


class UnreachableTarget(ValueError):
    """The pointed-at location is beyond the avatar's arm after placement."""

    def __init__(self, residual: float, side: str = ""):
        self.residual = float(residual)
        self.side = side
        super().__init__(f"{side} fingertip target {self.residual:.4f} m beyond reach")


@dataclass(frozen=True)
class WorkspaceFrame:
    """
    Shared table frame.

    ``table_center`` is the centre of the table top. Local coordinates are
    (lateral, vertical, forward) with lateral = up x forward. The pointing
    workspace is the box over the table top up to ``workspace_height``.
    """

    table_center: np.ndarray = (0.0, 0.75, 0.0)
    table_size: tuple = (1.0, 0.8, 0.75)
    forward: np.ndarray = (0.0, 0.0, 1.0)
    up: np.ndarray = (0.0, 1.0, 0.0)
    workspace_height: float = 0.6

    def __post_init__(self):
        for name in ("table_center", "forward", "up"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        object.__setattr__(self, "table_size", tuple(float(x) for x in self.table_size))
        if any(x <= 0 for x in self.table_size):
            raise ValueError("table dimensions must be positive")
        for name in ("forward", "up"):
            if abs(np.linalg.norm(getattr(self, name)) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a unit vector")
        if abs(self.forward @ self.up) > 1e-9:
            raise ValueError("forward and up must be perpendicular")
        if self.workspace_height <= 0:
            raise ValueError("workspace_height must be positive")

    @property
    def lateral(self) -> np.ndarray:
        return np.cross(self.up, self.forward)

    @property
    def half_depth(self) -> float:
        return self.table_size[1] / 2.0

    def to_local(self, p) -> np.ndarray:
        """(lateral, vertical, forward) offsets from the table-top centre."""
        rel = np.asarray(p, dtype=np.float64) - self.table_center
        return np.stack([rel @ self.lateral, rel @ self.up, rel @ self.forward], axis=-1)

    def from_local(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        return (
            self.table_center
            + np.multiply.outer(q[..., 0], self.lateral)
            + np.multiply.outer(q[..., 1], self.up)
            + np.multiply.outer(q[..., 2], self.forward)
        )

    def workspace_bounds(self):
        w, d, _ = self.table_size
        lo = np.array([-w / 2, 0.0, -d / 2])
        hi = np.array([w / 2, self.workspace_height, d / 2])
        return lo, hi

    def in_workspace(self, p):
        lo, hi = self.workspace_bounds()
        q = self.to_local(p)
        return np.all((q >= lo) & (q <= hi), axis=-1)


@dataclass(frozen=True)
class MirrorSpec:
    plane: PlaneSpec

    @classmethod
    def from_frame(cls, frame: WorkspaceFrame) -> "MirrorSpec":
        """Vertical plane through the table centre, normal to the forward axis."""
        return cls(PlaneSpec(frame.table_center, frame.forward))


@dataclass(frozen=True)
class AvatarPlacement:
    """
    Linear map from the pointing fingertip's forward coordinate to the
    avatar root's forward coordinate: ``root = m * fingertip + b``
    (both measured along ``forward`` from the table centre).
    """

    m: float
    b: float
    default_stance: np.ndarray
    reach_budget: float

    def __post_init__(self):
        object.__setattr__(self, "default_stance", as_vec3(self.default_stance))
        if not (np.isfinite(self.m) and np.isfinite(self.b)):
            raise ValueError("placement coefficients must be finite")


@dataclass(frozen=True)
class CorrectionVector:
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", as_vec3(self.t))


def fit_placement(
    frame: WorkspaceFrame,
    default_stance,
    shoulder_height: float,
    arm_reach: float,
    budget_fraction: float = 0.9,
    shoulder_forward_offset: float = 0.0,
) -> AvatarPlacement:
    """
    Solve ``m`` and ``b`` from the two table edges.

    A fingertip on the avatar's own table edge leaves the avatar at
    ``default_stance``. A fingertip on the opposite edge (at table-top
    height, straight ahead of the shoulder) moves the avatar forward
    until that edge point is ``budget_fraction * arm_reach`` from the
    shoulder. ``shoulder_height`` is measured from the root along ``up``;
    ``shoulder_forward_offset`` is how far the shoulder sits ahead of the
    root, toward the table.
    """
    stance = as_vec3(default_stance)
    budget = budget_fraction * arm_reach
    f_default = float(frame.to_local(stance)[2])
    side = 1.0 if f_default >= 0 else -1.0
    near_edge = side * frame.half_depth
    far_edge = -near_edge

    shoulder_above_top = float(frame.to_local(stance)[1]) + shoulder_height
    gap = np.sqrt(max(budget**2 - shoulder_above_top**2, 0.0))
    f_advanced = far_edge + side * gap + side * shoulder_forward_offset
    if side * (f_advanced - f_default) > 0:
        f_advanced = f_default

    m = (f_default - f_advanced) / (near_edge - far_edge)
    b = f_default - m * near_edge
    return AvatarPlacement(float(m), float(b), stance, float(budget))


def placement_for_pose(frame: WorkspaceFrame, remote_pose_local: BodyPose, **kwargs) -> AvatarPlacement:
    """Placement whose default stance is where the mirrored remote pose stands."""
    mirrored = mirror_pose(remote_pose_local, MirrorSpec.from_frame(frame))
    arm = mirrored.right_arm
    shoulder_height = float((arm.shoulder - mirrored.root) @ frame.up)
    kwargs.setdefault("shoulder_forward_offset", float((arm.shoulder - mirrored.root) @ mirrored.facing))
    return fit_placement(frame, mirrored.root, shoulder_height, reach(arm), **kwargs)


def _reflect_chain(chain: ArmChain, plane: PlaneSpec) -> ArmChain:
    return ArmChain(reflect_point(chain.joints, plane), chain.bone_lengths)


def mirror_pose(pose: BodyPose, spec: MirrorSpec) -> BodyPose:
    """
    Reflect every joint across the mirror plane.

    Reflection turns the skeleton's right side into a left side, so the
    reflected right arm becomes the avatar's left arm and vice versa.
    """
    plane = spec.plane
    return BodyPose(
        root=reflect_point(pose.root, plane),
        head=reflect_point(pose.head, plane),
        left_arm=_reflect_chain(pose.right_arm, plane),
        right_arm=_reflect_chain(pose.left_arm, plane),
        facing=reflect_direction(pose.facing, plane),
        up=reflect_direction(pose.up, plane),
    )


def compute_correction(p_f_local, p_f_mirrored) -> CorrectionVector:
    return CorrectionVector(as_vec3(p_f_local) - as_vec3(p_f_mirrored))


def place_avatar(p_f, frame: WorkspaceFrame, placement: AvatarPlacement) -> np.ndarray:
    """New avatar root for a pointing fingertip at ``p_f``; moves along forward only."""
    f = float(np.clip(frame.to_local(as_vec3(p_f))[2], -frame.half_depth, frame.half_depth))
    root_f = placement.m * f + placement.b
    f_default = float(frame.to_local(placement.default_stance)[2])
    return placement.default_stance + (root_f - f_default) * frame.forward


# remote arm name -> avatar arm name after the mirror swaps handedness
_MIRRORED_SIDE = {"right": "left", "left": "right"}


def retarget_pose(
    remote_pose_local: BodyPose,
    frame: WorkspaceFrame,
    placement: AvatarPlacement,
    tol: float = 1e-6,
) -> BodyPose:
    """
    Manipulated avatar for one tracked frame of the remote user.

    Hands outside the workspace box are only mirrored. For every hand
    inside it, the mirrored avatar is slid along the forward axis by
    :func:`place_avatar` and that arm is re-solved so its fingertip sits
    at the remote user's fingertip position in the shared workspace.

    Raises
    ------
    UnreachableTarget
      A workspace fingertip is still out of reach after placement.
    """
    mirrored = mirror_pose(remote_pose_local, MirrorSpec.from_frame(frame))
    remote_arms = remote_pose_local.arms()
    active = {side: arm.fingertip for side, arm in remote_arms.items() if frame.in_workspace(arm.fingertip)}
    if not active:
        return mirrored

    # the hand needing the largest advance drives the placement
    forward_sign = 1.0 if frame.to_local(placement.default_stance)[2] >= 0 else -1.0
    roots = [place_avatar(q, frame, placement) for q in active.values()]
    root = min(roots, key=lambda r: forward_sign * float(r @ frame.forward))
    delta = float((root - mirrored.root) @ frame.forward)
    avatar = mirrored.translated(delta * frame.forward)

    avatar_right = np.cross(avatar.facing, avatar.up)
    arms = {"left": avatar.left_arm, "right": avatar.right_arm}
    for side, q in active.items():
        avatar_side = _MIRRORED_SIDE[side]
        arm = arms[avatar_side]
        t = compute_correction(q, arm.fingertip).t
        target = arm.fingertip + t
        excess = float(np.linalg.norm(target - arm.shoulder)) - reach(arm)
        if excess > 0:
            raise UnreachableTarget(excess, side)
        hint = avatar_right if avatar_side == "right" else -avatar_right
        arms[avatar_side] = fabrik_solve(arm, target, tol=tol, bend_hint=hint)
    return replace(avatar, left_arm=arms["left"], right_arm=arms["right"])


def pointing_arm(remote_pose_local: BodyPose, frame: WorkspaceFrame):
    """Name of the remote arm whose fingertip is in the workspace (right preferred), or None."""
    for side in ("right", "left"):
        if frame.in_workspace(remote_pose_local.arms()[side].fingertip):
            return side
    return None


def avatar_fingertip(avatar: BodyPose, remote_side: str) -> np.ndarray:
    """Avatar fingertip that corresponds to the remote user's ``remote_side`` hand."""
    return avatar.arms()[_MIRRORED_SIDE[remote_side]].fingertip


__all__ = [
    "AvatarPlacement",
    "CorrectionVector",
    "MirrorSpec",
    "UnreachableTarget",
    "WorkspaceFrame",
    "avatar_fingertip",
    "compute_correction",
    "fit_placement",
    "mirror_pose",
    "place_avatar",
    "placement_for_pose",
    "pointing_arm",
    "retarget_pose",
]
