"""
Retargeting walkthrough.

A remote collaborator stands at the near edge of a shared table and
points at spots in the workspace. Their avatar is mirrored to the far
side and its arm is re-solved so the fingertip lands exactly where the
remote fingertip is, as seen by the local user.

    python3 demos/retarget_walkthrough.py
"""
from dataclasses import replace

import numpy as np

from magic_collab.kinematics import fabrik_solve, standing_pose
from magic_collab.retarget import (
    AvatarPlacement,
    MirrorSpec,
    UnreachableTarget,
    WorkspaceFrame,
    avatar_fingertip,
    mirror_pose,
    placement_for_pose,
    retarget_pose,
)

frame = WorkspaceFrame()
remote = standing_pose(frame.from_local([0.0, -0.75, -0.45]), frame.forward)
placement = placement_for_pose(frame, remote)
mirror = MirrorSpec.from_frame(frame)

print("placement: f_avatar = %.3f * f_target + %.3f, reach budget %.3f m" % (placement.m, placement.b, placement.reach_budget))
print()
print("distances are to the remote fingertip, as the local user sees it")
print(f"{'target (local x, y, z)':>24}  {'remote miss':>11}  {'mirror only':>11}  {'retargeted':>10}  {'avatar z':>8}")

targets = [[0.0, 0.15, -0.25], [0.15, 0.25, -0.05], [-0.2, 0.1, 0.1], [0.05, 0.3, 0.2], [0.1, 0.05, 0.3]]
for local in targets:
    q = frame.from_local(local)
    arm = fabrik_solve(remote.right_arm, q, tol=1e-9)
    pose = replace(remote, right_arm=arm)
    # mirroring alone puts the avatar fingertip at the reflected point
    naive = mirror_pose(pose, mirror).left_arm.fingertip
    avatar = retarget_pose(pose, frame, placement)
    tip = avatar_fingertip(avatar, "right")
    print(
        f"{str(np.round(local, 2)):>24}  {np.linalg.norm(arm.fingertip - q):9.3f} m  "
        f"{np.linalg.norm(naive - arm.fingertip):9.3f} m  {np.linalg.norm(tip - arm.fingertip):8.1e} m  "
        f"{frame.to_local(avatar.root)[2]:6.3f} m"
    )

print()
far = AvatarPlacement(0.0, 3.0, frame.from_local([0.0, -0.75, 3.0]), placement.reach_budget)
pose = replace(remote, right_arm=fabrik_solve(remote.right_arm, frame.from_local([0.1, 0.2, 0.0])))
try:
    retarget_pose(pose, frame, far)
except UnreachableTarget as exc:
    print(f"avatar parked 3 m back: {exc.side} hand misses by {exc.residual:.3f} m")
