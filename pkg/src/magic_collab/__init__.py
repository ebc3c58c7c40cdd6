"""
magic_collab
============

Pointing-gesture retargeting for face-to-face mixed-reality
collaboration, the volumetric agreement metric used to evaluate it, and
a simulated two-person outlining experiment.
"""
from .agreement import AgreementResult, OutlineTrace, pointing_agreement
from .geometry import OpenMeshError, PlaneSpec, TriMesh, mesh_volume, reflect_point
from .hull import ConvexHull, DegenerateOutline, convex_hull, intersect_convex
from .kinematics import ArmChain, BodyPose, fabrik_solve, standing_pose
from .retarget import (
    AvatarPlacement,
    MirrorSpec,
    UnreachableTarget,
    WorkspaceFrame,
    compute_correction,
    mirror_pose,
    place_avatar,
    retarget_pose,
)
from .sim import (
    AgentModel,
    CalibrationFailed,
    Scene,
    TrialRecord,
    calibrate,
    generate_scene,
    run_experiment,
    simulate_trial,
)

__all__ = [
    "AgreementResult",
    "OutlineTrace",
    "pointing_agreement",
    "OpenMeshError",
    "PlaneSpec",
    "TriMesh",
    "mesh_volume",
    "reflect_point",
    "ConvexHull",
    "DegenerateOutline",
    "convex_hull",
    "intersect_convex",
    "ArmChain",
    "BodyPose",
    "fabrik_solve",
    "standing_pose",
    "AvatarPlacement",
    "MirrorSpec",
    "UnreachableTarget",
    "WorkspaceFrame",
    "compute_correction",
    "mirror_pose",
    "place_avatar",
    "retarget_pose",
    "AgentModel",
    "CalibrationFailed",
    "Scene",
    "TrialRecord",
    "calibrate",
    "generate_scene",
    "run_experiment",
    "simulate_trial",
]

__version__ = "0.1.0"
