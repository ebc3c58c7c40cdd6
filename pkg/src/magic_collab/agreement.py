"""
agreement.py
------------

Pointing Agreement: the volumetric Jaccard index between the convex
solids outlined by a Demonstrator and an Interpreter.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import mesh_volume
from .hull import ConvexHull, DegenerateOutline, convex_hull, intersect_convex


@dataclass(frozen=True)
class OutlineTrace:
    """Fingertip samples recorded while the outline button is held."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64).reshape(-1)
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if len(t) != len(p):
            raise ValueError("times and points differ in length")
        if len(t) < 1:
            raise ValueError("an outline needs at least one sample")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise ValueError("non-finite sample")
        t.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @classmethod
    def from_points(cls, points, dt: float = 0.02, t0: float = 0.0) -> "OutlineTrace":
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return cls(t0 + dt * np.arange(len(p)), p)

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class AgreementResult:
    j: float
    v_dem: float
    v_int: float
    v_overlap: float
    degenerate_dem: bool = False
    degenerate_int: bool = False

    @property
    def v_union(self) -> float:
        return self.v_dem + self.v_int - self.v_overlap


def outline_hull(trace: OutlineTrace) -> ConvexHull:
    """Convex solid spanned by every sample of the outline."""
    return convex_hull(trace.points)


def jaccard_from_volumes(v_a: float, v_b: float, v_overlap: float) -> float:
    union = v_a + v_b - v_overlap
    if union <= 0.0:
        return 0.0
    return float(min(max(v_overlap / union, 0.0), 1.0))


def hull_agreement(dem: ConvexHull, int_: ConvexHull) -> AgreementResult:
    v_dem = dem.volume
    v_int = int_.volume
    v_i = mesh_volume(intersect_convex(int_, dem))
    v_i = min(v_i, v_dem, v_int)
    return AgreementResult(jaccard_from_volumes(v_int, v_dem, v_i), v_dem, v_int, v_i)


def pointing_agreement(dem: OutlineTrace, int_: OutlineTrace) -> AgreementResult:
    """
    Jaccard index ``V_I / (V_int + V_dem - V_I)`` of the two outlined solids.

    A degenerate outline (fewer than four samples or flat) scores 0 and
    sets the matching flag instead of raising.
    """
    hulls = []
    flags = []
    for trace in (dem, int_):
        try:
            hulls.append(outline_hull(trace))
            flags.append(False)
        except DegenerateOutline:
            hulls.append(None)
            flags.append(True)
    if any(flags):
        v_dem = hulls[0].volume if hulls[0] is not None else 0.0
        v_int = hulls[1].volume if hulls[1] is not None else 0.0
        return AgreementResult(0.0, v_dem, v_int, 0.0, flags[0], flags[1])
    return hull_agreement(hulls[0], hulls[1])
