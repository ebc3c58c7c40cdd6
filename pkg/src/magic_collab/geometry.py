"""
geometry.py
-----------

3D primitives shared by the rest of the package: points are plain
``(3,)`` float arrays, meshes are indexed triangle lists.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UNIT_TOL = 1e-9


class OpenMeshError(ValueError):
    """Raised when a closed mesh is required but edges are unmatched."""


def as_vec3(p) -> np.ndarray:
    """Coerce ``p`` to a finite ``(3,)`` float64 array."""
    v = np.asarray(p, dtype=np.float64).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"expected 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class PlaneSpec:
    """Plane through ``point`` with unit ``normal``."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vec3(self.point))
        normal = as_vec3(self.normal)
        if abs(np.linalg.norm(normal) - 1.0) > UNIT_TOL:
            raise ValueError(f"plane normal must be unit length, got |n|={np.linalg.norm(normal)}")
        object.__setattr__(self, "normal", normal)

    def signed_distance(self, p) -> np.ndarray:
        return (np.asarray(p, dtype=np.float64) - self.point) @ self.normal


def reflect_point(p, plane: PlaneSpec) -> np.ndarray:
    """Mirror image of ``p`` (or an ``(n, 3)`` array of points) across ``plane``."""
    if abs(np.linalg.norm(plane.normal) - 1.0) > UNIT_TOL:
        raise ValueError("plane normal must be unit length")
    p = np.asarray(p, dtype=np.float64)
    d = (p - plane.point) @ plane.normal
    return p - 2.0 * np.multiply.outer(d, plane.normal)


def reflect_direction(v, plane: PlaneSpec) -> np.ndarray:
    """Reflect a free vector (no translation part) across ``plane``."""
    v = np.asarray(v, dtype=np.float64)
    return v - 2.0 * np.multiply.outer(v @ plane.normal, plane.normal)


def signed_origin_tetra_volume(a, b, c) -> float:
    """
    Signed volume of the tetrahedron ``(origin, a, b, c)``.

    Positive when ``a, b, c`` wind counter-clockwise seen from the
    side opposite the origin.
    """
    a, b, c = (np.asarray(x, dtype=np.float64) for x in (a, b, c))
    return float(np.dot(a, np.cross(b, c)) / 6.0)


@dataclass(frozen=True)
class TriMesh:
    """Indexed triangle mesh. ``triangles`` rows are vertex indices."""

    vertices: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise ValueError("triangle index out of range")
        verts.flags.writeable = False
        tris.flags.writeable = False
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    @property
    def is_closed(self) -> bool:
        return is_closed(self)

    @property
    def volume(self) -> float:
        return mesh_volume(self)


def is_closed(mesh: TriMesh) -> bool:
    """
    True when every directed edge ``(u, v)`` occurs exactly once and is
    matched by exactly one ``(v, u)``: a closed, consistently wound surface.

    Uses index comparison only. An empty mesh counts as closed.
    """
    tris = mesh.triangles
    if len(tris) == 0:
        return True
    if np.any(tris[:, 0] == tris[:, 1]) or np.any(tris[:, 1] == tris[:, 2]) or np.any(tris[:, 0] == tris[:, 2]):
        return False
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    directed = {tuple(e) for e in edges.tolist()}
    if len(directed) != len(edges):
        return False
    return all((v, u) in directed for u, v in directed)


def mesh_volume(mesh: TriMesh) -> float:
    """
    Enclosed volume of a closed mesh, as the sum of signed tetrahedra
    formed by each triangle and the origin. Returned as an absolute value.

    For a closed surface the sum does not depend on where the origin is,
    so it is taken at the first vertex; this keeps small meshes far from
    the coordinate origin free of cancellation error.
    """
    if not is_closed(mesh):
        raise OpenMeshError("mesh is not closed: every edge must be shared by exactly two triangles")
    if mesh.is_empty:
        return 0.0
    v = mesh.vertices - mesh.vertices[0]
    t = mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    vols = np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0
    return abs(float(vols.sum()))


def box_mesh(lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> TriMesh:
    """Axis-aligned box with outward counter-clockwise winding."""
    lo = as_vec3(lo)
    hi = as_vec3(hi)
    corners = np.array([[hi[i] if (k >> i) & 1 else lo[i] for i in range(3)] for k in range(8)])
    quads = [
        (0, 2, 3, 1),  # -z
        (4, 5, 7, 6),  # +z
        (0, 1, 5, 4),  # -y
        (2, 6, 7, 3),  # +y
        (0, 4, 6, 2),  # -x
        (1, 3, 7, 5),  # +x
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return TriMesh(corners, np.array(tris))


def transform_mesh(mesh: TriMesh, rotation=None, translation=None, scale: float = 1.0) -> TriMesh:
    v = mesh.vertices * scale
    if rotation is not None:
        v = v @ np.asarray(rotation, dtype=np.float64).T
    if translation is not None:
        v = v + as_vec3(translation)
    return TriMesh(v, mesh.triangles)
