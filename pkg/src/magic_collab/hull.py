"""
hull.py
-------

3D convex hulls (QuickHull) and intersection of two convex hulls by
half-space clipping.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TriMesh, mesh_volume

# plane-side classification for clipping
CLIP_EPS = 1e-9
# intersections smaller than this are reported empty
SLIVER_VOLUME = 1e-12
# input is coplanar / collinear below this distance
DEGENERATE_TOL = 1e-9


class DegenerateOutline(ValueError):
    """Fewer than four points, or all points (nearly) coplanar."""


@dataclass(frozen=True)
class ConvexHull:
    """
    Closed, outward-wound hull mesh plus per-face planes.

    ``normals[i] . x <= offsets[i]`` for every point inside face ``i``.
    """

    mesh: TriMesh
    source_point_count: int
    normals: np.ndarray
    offsets: np.ndarray
    vertex_indices: np.ndarray  # hull vertices as indices into the source points

    @property
    def vertices(self) -> np.ndarray:
        return self.mesh.vertices

    @property
    def volume(self) -> float:
        return mesh_volume(self.mesh)

    @property
    def centroid(self) -> np.ndarray:
        return self.mesh.vertices.mean(axis=0)


def _face_plane(p, a, b, c):
    n = np.cross(p[b] - p[a], p[c] - p[a])
    norm = np.linalg.norm(n)
    if norm == 0.0:
        return np.zeros(3), 0.0
    n = n / norm
    return n, float(n @ p[a])


def _initial_simplex(p: np.ndarray, tol: float):
    # extremes along the axes; argmin/argmax break ties by lowest index
    extremes = []
    for axis in range(3):
        extremes.append(int(np.argmin(p[:, axis])))
        extremes.append(int(np.argmax(p[:, axis])))
    best = (-1.0, 0, 0)
    for i in range(len(extremes)):
        for j in range(i + 1, len(extremes)):
            d = float(np.linalg.norm(p[extremes[i]] - p[extremes[j]]))
            if d > best[0]:
                best = (d, extremes[i], extremes[j])
    _, i0, i1 = best
    if best[0] <= tol:
        raise DegenerateOutline("all points coincide")

    line = (p[i1] - p[i0]) / best[0]
    rel = p - p[i0]
    perp = rel - np.outer(rel @ line, line)
    dist = np.linalg.norm(perp, axis=1)
    i2 = int(np.argmax(dist))
    if dist[i2] <= tol:
        raise DegenerateOutline("points are collinear")

    n = np.cross(p[i1] - p[i0], p[i2] - p[i0])
    n /= np.linalg.norm(n)
    plane_dist = (p - p[i0]) @ n
    i3 = int(np.argmax(np.abs(plane_dist)))
    if abs(plane_dist[i3]) <= tol:
        raise DegenerateOutline("points are coplanar")
    return i0, i1, i2, i3


def convex_hull(points) -> ConvexHull:
    """
    Convex hull of a 3D point set by QuickHull.

    Parameters
    ----------
    points : (n, 3) float
      Input points, n >= 4, not all coplanar.

    Returns
    -------
    hull : ConvexHull
      Triangulated hull whose vertices are a subset of ``points``.

    Raises
    ------
    DegenerateOutline
      Fewer than 4 points, or coplanar / collinear input.
    """
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(p) < 4:
        raise DegenerateOutline(f"need at least 4 points, got {len(p)}")
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite input point")

    idx = np.arange(len(p))
    tri, normals, offsets = _quickhull(p)
    # a point kept inside a flat face or along a straight edge is not a
    # corner; rebuild from the corners so hull(hull.vertices) == hull
    for _ in range(3):
        corners = _corner_vertices(tri, normals)
        if len(corners) == len(np.unique(tri)):
            break
        idx = idx[corners]
        tri, normals, offsets = _quickhull(p[idx])
    used = np.unique(tri)
    remap = np.full(len(idx), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    mesh = TriMesh(p[idx[used]], remap[tri])
    return ConvexHull(mesh, len(p), normals, offsets, idx[used])


def _corner_vertices(tri, normals, tol=1e-10):
    """Hull vertices whose incident face normals span all three directions."""
    corners = []
    for v in np.unique(tri):
        n = normals[np.any(tri == v, axis=1)]
        if len(n) >= 3 and np.linalg.svd(n, compute_uv=False)[-1] > tol:
            corners.append(v)
    return np.array(corners, dtype=np.int64)


def _quickhull(p):
    """Faces (indices into ``p``) and their planes."""
    i0, i1, i2, i3 = _initial_simplex(p, DEGENERATE_TOL)
    eps = 1e-10 * max(1.0, float(np.abs(p).max()))

    faces: dict[int, tuple[int, int, int]] = {}
    planes: dict[int, tuple[np.ndarray, float]] = {}
    outside: dict[int, np.ndarray] = {}
    edge_face: dict[tuple[int, int], int] = {}
    next_id = 0

    def add_face(a, b, c):
        nonlocal next_id
        fid = next_id
        next_id += 1
        faces[fid] = (a, b, c)
        planes[fid] = _face_plane(p, a, b, c)
        edge_face[(a, b)] = fid
        edge_face[(b, c)] = fid
        edge_face[(c, a)] = fid
        return fid

    def remove_face(fid):
        a, b, c = faces.pop(fid)
        planes.pop(fid)
        outside.pop(fid, None)
        for e in ((a, b), (b, c), (c, a)):
            if edge_face.get(e) == fid:
                del edge_face[e]

    # orient the simplex outward
    n, off = _face_plane(p, i0, i1, i2)
    if n @ p[i3] - off > 0:
        tet = [(i0, i2, i1), (i0, i1, i3), (i1, i2, i3), (i2, i0, i3)]
    else:
        tet = [(i0, i1, i2), (i0, i3, i1), (i1, i3, i2), (i2, i3, i0)]
    new_ids = [add_face(*f) for f in tet]

    def assign(candidates: np.ndarray, fids):
        if len(candidates) == 0 or not fids:
            return
        normals = np.array([planes[f][0] for f in fids])
        offs = np.array([planes[f][1] for f in fids])
        d = p[candidates] @ normals.T - offs
        best = np.argmax(d, axis=1)
        above = d[np.arange(len(candidates)), best] > eps
        for k, fid in enumerate(fids):
            sel = candidates[above & (best == k)]
            if len(sel):
                outside[fid] = sel

    rest = np.setdiff1d(np.arange(len(p)), [i0, i1, i2, i3])
    assign(rest, new_ids)

    while outside:
        fid = min(outside)
        pts = outside[fid]
        n, off = planes[fid]
        d = p[pts] @ n - off
        eye = int(pts[int(np.argmax(d))])
        eye_p = p[eye]

        # visible region, grown by adjacency from the seed face
        visible = {fid}
        stack = [fid]
        while stack:
            f = stack.pop()
            a, b, c = faces[f]
            for u, v in ((a, b), (b, c), (c, a)):
                g = edge_face[(v, u)]
                if g in visible:
                    continue
                gn, goff = planes[g]
                if gn @ eye_p - goff > eps:
                    visible.add(g)
                    stack.append(g)

        horizon = []
        for f in sorted(visible):
            a, b, c = faces[f]
            for u, v in ((a, b), (b, c), (c, a)):
                if edge_face[(v, u)] not in visible:
                    horizon.append((u, v))

        orphans = [outside[f] for f in sorted(visible) if f in outside]
        for f in visible:
            remove_face(f)
        created = [add_face(u, v, eye) for u, v in horizon]
        if orphans:
            cand = np.concatenate(orphans)
            cand = cand[cand != eye]
            assign(cand, created)

    order = sorted(faces)
    tri = np.array([faces[f] for f in order], dtype=np.int64)
    normals = np.array([planes[f][0] for f in order])
    offsets = np.array([planes[f][1] for f in order])
    return tri, normals, offsets


def hull_contains(h: ConvexHull, p, tol: float = 1e-9):
    """
    True iff ``p`` lies on the inner side of every face plane within ``tol``.
    Accepts a single point or an ``(n, 3)`` array.
    """
    p = np.asarray(p, dtype=np.float64)
    d = p @ h.normals.T - h.offsets
    return np.all(d <= tol, axis=-1)


def hull_edges(h: ConvexHull) -> np.ndarray:
    """Unique undirected edges of the hull mesh as ``(m, 2)`` vertex indices."""
    t = h.mesh.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def clip_segments(p0, p1, normals, offsets, eps: float = CLIP_EPS):
    """
    Clip segments ``p0[i] -> p1[i]`` against the half-spaces
    ``normals[k] . x <= offsets[k] + eps``.

    Returns the surviving sub-segment endpoints as two ``(m, 3)`` arrays.
    """
    s0 = p0 @ normals.T - offsets
    s1 = p1 @ normals.T - offsets

    def bounds(shift):
        a, b = s0 - shift, s1 - shift
        if shift == 0.0:
            # endpoints on a plane up to round-off count as on it; their
            # noisy signs would otherwise give an arbitrary crossing
            a = np.where(np.abs(a) <= eps, 0.0, a)
            b = np.where(np.abs(b) <= eps, 0.0, b)
        # crossing parameter, only used where the endpoints straddle the plane
        with np.errstate(divide="ignore", invalid="ignore"):
            t = a / (a - b)
        lo = np.max(np.where((a > 0) & (b <= 0), t, 0.0), axis=1, initial=0.0)
        hi = np.min(np.where((a <= 0) & (b > 0), t, 1.0), axis=1, initial=1.0)
        outside = np.any((a > 0) & (b > 0), axis=1)
        return lo, hi, outside

    # eps decides which segments survive; exact planes place the endpoints
    lo_loose, hi_loose, out_loose = bounds(eps)
    keep = (lo_loose <= hi_loose) & ~out_loose
    lo, hi, _ = bounds(0.0)
    # a segment that only grazes the region can give an inverted exact
    # interval; keep it inside the loose one, which is never empty here
    lo_loose, hi_loose = lo_loose[keep], hi_loose[keep]
    lo = np.clip(lo[keep], lo_loose, hi_loose)
    hi = np.clip(hi[keep], lo_loose, hi_loose)
    flip = lo > hi
    mid = 0.5 * (lo + hi)
    lo = np.where(flip, mid, lo)
    hi = np.where(flip, mid, hi)
    p0, d = p0[keep], (p1 - p0)[keep]
    return p0 + d * lo[:, None], p0 + d * hi[:, None]


def intersect_convex(a: ConvexHull, b: ConvexHull) -> TriMesh:
    """
    Intersection solid of two convex hulls.

    Every edge of each hull is clipped against the other hull's face
    half-spaces; the surviving endpoints are exactly the vertices of the
    intersection, which are re-hulled into a closed mesh. Returns an
    empty mesh when the hulls are disjoint or the overlap is a sliver.
    """
    if _separated(a, b) or _separated(b, a):
        return TriMesh()
    pts = []
    for h, other in ((a, b), (b, a)):
        e = hull_edges(h)
        v = h.mesh.vertices
        q0, q1 = clip_segments(v[e[:, 0]], v[e[:, 1]], other.normals, other.offsets)
        pts.append(q0)
        pts.append(q1)
    pts = np.concatenate(pts)
    if len(pts) < 4:
        return TriMesh()
    try:
        res = convex_hull(pts)
    except DegenerateOutline:
        return TriMesh()
    if res.volume < SLIVER_VOLUME:
        return TriMesh()
    return res.mesh


def _separated(a: ConvexHull, b: ConvexHull) -> bool:
    d = b.vertices @ a.normals.T - a.offsets
    return bool(np.any(np.all(d > CLIP_EPS, axis=0)))


def intersection_volume(a: ConvexHull, b: ConvexHull) -> float:
    return mesh_volume(intersect_convex(a, b))
