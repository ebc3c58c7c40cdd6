import numpy as np
import pytest
from conftest import cube_corners, random_hull_pair, voxel_intersection_volume
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial import ConvexHull as ScipyHull

from magic_collab.geometry import is_closed, mesh_volume
from magic_collab.hull import (
    DegenerateOutline,
    convex_hull,
    hull_contains,
    intersect_convex,
    intersection_volume,
)


def test_tetrahedron_hull_keeps_all_four_points():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    h = convex_hull(pts)
    assert sorted(h.vertex_indices.tolist()) == [0, 1, 2, 3]
    assert h.volume == pytest.approx(1 / 6, abs=1e-15)
    assert len(h.mesh.triangles) == 4


def test_cube_with_centroid_drops_interior_point():
    pts = np.vstack([cube_corners(), [[0.5, 0.5, 0.5]]])
    h = convex_hull(pts)
    assert sorted(h.vertex_indices.tolist()) == list(range(8))
    assert abs(h.volume - 1.0) <= 1e-9
    assert h.source_point_count == 9


def test_ball_points_all_contained():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(200, 3))
    pts = v / np.linalg.norm(v, axis=1, keepdims=True) * rng.random((200, 1)) ** (1 / 3)
    h = convex_hull(pts)
    assert np.all(hull_contains(h, pts, tol=1e-7))


@pytest.mark.parametrize(
    "pts",
    [
        np.zeros((3, 3)),
        np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0.5, 0.2, 0]], dtype=float),
        np.outer(np.arange(6), [1.0, 2.0, 3.0]),
        np.ones((10, 3)),
    ],
    ids=["three", "coplanar", "collinear", "coincident"],
)
def test_degenerate_input_raises(pts):
    with pytest.raises(DegenerateOutline):
        convex_hull(pts)


def test_nearly_coplanar_below_tolerance_raises():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 1e-11]], dtype=float)
    with pytest.raises(DegenerateOutline):
        convex_hull(pts)


def test_hull_contains_examples():
    h = convex_hull(cube_corners())
    assert hull_contains(h, h.vertices.mean(axis=0))
    assert all(hull_contains(h, v, tol=1e-9) for v in h.vertices)
    assert not hull_contains(h, [0.5, 0.5, 2.0])


def test_hull_is_closed_planar_convex():
    rng = np.random.default_rng(4)
    for _ in range(50):
        pts = rng.normal(size=(int(rng.integers(4, 80)), 3))
        h = convex_hull(pts)
        assert is_closed(h.mesh)
        # every hull vertex on the inner side of every face plane
        s = h.vertices @ h.normals.T - h.offsets
        assert s.max() <= 1e-7
        # each face's own corners lie on its plane
        corners = h.mesh.vertices[h.mesh.triangles]
        d = np.einsum("fkj,fj->fk", corners, h.normals) - h.offsets[:, None]
        assert np.abs(d).max() <= 1e-7


def test_matches_scipy_volume_and_vertices():
    rng = np.random.default_rng(5)
    for _ in range(100):
        pts = rng.uniform(-1, 1, size=(int(rng.integers(4, 100)), 3))
        h = convex_hull(pts)
        ref = ScipyHull(pts)
        assert h.volume == pytest.approx(ref.volume, rel=1e-9)
        assert set(h.vertex_indices.tolist()) == set(ref.vertices.tolist())


def test_idempotent_on_own_vertices():
    rng = np.random.default_rng(6)
    pts = rng.normal(size=(60, 3))
    h = convex_hull(pts)
    h2 = convex_hull(h.vertices)
    assert len(h2.vertex_indices) == len(h.vertex_indices)
    np.testing.assert_array_equal(np.sort(h.vertices, axis=0), np.sort(h2.vertices, axis=0))


def test_lattice_hull_keeps_only_corners():
    # lattice points land inside faces and along edges; none may be a vertex
    rng = np.random.default_rng(11)
    for _ in range(50):
        pts = rng.integers(-3, 4, size=(60, 3)).astype(float)
        h = convex_hull(pts)
        h2 = convex_hull(h.vertices)
        assert len(h2.vertices) == len(h.vertices)
        assert h2.volume == pytest.approx(h.volume, abs=1e-12)
    grid = np.array([[i, j, k] for i in range(3) for j in range(3) for k in range(3)], dtype=float)
    h = convex_hull(grid)
    assert len(h.vertices) == 8 and h.volume == pytest.approx(8.0, abs=1e-12)


def test_deterministic():
    pts = np.random.default_rng(8).normal(size=(50, 3))
    a, b = convex_hull(pts), convex_hull(pts.copy())
    np.testing.assert_array_equal(a.mesh.triangles, b.mesh.triangles)
    np.testing.assert_array_equal(a.mesh.vertices, b.mesh.vertices)


def test_cube_intersect_itself():
    h = convex_hull(cube_corners())
    assert abs(mesh_volume(intersect_convex(h, h)) - 1.0) <= 1e-9


def test_random_hull_intersect_itself():
    # edges lie on the hull's own faces, so every clip is a round-off tie
    rng = np.random.default_rng(7)
    for _ in range(100):
        h = convex_hull(rng.normal(size=(int(rng.integers(5, 40)), 3)))
        assert abs(intersection_volume(h, h) - h.volume) <= 1e-9 * h.volume


def test_far_apart_cubes_intersect_empty():
    a = convex_hull(cube_corners())
    b = convex_hull(cube_corners((6, 0, 0)))
    m = intersect_convex(a, b)
    assert m.is_empty and mesh_volume(m) == 0.0


def test_shifted_cube_against_voxels():
    pa, pb = cube_corners(), cube_corners((0.5, 0, 0))
    v = mesh_volume(intersect_convex(convex_hull(pa), convex_hull(pb)))
    assert abs(v - 0.5) <= 0.01
    assert abs(v - voxel_intersection_volume(pa, pb)) <= 0.01


def test_touching_faces_give_empty():
    a = convex_hull(cube_corners())
    b = convex_hull(cube_corners((1, 0, 0)))
    assert intersection_volume(a, b) == 0.0


def test_nested_intersection_is_inner_hull():
    outer = convex_hull(cube_corners((-1, -1, -1), 3.0))
    rng = np.random.default_rng(9)
    inner = convex_hull(rng.random((30, 3)))
    assert mesh_volume(intersect_convex(outer, inner)) == pytest.approx(inner.volume, abs=1e-12)


def test_random_pairs_symmetric_bounded_and_match_voxels():
    rng = np.random.default_rng(10)
    for _ in range(10):
        pa, pb = random_hull_pair(rng)
        a, b = convex_hull(pa), convex_hull(pb)
        ab = mesh_volume(intersect_convex(a, b))
        ba = mesh_volume(intersect_convex(b, a))
        assert abs(ab - ba) <= 1e-9
        assert ab <= min(a.volume, b.volume) + 1e-9
        ref = voxel_intersection_volume(pa, pb)
        assert abs(ab - ref) <= max(0.02 * ref, 1e-5)


def test_intersection_result_is_closed():
    rng = np.random.default_rng(11)
    for _ in range(20):
        pa, pb = random_hull_pair(rng)
        assert is_closed(intersect_convex(convex_hull(pa), convex_hull(pb)))


points = arrays(np.float64, st.tuples(st.integers(4, 40), st.just(3)), elements=st.floats(-1, 1, width=32))


@settings(max_examples=150, deadline=None)
@given(points)
def test_every_input_point_inside_hull(pts):
    try:
        h = convex_hull(pts)
    except DegenerateOutline:
        return
    assert np.all(hull_contains(h, pts, tol=1e-7))
    assert set(h.vertex_indices.tolist()) <= set(range(len(pts)))


@settings(max_examples=60, deadline=None)
@given(points, points)
def test_intersection_volume_properties(pa, pb):
    try:
        a, b = convex_hull(pa), convex_hull(pb)
    except DegenerateOutline:
        return
    ab, ba = intersection_volume(a, b), intersection_volume(b, a)
    assert abs(ab - ba) <= 1e-9
    assert 0.0 <= ab <= min(a.volume, b.volume) + 1e-9
