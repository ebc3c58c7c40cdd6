import math

import numpy as np
import pytest
from conftest import cube_corners, random_hull_pair, voxel_intersection_volume
from hypothesis import given, settings
from hypothesis import strategies as st

from magic_collab.agreement import (
    OutlineTrace,
    jaccard_from_volumes,
    outline_hull,
    pointing_agreement,
)
from magic_collab.hull import DegenerateOutline
from magic_collab.sim import spiral_outline


def trace(points):
    return OutlineTrace.from_points(points)


def test_trace_validation():
    with pytest.raises(ValueError):
        OutlineTrace([], np.zeros((0, 3)))
    with pytest.raises(ValueError):
        OutlineTrace([0.0, 0.0], np.zeros((2, 3)))
    with pytest.raises(ValueError):
        OutlineTrace([0.0, 1.0], np.zeros((3, 3)))


def test_cube_outline_volume():
    assert outline_hull(trace(cube_corners(size=0.1))).volume == pytest.approx(1e-3, abs=1e-12)


def test_three_samples_degenerate():
    with pytest.raises(DegenerateOutline):
        outline_hull(trace(np.eye(3)))


def test_spiral_hull_approaches_sphere():
    r = 0.025
    sphere = 4 / 3 * math.pi * r**3
    vols = [outline_hull(trace(spiral_outline((0, 1, 0), r, n))).volume for n in (50, 200, 800)]
    assert all(v <= sphere for v in vols)
    assert vols[0] < vols[1] < vols[2]
    assert vols[2] == pytest.approx(sphere, rel=0.01)


def test_identical_traces():
    t = trace(np.random.default_rng(0).normal(size=(30, 3)))
    assert pointing_agreement(t, t).j == pytest.approx(1.0, abs=1e-12)


def test_disjoint_cubes():
    res = pointing_agreement(trace(cube_corners()), trace(cube_corners((5, 0, 0))))
    assert res.j == 0.0 and res.v_overlap == 0.0


def test_shifted_cube_third():
    a, b = cube_corners(), cube_corners((0.5, 0, 0))
    res = pointing_agreement(trace(a), trace(b))
    v_i = voxel_intersection_volume(a, b)
    oracle = v_i / (2.0 - v_i)
    assert abs(res.j - 1 / 3) <= 0.02
    assert abs(res.j - oracle) <= 0.02


def test_nested_is_volume_ratio():
    big = cube_corners((-1, -1, -1), 3.0)
    small = cube_corners((0, 0, 0), 0.5)
    res = pointing_agreement(trace(small), trace(big))
    assert abs(res.j - 0.125 / 27.0) <= 1e-9


def test_degenerate_outline_flagged_not_raised():
    good = trace(cube_corners())
    flat = trace([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    res = pointing_agreement(good, flat)
    assert res.j == 0.0 and res.degenerate_int and not res.degenerate_dem
    res = pointing_agreement(trace(np.eye(3)), good)
    assert res.j == 0.0 and res.degenerate_dem


def test_jaccard_from_volumes_edge_cases():
    assert jaccard_from_volumes(0.0, 0.0, 0.0) == 0.0
    assert jaccard_from_volumes(1.0, 1.0, 1.0) == 1.0
    assert jaccard_from_volumes(1.0, 2.0, 0.5) == pytest.approx(0.5 / 2.5)


def test_random_pairs_properties():
    rng = np.random.default_rng(1)
    for _ in range(40):
        pa, pb = random_hull_pair(rng)
        ab = pointing_agreement(trace(pa), trace(pb))
        ba = pointing_agreement(trace(pb), trace(pa))
        assert abs(ab.j - ba.j) <= 1e-9
        assert 0.0 <= ab.j <= 1.0
        assert ab.v_overlap <= min(ab.v_dem, ab.v_int) + 1e-9
        recomputed = ab.v_overlap / (ab.v_dem + ab.v_int - ab.v_overlap)
        assert abs(ab.j - recomputed) <= 1e-9


def rotation(a, b, c):
    ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
    rz = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rx = np.array([[1, 0, 0], [0, cc, -sc], [0, sc, cc]])
    return rz @ ry @ rx


angle = st.floats(-math.pi, math.pi)
offset = st.floats(-10, 10)


@settings(max_examples=60, deadline=None)
@given(angle, angle, angle, offset, offset, offset, st.integers(0, 2**32 - 1))
def test_rigid_transform_invariance(a, b, c, x, y, z, seed):
    pa, pb = random_hull_pair(np.random.default_rng(seed))
    r, t = rotation(a, b, c), np.array([x, y, z])
    j0 = pointing_agreement(trace(pa), trace(pb)).j
    j1 = pointing_agreement(trace(pa @ r.T + t), trace(pb @ r.T + t)).j
    assert abs(j0 - j1) <= 1e-6
