import numpy as np
import pytest
from scipy.spatial import ConvexHull as ScipyHull

from magic_collab.sim import generate_scene


def voxel_intersection_volume(pts_a, pts_b, n=128):
    """
    Volume of hull(pts_a) & hull(pts_b) by counting cell centres of an
    n^3 grid over the overlap of the two bounding boxes. Containment uses
    scipy's hull planes, independent of the library under test.
    """
    lo = np.maximum(pts_a.min(0), pts_b.min(0))
    hi = np.minimum(pts_a.max(0), pts_b.max(0))
    if np.any(hi <= lo):
        return 0.0
    eq = np.vstack([ScipyHull(pts_a).equations, ScipyHull(pts_b).equations])
    step = (hi - lo) / n
    axes = [lo[i] + (np.arange(n) + 0.5) * step[i] for i in range(3)]
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    xy = np.stack([gx.ravel(), gy.ravel()], axis=1)
    count = 0
    for z in axes[2]:
        # plane test: n.x + d <= 0 for every face of both hulls
        s = xy @ eq[:, :2].T + (z * eq[:, 2] + eq[:, 3])
        count += int(np.count_nonzero(np.all(s <= 0.0, axis=1)))
    return count * float(np.prod(step))


def random_hull_pair(rng):
    """Two random point clouds inside the unit cube, overlapping more often than not."""
    clouds = []
    centre = rng.uniform(0.3, 0.7, size=3)
    for _ in range(2):
        size = rng.uniform(0.15, 0.5, size=3)
        c = np.clip(centre + rng.normal(scale=0.07, size=3), size / 2, 1 - size / 2)
        n = int(rng.integers(8, 40))
        clouds.append(c + (rng.random((n, 3)) - 0.5) * size)
    return clouds


def cube_corners(lo=(0.0, 0.0, 0.0), size=1.0):
    lo = np.asarray(lo, dtype=float)
    return lo + size * np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)


@pytest.fixture(scope="session")
def scene0():
    return generate_scene(0)
