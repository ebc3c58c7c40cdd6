"""
Pointing agreement walkthrough.

Each outline is a fingertip trace; its convex hull is the volume the
person indicated. Agreement is the Jaccard index of the two volumes.

    python3 demos/agreement_walkthrough.py
"""
import numpy as np

from magic_collab.agreement import OutlineTrace, pointing_agreement
from magic_collab.sim import spiral_outline


def cube(lo, size=1.0):
    lo = np.asarray(lo, dtype=float)
    return lo + size * np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)


def show(label, a, b):
    res = pointing_agreement(OutlineTrace.from_points(a), OutlineTrace.from_points(b))
    flags = " (degenerate)" if res.degenerate_dem or res.degenerate_int else ""
    print(f"{label:<34} J = {res.j:.4f}   V_dem {res.v_dem:.2e}  V_int {res.v_int:.2e}  V_I {res.v_overlap:.2e}{flags}")


show("identical cubes", cube(0), cube(0))
show("cube shifted by half a side", cube(0), cube((0.5, 0, 0)))
show("disjoint cubes", cube(0), cube((3, 0, 0)))
show("small cube inside a big one", cube((0.2, 0.2, 0.2), 0.5), cube((-1, -1, -1), 3.0))
show("flat outline", cube(0), [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])

print()
# a 2.5 cm target sphere outlined by two people, the second with a depth error
rng = np.random.default_rng(0)
center = np.array([0.0, 1.0, 0.0])
dem = spiral_outline(center, 0.025, 24) + rng.normal(scale=0.002, size=(24, 3))
for shift in (0.0, 0.005, 0.01, 0.02, 0.04):
    intp = spiral_outline(center + [0, 0, shift], 0.025, 24) + rng.normal(scale=0.002, size=(24, 3))
    show(f"sphere outline, depth error {100 * shift:.1f} cm", dem, intp)
