import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magic_collab.kinematics import ArmChain, BodyPose, fabrik_solve, reach, standing_pose

SHOULDER = np.array([0.2, 1.4, -0.4])


def bent_arm(shoulder=SHOULDER, bones=(0.30, 0.27, 0.18)):
    s = np.asarray(shoulder, dtype=float)
    e = s + bones[0] * np.array([0.0, -1.0, 0.0])
    w = e + bones[1] * np.array([0.0, 0.0, 1.0])
    f = w + bones[2] * np.array([0.0, 0.0, 1.0])
    return ArmChain([s, e, w, f])


def bone_drift(chain):
    return np.abs(np.linalg.norm(np.diff(chain.joints, axis=0), axis=1) - chain.bone_lengths).max()


def random_reachable(rng, chain, n):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = reach(chain) * rng.random((n, 1)) ** (1 / 3)
    return chain.shoulder + v * r


def test_reach_is_bone_sum():
    chain = ArmChain.straight((0, 0, 0), (1, 0, 0), (0.30, 0.27, 0.10))
    assert reach(chain) == pytest.approx(0.67, abs=1e-12)
    assert np.linalg.norm(chain.fingertip - chain.shoulder) == pytest.approx(reach(chain), abs=1e-12)


def test_bone_lengths_derived_and_validated():
    chain = bent_arm()
    np.testing.assert_allclose(chain.bone_lengths, [0.30, 0.27, 0.18], atol=1e-15)
    with pytest.raises(ValueError):
        ArmChain([[0, 0, 0], [0, 0, 0], [1, 0, 0], [2, 0, 0]])


def test_target_at_fingertip_returns_unchanged():
    chain = bent_arm()
    out, n = fabrik_solve(chain, chain.fingertip, full_output=True)
    assert n == 0
    assert out is chain


def test_full_extension_target_is_collinear():
    chain = bent_arm()
    target = chain.shoulder + np.array([reach(chain), 0.0, 0.0])
    out = fabrik_solve(chain, target)
    offsets = out.joints - chain.shoulder
    np.testing.assert_allclose(offsets[:, 1:], 0.0, atol=1e-12)
    np.testing.assert_allclose(offsets[:, 0], [0.0, 0.30, 0.57, 0.75], atol=1e-12)


def test_unreachable_gives_straight_chain_toward_target():
    chain = bent_arm()
    target = chain.shoulder + np.array([1.0, 2.0, -2.0])
    out = fabrik_solve(chain, target)
    u = (target - chain.shoulder) / 3.0
    expected = chain.shoulder + np.outer([0.0, 0.30, 0.57, 0.75], u)
    np.testing.assert_allclose(out.joints, expected, atol=1e-15)


def test_non_finite_target_rejected():
    with pytest.raises(ValueError):
        fabrik_solve(bent_arm(), [np.nan, 0, 0])


def test_random_reachable_targets():
    rng = np.random.default_rng(0)
    chain = bent_arm()
    for t in random_reachable(rng, chain, 300):
        out, n = fabrik_solve(chain, t, full_output=True)
        assert np.linalg.norm(out.fingertip - t) <= 1e-3
        assert bone_drift(out) <= 1e-6
        assert n <= 100
        np.testing.assert_array_equal(out.shoulder, chain.shoulder)


def test_collinear_start_bends_toward_hint():
    chain = ArmChain.straight(SHOULDER, (0, 0, 1))
    target = SHOULDER + np.array([0.0, 0.0, 0.4])
    out = fabrik_solve(chain, target, tol=1e-9, bend_hint=(1.0, 0.0, 0.0))
    assert np.linalg.norm(out.fingertip - target) <= 1e-9
    assert out.joints[1, 0] > SHOULDER[0]


def test_deterministic():
    chain = bent_arm()
    t = chain.shoulder + np.array([0.1, -0.3, 0.35])
    a, b = fabrik_solve(chain, t), fabrik_solve(chain, t.copy())
    np.testing.assert_array_equal(a.joints, b.joints)


def test_cone_limits_respected():
    chain = bent_arm()
    limit = np.radians(60)
    rng = np.random.default_rng(2)
    for t in random_reachable(rng, chain, 50):
        out = fabrik_solve(chain, t, max_bend=(limit, limit))
        d = np.diff(out.joints, axis=0)
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        angles = np.arccos(np.clip(np.einsum("ij,ij->i", d[:-1], d[1:]), -1, 1))
        assert np.all(angles <= limit + 1e-9)
        assert bone_drift(out) <= 1e-6


def test_standing_pose_layout():
    pose = standing_pose((0, 0, -0.45), (0, 0, 1))
    # right = facing x up = -x for a +z facing body
    assert pose.right_arm.shoulder[0] < 0 < pose.left_arm.shoulder[0]
    assert pose.head[1] == pytest.approx(1.70)
    np.testing.assert_allclose(pose.right_arm.fingertip[1], 1.40 - 0.75)


def test_pose_validation():
    arm = bent_arm()
    with pytest.raises(ValueError):
        BodyPose((0, 0, 0), (0, 1.7, 0), arm, arm, (0, 0, 2))
    with pytest.raises(ValueError):
        BodyPose((0, 0, 0), (0, -1, 0), arm, arm, (0, 0, 1))


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(0.0, 1.0),
)
def test_solve_property(x, y, z, frac):
    chain = bent_arm()
    v = np.array([x, y, z])
    if np.linalg.norm(v) < 1e-6:
        return
    target = chain.shoulder + v / np.linalg.norm(v) * frac * reach(chain)
    out = fabrik_solve(chain, target)
    assert np.linalg.norm(out.fingertip - target) <= 1e-3
    assert bone_drift(out) <= 1e-6
    assert np.linalg.norm(out.fingertip - out.shoulder) <= reach(out) + 1e-6
