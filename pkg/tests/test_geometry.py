import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bri.errors import DegenerateResidue
from bri.geometry import (
    RigidMotion,
    apply_motion,
    as_backbone,
    build_backbone,
    canonical_pose,
    cross,
    dot,
    frames,
    mirror,
    random_backbone,
    random_motion,
    residue_frame,
    rotation_angle,
)


def test_frame_axis_aligned():
    f = residue_frame((1, 0, 0), (0, 0, 0), (0, 1, 0))
    assert np.array_equal(f.u, [1, 0, 0])
    assert np.array_equal(f.v, [0, 1, 0])
    assert np.array_equal(f.w, [0, 0, 1])


def test_frame_obtuse_residue():
    f = residue_frame((1.46, 0, 0), (0, 0, 0), (-0.53, 1.42, 0))
    np.testing.assert_allclose(f.matrix(), np.eye(3), atol=1e-15)


def test_frame_zero_bond():
    with pytest.raises(DegenerateResidue):
        residue_frame((0, 0, 0), (0, 0, 0), (1, 0, 0))


def test_frame_collinear_reports_index():
    coords = random_backbone(5, 1)
    coords[3, 2] = coords[3, 1] + 2.0 * (coords[3, 0] - coords[3, 1])
    with pytest.raises(DegenerateResidue) as info:
        frames(coords)
    assert info.value.index == 4


@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_frames_orthonormal_right_handed(seed, m):
    f = frames(random_backbone(m, seed))
    gram = f @ np.transpose(f, (0, 2, 1))
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(f), 1.0, atol=1e-12)


def test_dot_cross_match_numpy(rng):
    a, b = rng.normal(size=(2, 50, 3))
    np.testing.assert_allclose(dot(a, b), np.einsum("ij,ij->i", a, b), rtol=1e-14)
    np.testing.assert_allclose(cross(a, b), np.cross(a, b), atol=1e-14)


def test_identity_motion():
    s = random_backbone(4, 2)
    assert np.array_equal(apply_motion(RigidMotion.identity(), s), s)


def test_translation_only():
    s = np.array([[[1.0, 0, 0], [0, 0, 0], [0, 1, 0]]])
    out = apply_motion(RigidMotion(np.eye(3), (1, 2, 3)), s)
    np.testing.assert_array_equal(out, s + [1, 2, 3])


@given(st.integers(0, 2**32 - 1))
def test_motion_inverse_roundtrip(seed):
    s = random_backbone(6, seed)
    f = random_motion(seed)
    back = apply_motion(f.inverse(), apply_motion(f, s))
    assert np.abs(back - s).max() <= 1e-10
    np.testing.assert_allclose(f.compose(f.inverse()).rotation, np.eye(3), atol=1e-12)


def test_motion_rejects_reflection():
    with pytest.raises(ValueError):
        RigidMotion(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        RigidMotion(2 * np.eye(3), np.zeros(3))


def test_motion_is_immutable():
    f = random_motion(3)
    with pytest.raises(ValueError):
        f.rotation[0, 0] = 5.0


def test_random_motion_deterministic():
    a, b = random_motion(77), random_motion(77)
    assert np.array_equal(a.rotation, b.rotation) and np.array_equal(a.translation, b.translation)


def test_random_rotation_mean_angle():
    # Haar measure on SO(3): angle density (1 - cos t) / pi, mean pi/2 + 2/pi.
    angles = [rotation_angle(random_motion(s).rotation) for s in range(4000)]
    expected = math.pi / 2 + 2 / math.pi
    assert abs(np.mean(angles) - expected) < math.radians(3)


def test_mirror_examples(planar):
    assert np.array_equal(mirror(planar), planar)
    pt = np.array([[[1.0, 2.0, 3.0], [0, 0, 0], [0, 1, 0]]])
    assert np.array_equal(mirror(pt)[0, 0], [1, 2, -3])
    s = random_backbone(5, 9)
    assert np.array_equal(mirror(mirror(s)), s)


def test_canonical_pose_single_residue():
    s = np.array([[[0, 0, 2], [0, 0, 1], [1, 0, 1]]], dtype=float)
    posed, _ = canonical_pose(s)
    np.testing.assert_allclose(posed[0, 1], 0, atol=1e-15)
    np.testing.assert_allclose(posed[0, 0], [1, 0, 0], atol=1e-15)
    assert posed[0, 2, 1] > 0 and posed[0, 2, 2] == 0


def test_canonical_pose_is_fixed_point():
    posed, _ = canonical_pose(random_backbone(10, 4))
    again, f = canonical_pose(posed)
    np.testing.assert_allclose(f.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(f.translation, 0, atol=1e-12)
    assert np.abs(again - posed).max() <= 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_canonical_pose_undoes_motion(seed, m):
    posed, _ = canonical_pose(random_backbone(m, seed))
    moved = apply_motion(random_motion(seed + 1), posed)
    assert np.abs(canonical_pose(moved)[0] - posed).max() <= 1e-9


def test_random_backbone_respects_ranges():
    s = random_backbone(200, 5).reshape(-1, 3)
    bonds = np.linalg.norm(np.diff(s, axis=0), axis=1)
    assert bonds.min() >= 1.2 and bonds.max() <= 1.6
    v1, v2 = s[:-2] - s[1:-1], s[2:] - s[1:-1]
    ang = np.degrees(np.arccos(dot(v1, v2) / np.linalg.norm(v1, axis=1) / np.linalg.norm(v2, axis=1)))
    assert ang.min() >= 100 - 1e-9 and ang.max() <= 130 + 1e-9


def test_ideal_helix_ca_spacing():
    s = build_backbone([-57.0] * 12, [-47.0] * 12)
    ca = np.linalg.norm(np.diff(s[:, 1], axis=0), axis=1)
    np.testing.assert_allclose(ca, 3.80, atol=0.01)


def test_as_backbone_rejects_bad_shapes():
    with pytest.raises(ValueError):
        as_backbone(np.zeros((2, 2, 3)))
    with pytest.raises(ValueError):
        as_backbone(np.full((1, 3, 3), np.nan))
