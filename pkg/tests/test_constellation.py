import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stbc.constellation import (ROTATION, THETA_G, Constellation, ConstellationError,
                                cross_qam_32, from_name, hard_limit_pam, rotate, square_qam)


def test_square_qam_4():
    assert set(square_qam(4).points) == {1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j}


def test_square_qam_16():
    c = square_qam(16)
    assert c.size == 16
    assert set(c.points.real) == {-3, -1, 1, 3} and set(c.points.imag) == {-3, -1, 1, 3}
    np.testing.assert_array_equal(c.pam_levels, [-3, -1, 1, 3])


@pytest.mark.parametrize("m", [4, 16, 64])
def test_square_qam_regular(m):
    p = square_qam(m).points
    d = (p[:, None] - p[None, :]).ravel()
    assert np.all(d.real % 2 == 0) and np.all(d.imag % 2 == 0)
    assert len(set(p)) == m


@pytest.mark.parametrize("m", [2, 8, 32, 12])
def test_square_qam_rejects(m):
    with pytest.raises(ConstellationError):
        square_qam(m)


def test_cross_32():
    c = cross_qam_32()
    assert c.size == 32 and len(set(c.points)) == 32
    assert not c.contains(5 + 5j) and c.contains(5 + 3j)
    d = (c.points[:, None] - c.points[None, :]).ravel()
    assert np.all(d.real % 2 == 0) and np.all(d.imag % 2 == 0)
    assert not c.is_square


def test_rotation_angle():
    assert abs(ROTATION ** 2 - (1 + 2j) / math.sqrt(5)) < 1e-12
    assert abs(THETA_G - 0.553574) < 1e-6


def test_rotated_4qam_distinct_parts():
    r = rotate(square_qam(4))
    assert len(set(np.round(r.points.real, 12))) == 4
    assert len(set(np.round(r.points.imag, 12))) == 4
    assert r.rotation == THETA_G


def test_rotation_preserves_distances():
    c = square_qam(16)
    r = rotate(c)
    d0 = np.abs(c.points[:, None] - c.points[None, :])
    d1 = np.abs(r.points[:, None] - r.points[None, :])
    # rotation keeps point order only up to sorting, compare as multisets per point
    rot = c.points * ROTATION
    np.testing.assert_allclose(np.abs(rot[:, None] - rot[None, :]), d0, atol=1e-12)
    np.testing.assert_allclose(np.sort(d1.ravel()), np.sort(d0.ravel()), atol=1e-12)


def test_rotation_without_angle_fails_distinctness():
    with pytest.raises(ConstellationError):
        rotate(square_qam(4), angle=0.0)


def test_rotate_twice_rejected():
    with pytest.raises(ConstellationError):
        rotate(rotate(square_qam(4)))


def test_zero_rotates_to_zero():
    assert 0 * ROTATION == 0


def test_hard_limit_examples():
    assert hard_limit_pam(0.2, square_qam(4).pam_levels) == 1
    assert hard_limit_pam(0.0, square_qam(4).pam_levels) == 1
    assert hard_limit_pam(-7.3, square_qam(16).pam_levels) == -3


def test_hard_limit_matches_exhaustive():
    levels = square_qam(64).pam_levels
    u = np.random.default_rng(0).uniform(-10, 10, 10 ** 6)
    ref = levels[np.argmin(np.abs(u[:, None] - levels[None, :]), axis=1)]
    np.testing.assert_array_equal(hard_limit_pam(u, levels), ref)


def test_hard_limit_ties_go_up():
    levels = square_qam(16).pam_levels
    np.testing.assert_array_equal(hard_limit_pam(np.array([-2.0, 0.0, 2.0]), levels), [-1, 1, 3])


def test_hard_limit_generic_levels():
    levels = np.array([-2.5, 0.0, 4.0])
    assert hard_limit_pam(-1.25, levels) == 0.0
    assert hard_limit_pam(3.0, levels) == 4.0


@pytest.mark.parametrize("m", [4, 16, 64, 256])
def test_hard_limit_idempotent(m):
    levels = square_qam(m).pam_levels
    np.testing.assert_array_equal(hard_limit_pam(levels, levels), levels)


@given(st.floats(-40, 40, allow_nan=False), st.floats(0, 10, allow_nan=False))
def test_hard_limit_monotone(u, du):
    levels = square_qam(64).pam_levels
    assert hard_limit_pam(u, levels) <= hard_limit_pam(u + du, levels)


@given(st.floats(-6, 6, allow_nan=False), st.floats(-6, 6, allow_nan=False))
def test_separable_slicing_is_nearest_point(a, b):
    c = square_qam(16)
    z = complex(a, b)
    sliced = hard_limit_pam(a, c.pam_levels) + 1j * hard_limit_pam(b, c.pam_levels)
    best = np.min(np.abs(c.points - z))
    assert abs(abs(sliced - z) - best) < 1e-12


def test_json_roundtrip():
    c = cross_qam_32()
    d = json.loads(c.to_json())
    assert d["kind"] == "cross32" and d["M"] == 32 and len(d["points"]) == 32
    back = Constellation.from_dict(d)
    np.testing.assert_array_equal(back.points, c.points)


def test_from_name():
    assert from_name("16").size == 16
    assert from_name("qam4").size == 4
    assert from_name("cross32").size == 32
    with pytest.raises(ConstellationError):
        from_name("psk8")
