import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from oracles import Y, distance_to_pitch_set, expm_rot, haar_cap_fraction
from pitchanchor.so3 import (
    Rotation,
    SetTag,
    classify_set,
    exp_map,
    pitch_decompose,
    quat_mul,
    random_rotation,
    random_rotations,
    rot_axis_angle,
    rot_x,
    rot_y,
    rot_z,
    skew,
    vee,
    wrap_angle,
)

finite = st.floats(-10.0, 10.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
quat = st.tuples(finite, finite, finite, finite).filter(
    lambda q: sum(v * v for v in q) > 1e-6).map(np.array)


class TestSkew:
    def test_cross_product(self):
        assert np.array_equal(skew((1, 2, 3)) @ np.array([0, 0, 1.0]), [2.0, -1.0, 0.0])

    def test_zero(self):
        assert np.array_equal(skew((0, 0, 0)), np.zeros((3, 3)))

    def test_y_axis(self):
        expected = np.zeros((3, 3))
        expected[0, 2] = 1.0
        expected[2, 0] = -1.0
        assert np.array_equal(skew((0, 1, 0)), expected)

    @given(vec3, vec3)
    def test_matches_cross_and_is_skew(self, a, b):
        S = skew(a)
        assert np.array_equal(S, -S.T)
        np.testing.assert_allclose(S @ b, np.cross(a, b), atol=1e-12)
        assert np.array_equal(vee(S), a)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            skew((1.0, 2.0))


class TestRotation:
    def test_axis_angle_members(self):
        assert classify_set(rot_axis_angle((0, 1, 0), 0.7)).tag is SetTag.PITCH
        assert classify_set(rot_axis_angle((1, 0, 0), math.pi)).tag is SetTag.ANTIPODAL

    def test_x_quarter_turn_moves_y(self):
        R = rot_axis_angle((1, 0, 0), math.pi / 2)
        # value derived from the closed-form x rotation
        np.testing.assert_allclose(R.matrix.T @ Y, [0.0, 0.0, -1.0], atol=1e-15)

    @pytest.mark.parametrize("axis", [(1.0, 1.0, 0.0), (0.0, 0.0, 0.0), (0.0, 2.0, 0.0)])
    def test_non_unit_axis_rejected(self, axis):
        with pytest.raises(ValueError):
            rot_axis_angle(axis, 0.3)

    @settings(max_examples=200)
    @given(vec3, st.floats(-3.0, 3.0))
    def test_matches_matrix_exponential(self, v, angle):
        n = np.linalg.norm(v)
        if n < 1e-3:
            return
        axis = v / n
        R = rot_axis_angle(axis, angle).matrix
        np.testing.assert_allclose(R, expm_rot(axis, angle), atol=1e-12)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(R) - 1.0) < 1e-12

    def test_round_trip_through_logm(self, rng):
        for _ in range(200):
            axis = rng.standard_normal(3)
            axis /= np.linalg.norm(axis)
            angle = rng.uniform(0.0, math.pi - 1e-3)
            R = rot_axis_angle(axis, angle)
            L = np.real(linalg.logm(R.matrix))
            np.testing.assert_allclose(vee(0.5 * (L - L.T)), angle * axis, atol=1e-9)
            np.testing.assert_allclose(R.as_rotvec(), angle * axis, atol=1e-12)

    @given(quat, quat)
    def test_composition_matches_matrix_product(self, a, b):
        A, B = Rotation(a), Rotation(b)
        np.testing.assert_allclose((A @ B).matrix, A.matrix @ B.matrix, atol=1e-12)
        np.testing.assert_allclose((A @ A.inverse()).matrix, np.eye(3), atol=1e-12)

    @given(quat)
    def test_matrix_round_trip(self, q):
        R = Rotation(q)
        back = Rotation.from_matrix(R.matrix)
        np.testing.assert_allclose(back.matrix, R.matrix, atol=1e-12)

    def test_zero_quaternion_rejected(self):
        with pytest.raises(ValueError):
            Rotation(np.zeros(4))
        with pytest.raises(ValueError):
            Rotation(np.array([np.nan, 0, 0, 1.0]))

    def test_exp_map_zero(self):
        assert np.array_equal(exp_map(np.zeros(3)).matrix, np.eye(3))

    def test_quat_mul_identity(self):
        q = np.array([0.5, 0.5, -0.5, 0.5])
        assert np.array_equal(quat_mul(np.array([1.0, 0, 0, 0]), q), q)


class TestPitchDecompose:
    def test_pure_pitch(self):
        pitch, swing = pitch_decompose(rot_y(0.7))
        assert pitch == pytest.approx(0.7, abs=1e-15)
        assert swing == 0.0

    def test_pure_roll(self):
        # frozen from the geodesic-distance oracle: (0.30000000000000016, s* ~ 0)
        dist, s_star = distance_to_pitch_set(expm_rot((1, 0, 0), 0.3))
        assert dist == pytest.approx(0.3, abs=1e-9)
        assert s_star == pytest.approx(0.0, abs=1e-6)
        pitch, swing = pitch_decompose(rot_x(0.3))
        assert pitch == pytest.approx(0.0, abs=1e-15)
        assert swing == pytest.approx(0.3, abs=1e-12)

    def test_antipodal_canonical_pitch(self):
        pitch, swing = pitch_decompose(rot_x(math.pi))
        assert pitch == 0.0
        assert swing == pytest.approx(math.pi, abs=1e-15)

    def test_antipodal_pitch_is_a_tie(self):
        # every rot_y(p) is equidistant from an element of Q
        R = rot_x(math.pi) @ rot_y(0.4)
        d = [np.linalg.norm(R.matrix - rot_y(p).matrix) for p in np.linspace(-3, 3, 13)]
        assert np.ptp(d) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(quat)
    def test_swing_is_distance_to_pitch_set(self, q):
        R = Rotation(q)
        pitch, swing = pitch_decompose(R)
        dist, _ = distance_to_pitch_set(R.matrix)
        assert swing == pytest.approx(dist, abs=1e-6)

    @settings(max_examples=200)
    @given(quat)
    def test_factorization(self, q):
        R = Rotation(q)
        pitch, swing = pitch_decompose(R)
        assert -math.pi <= pitch <= math.pi
        assert 0.0 <= swing <= math.pi
        sw = R @ rot_y(pitch).inverse()
        v = sw.as_rotvec()
        # the swing factor turns about an axis orthogonal to y
        assert abs(v[1]) < 1e-9
        assert np.linalg.norm(v) == pytest.approx(swing, abs=1e-9)


class TestClassifySet:
    def test_examples(self):
        assert classify_set(Rotation.identity()).tag is SetTag.PITCH
        assert classify_set(rot_x(math.pi)).tag is SetTag.ANTIPODAL
        m = classify_set(rot_x(0.3))
        assert m.tag is SetTag.REGULAR
        assert m.distance == pytest.approx(0.3, abs=1e-12)

    def test_antipodal_distance_is_to_q(self):
        m = classify_set(rot_z(math.pi) @ rot_y(1.0))
        assert m.tag is SetTag.ANTIPODAL
        assert m.distance == pytest.approx(0.0, abs=1e-12)

    def test_tolerance_must_be_positive(self):
        with pytest.raises(ValueError):
            classify_set(Rotation.identity(), 0.0)

    def test_pitch_set_is_closed_under_composition(self, rng):
        for _ in range(100):
            a, b = rng.uniform(-4, 4, 2)
            assert classify_set(rot_y(a) @ rot_y(b)).tag is SetTag.PITCH
            assert classify_set(rot_y(a).inverse()).tag is SetTag.PITCH

    def test_tags_are_exclusive(self, rng):
        for _ in range(500):
            R = random_rotation(rng)
            ry = R.matrix.T @ Y
            tag = classify_set(R, 1e-9).tag
            if tag is SetTag.PITCH:
                assert np.linalg.norm(ry - Y) <= 1e-9
            elif tag is SetTag.ANTIPODAL:
                assert np.linalg.norm(ry + Y) <= 1e-9


class TestSampling:
    def test_deterministic(self):
        a = random_rotation(np.random.default_rng(11))
        b = random_rotation(np.random.default_rng(11))
        assert np.array_equal(a.q, b.q)

    def test_haar_mean_of_yRy(self):
        q = random_rotations(np.random.default_rng(3), 100_000)
        w, x, y, z = q.T
        yRy = 1.0 - 2.0 * (x * x + z * z)
        assert abs(yRy.mean()) < 0.02

    @pytest.mark.parametrize("cap", [0.1, 0.5])
    def test_haar_cap_fraction(self, cap):
        # ~250 samples land in the 0.1 cap, so 10 % is only ~1.6 sigma there;
        # the 0.5 cap holds ~6000 and pins any real bias
        q = random_rotations(np.random.default_rng(2), 100_000)
        w, x, y, z = q.T
        swing = 2.0 * np.arctan2(np.sqrt(x * x + z * z), np.sqrt(w * w + y * y))
        frac = float(np.mean(swing <= cap))
        expected = haar_cap_fraction(cap)
        # quadrature oracle agrees with the closed form (1 - cos a) / 2
        assert expected == pytest.approx((1.0 - math.cos(cap)) / 2.0, rel=1e-12)
        assert frac == pytest.approx(expected, rel=0.10)

    def test_single_and_batch_agree_in_law(self):
        rng = np.random.default_rng(9)
        singles = np.array([random_rotation(rng).q for _ in range(20_000)])
        assert abs(np.mean(1 - 2 * (singles[:, 1] ** 2 + singles[:, 3] ** 2))) < 0.03


def test_wrap_angle():
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(0.25) == 0.25
    assert abs(wrap_angle(7.0)) <= math.pi
