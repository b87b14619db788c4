import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from quatppf import quat

from .conftest import random_quaternions

finite = st.floats(-10, 10, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
quaternion = (st.tuples(finite, finite, finite, finite)
              .filter(lambda q: sum(x * x for x in q) > 1e-6)
              .map(lambda q: quat.normalize(np.array(q))))


def axis_angle_matrix(axis, angle):
    # Rodrigues, independent of the quaternion formulas
    K = quat.skew(axis / np.linalg.norm(axis))
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def test_identity_is_neutral(rng):
    for Q in random_quaternions(rng, 50):
        np.testing.assert_allclose(quat.product(quat.IDENTITY, Q), Q, atol=1e-15)
        np.testing.assert_allclose(quat.product(Q, quat.IDENTITY), Q, atol=1e-15)


def test_product_with_inverse_is_identity(rng):
    for Q in random_quaternions(rng, 50):
        np.testing.assert_allclose(quat.product(Q, quat.inverse(Q)), quat.IDENTITY, atol=1e-15)


def test_inverse_examples():
    np.testing.assert_array_equal(quat.inverse(np.array([1.0, 0, 0, 0])), [1, 0, 0, 0])
    np.testing.assert_array_equal(quat.inverse(np.array([0.0, 1, 0, 0])), [0, -1, 0, 0])


def test_rotation_of_identity_and_its_negative():
    np.testing.assert_array_equal(quat.to_rotation(np.array([1.0, 0, 0, 0])), np.eye(3))
    np.testing.assert_array_equal(quat.to_rotation(np.array([-1.0, 0, 0, 0])), np.eye(3))


def test_half_turn_about_x():
    np.testing.assert_array_equal(quat.to_rotation(np.array([0.0, 1, 0, 0])), np.diag([1.0, -1, -1]))


def test_rotation_matches_axis_angle(rng):
    for _ in range(100):
        axis = rng.standard_normal(3)
        angle = rng.uniform(-math.pi, math.pi)
        u = axis / np.linalg.norm(axis)
        Q = np.array([math.cos(angle / 2), *(math.sin(angle / 2) * u)])
        np.testing.assert_allclose(quat.to_rotation(Q), axis_angle_matrix(axis, angle), atol=1e-12)


def test_homomorphism_inverse_and_double_cover(rng):
    Q1s, Q2s = random_quaternions(rng, 1000), random_quaternions(rng, 1000)
    for Q1, Q2 in zip(Q1s, Q2s):
        R1, R2 = quat.to_rotation(Q1), quat.to_rotation(Q2)
        np.testing.assert_allclose(quat.to_rotation(quat.product(Q1, Q2)), R1 @ R2, atol=1e-9)
        np.testing.assert_allclose(quat.to_rotation(quat.inverse(Q1)), R1.T, atol=1e-9)
        np.testing.assert_array_equal(quat.to_rotation(-Q1), R1)


@given(quaternion)
def test_rotation_is_orthonormal(Q):
    R = quat.to_rotation(Q)
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-9)
    assert abs(np.linalg.det(R) - 1.0) < 1e-9


@given(vec3, vec3)
def test_skew_is_cross_product(v, y):
    S = quat.skew(v)
    np.testing.assert_allclose(S @ y, np.cross(v, y), rtol=0, atol=1e-12)
    np.testing.assert_array_equal(S.T, -S)


def test_skew_examples():
    np.testing.assert_array_equal(quat.skew(np.zeros(3)), np.zeros((3, 3)))
    np.testing.assert_array_equal(quat.skew(np.array([1.0, 0, 0])) @ [0, 1, 0], [0, 0, 1])


@given(vec3)
def test_gamma_is_skew(w):
    G = quat.gamma(w)
    np.testing.assert_array_equal(G + G.T, np.zeros((4, 4)))


def test_gamma_of_zero():
    np.testing.assert_array_equal(quat.gamma(np.zeros(3)), np.zeros((4, 4)))


def test_gamma_is_right_multiplication(rng):
    for Q in random_quaternions(rng, 100):
        w = rng.standard_normal(3)
        np.testing.assert_allclose(quat.gamma(w) @ Q, quat.product(Q, np.array([0.0, *w]), renormalize=False),
                                   atol=1e-14)
    quat.self_test()


def test_exp_step_zero_rate_is_identity(rng):
    for Q in random_quaternions(rng, 10):
        # equal up to the renormalization rounding
        np.testing.assert_allclose(quat.exp_step(np.zeros(3), 0.01, Q), Q, rtol=0, atol=1e-15)


def test_exp_step_full_revolution():
    dt = 0.01
    Q = quat.normalize(np.array([0.3, -0.2, 0.5, 0.7]))
    out = quat.exp_step(np.array([2 * math.pi / dt, 0, 0]), dt, Q)
    np.testing.assert_allclose(quat.to_rotation(out), quat.to_rotation(Q), atol=1e-12)
    np.testing.assert_allclose(out, -Q, atol=1e-12)


def series_exp(A, terms=20):
    out, term = np.eye(4), np.eye(4)
    for n in range(1, terms):
        term = term @ A / n
        out = out + term
    return out


def test_exp_step_matches_series_and_expm(rng):
    dt = 1e-3
    for Q in random_quaternions(rng, 1000):
        w = rng.normal(scale=5.0, size=3)
        A = 0.5 * quat.gamma(w) * dt
        out = quat.exp_step(w, dt, Q)
        np.testing.assert_allclose(out, series_exp(A) @ Q, atol=1e-10)
    np.testing.assert_allclose(out, expm(A) @ Q, atol=1e-12)


def test_exp_step_small_angle_branch_is_continuous():
    Q = quat.normalize(np.array([0.9, 0.1, -0.3, 0.2]))
    dt = 0.005
    w_small = np.array([1e-7, -2e-7, 3e-7])  # theta well below 1e-8
    np.testing.assert_allclose(quat.exp_step(w_small, dt, Q),
                               series_exp(0.5 * quat.gamma(w_small) * dt) @ Q, atol=1e-15)


def test_exp_step_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        quat.exp_step(np.zeros(3), 0.0, quat.IDENTITY)


@given(quaternion, vec3)
def test_rotate_matches_matrix_and_is_isometry(Q, v):
    out = quat.rotate(Q, v)
    np.testing.assert_allclose(out, quat.to_rotation(Q).T @ v, atol=1e-9)
    assert abs(np.linalg.norm(out) - np.linalg.norm(v)) < 1e-9


def test_rotate_by_identity():
    v = np.array([0.3, -1.0, 2.0])
    np.testing.assert_allclose(quat.rotate(quat.IDENTITY, v), v, atol=0)


@settings(max_examples=50)
@given(quaternion, st.lists(vec3, min_size=1, max_size=200))
def test_unit_norm_preserved_over_updates(Q, rates):
    for w in rates:
        Q = quat.exp_step(w, 0.005, Q)
        Q = quat.product(Q, quat.normalize(np.array([1.0, *(0.01 * w)])))
    assert abs(np.linalg.norm(Q) - 1.0) < 1e-9


def test_geodesic_distance():
    Q = np.array([math.cos(0.2), math.sin(0.2), 0.0, 0.0])
    assert quat.geodesic_distance(quat.IDENTITY, Q) == pytest.approx(0.4, abs=1e-12)
    assert quat.geodesic_distance(Q, -Q) == pytest.approx(0.0, abs=1e-7)
