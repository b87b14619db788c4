"""Unit-quaternion and small-matrix algebra.

Quaternions are stored scalar-first, ``[q0, q1, q2, q3]``, as float arrays of
shape (4,).  The product is the Hamilton product

    Q1 * Q2 = [q01*q02 - q1.q2,  q01*q2 + q02*q1 + q1 x q2]

and ``to_rotation`` maps Q to the body-to-inertial rotation matrix, so that a
body-frame observation of an inertial vector ``r`` is ``to_rotation(Q).T @ r``.

Vectors are 3-element arrays.  ``np.cross`` is avoided on purpose: for
3-vectors the explicit formula is an order of magnitude faster, and the
closed-loop simulation calls these functions tens of thousands of times.
"""

from __future__ import annotations

import math

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

# Below this rotation angle (|omega| * dt / 2) the exponential step uses its
# Taylor expansion instead of sin(theta) / |omega|.
_SMALL_ANGLE = 1e-8


def _floats(v):
    try:
        return v.tolist()
    except AttributeError:
        return [float(x) for x in v]


def cross(a, b):
    a1, a2, a3 = _floats(a)
    b1, b2, b3 = _floats(b)
    return np.array([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])


def norm(v):
    return math.hypot(*_floats(v))


def skew(v):
    """Return the matrix ``[v]x`` with ``skew(v) @ y == v x y``."""
    v1, v2, v3 = _floats(v)
    return np.array([
        [0.0, -v3, v2],
        [v3, 0.0, -v1],
        [-v2, v1, 0.0],
    ])


def normalize(Q):
    q0, q1, q2, q3 = _floats(Q)
    n = math.sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3)
    return np.array([q0 / n, q1 / n, q2 / n, q3 / n])


def product(Q1, Q2, renormalize=True):
    """Hamilton product ``Q1 * Q2``.

    The result is renormalized unless ``renormalize`` is False, which is only
    useful for products involving pure (non-unit) quaternions.
    """
    a0, a1, a2, a3 = _floats(Q1)
    b0, b1, b2, b3 = _floats(Q2)
    c0 = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
    c1 = a0 * b1 + b0 * a1 + a2 * b3 - a3 * b2
    c2 = a0 * b2 + b0 * a2 + a3 * b1 - a1 * b3
    c3 = a0 * b3 + b0 * a3 + a1 * b2 - a2 * b1
    if renormalize:
        n = math.sqrt(c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3)
        return np.array([c0 / n, c1 / n, c2 / n, c3 / n])
    return np.array([c0, c1, c2, c3])


def inverse(Q):
    q0, q1, q2, q3 = _floats(Q)
    return np.array([q0, -q1, -q2, -q3])


def to_rotation(Q):
    """Map a unit quaternion to SO(3): ``(q0^2 - |q|^2) I + 2 q q^T + 2 q0 [q]x``."""
    q0, q1, q2, q3 = _floats(Q)
    d = q0 * q0 - q1 * q1 - q2 * q2 - q3 * q3
    return np.array([
        [d + 2 * q1 * q1, 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2)],
        [2 * (q1 * q2 + q0 * q3), d + 2 * q2 * q2, 2 * (q2 * q3 - q0 * q1)],
        [2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), d + 2 * q3 * q3],
    ])


def gamma(omega):
    """The 4x4 matrix ``[[0, -w^T], [w, -[w]x]]``.

    ``gamma(w) @ Q`` equals ``product(Q, [0, w])``, i.e. it realizes right
    multiplication by the pure quaternion of ``w``; see :func:`self_test`.
    """
    w1, w2, w3 = _floats(omega)
    return np.array([
        [0.0, -w1, -w2, -w3],
        [w1, 0.0, w3, -w2],
        [w2, -w3, 0.0, w1],
        [w3, w2, -w1, 0.0],
    ])


def exp_step(omega, dt, Q):
    """Return ``expm(0.5 * gamma(omega) * dt) @ Q``, renormalized.

    ``gamma(omega)`` squares to ``-|omega|^2 I``, so the exponential is
    ``cos(theta) I + sin(theta) / |omega| * gamma(omega)`` with
    ``theta = |omega| dt / 2``.  That is right multiplication of Q by the
    axis-angle increment ``[cos(theta), sin(theta) * omega / |omega|]``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    w1, w2, w3 = _floats(omega)
    n = math.sqrt(w1 * w1 + w2 * w2 + w3 * w3)
    theta = 0.5 * n * dt
    if theta < _SMALL_ANGLE:
        # sin(theta)/|w| = dt/2 * (1 - theta^2/6 + ...); theta^2 < 1e-16 here
        c = 1.0 - 0.5 * theta * theta
        s = 0.5 * dt
    else:
        c = math.cos(theta)
        s = math.sin(theta) / n
    return product(Q, np.array([c, s * w1, s * w2, s * w3]))


def rotate(Q, v):
    """Vector part of ``Q^-1 * [0, v] * Q``; equal to ``to_rotation(Q).T @ v``."""
    vbar = np.array([0.0, v[0], v[1], v[2]])
    return product(product(inverse(Q), vbar, renormalize=False), Q, renormalize=False)[1:]


def geodesic_distance(Q1, Q2):
    """Rotation angle (rad) between the attitudes represented by Q1 and Q2."""
    c = abs(float(np.dot(Q1, Q2)))
    return 2.0 * math.acos(min(1.0, c))


def positive_scalar(Q):
    """Return the representative of ``+-Q`` with a nonnegative scalar part."""
    return -Q if Q[0] < 0 else Q


def self_test(rng=None, trials=16, tol=1e-12):
    """Check that ``0.5 * gamma(w) @ Q`` equals ``0.5 * Q * [0, w]``.

    The kinematics are written both ways in the literature; this pins the
    Hamilton-product convention used throughout the package.  Raises
    AssertionError on mismatch.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(trials):
        Q = normalize(rng.standard_normal(4))
        w = rng.standard_normal(3)
        lhs = gamma(w) @ Q
        rhs = product(Q, np.array([0.0, *w]), renormalize=False)
        if not np.allclose(lhs, rhs, atol=tol, rtol=0.0):
            raise AssertionError(
                "gamma(w) @ Q does not realize Q * [0, w] under the Hamilton product"
            )


self_test()
