"""Synthetic vector measurements and attitude reconstruction (Wahba's problem)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quat

COLLINEAR_TOL = 1e-6
RANK_TOL = 1e-6


class RankDeficiencyError(ValueError):
    """The observation vectors do not span three dimensions."""


class ConvergenceError(RuntimeError):
    """The symmetric eigen-solver failed on the attitude profile matrix."""


@dataclass(frozen=True)
class VectorPair:
    """A unit inertial reference ``r`` and its unit body-frame observation ``b``."""

    r: np.ndarray
    b: np.ndarray


class NoiseModel:
    """Zero-mean Gaussian noise added per axis to raw body vectors.

    Draws come from numpy's PCG64 generator seeded with ``seed``, so a given
    seed reproduces the same stream bit for bit.
    """

    def __init__(self, std=0.0, seed=0):
        if std < 0:
            raise ValueError(f"noise std must be nonnegative, got {std}")
        self.std = float(std)
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)

    def draw(self, n):
        if self.std == 0.0:
            return np.zeros((n, 3))
        return self.std * self.rng.standard_normal((n, 3))


def unit(v):
    x, y, z = v.tolist() if isinstance(v, np.ndarray) else (float(c) for c in v)
    n = math.sqrt(x * x + y * y + z * z)
    if n == 0.0:
        raise RankDeficiencyError("zero-length observation vector")
    return np.array([x / n, y / n, z / n])


def check_refs(refs):
    """Raise RankDeficiencyError unless the first two references are non-collinear."""
    if len(refs) < 2:
        raise RankDeficiencyError(f"need at least two reference vectors, got {len(refs)}")
    r1, r2 = unit(refs[0]), unit(refs[1])
    if abs(float(r1 @ r2)) > 1.0 - COLLINEAR_TOL:
        raise RankDeficiencyError("reference vectors r1 and r2 are collinear")


def synthesize(Q_true, inertial_refs, noise):
    """Body-frame observations ``b_i = R(Q)^T r_i + n_i``, normalized with ``r_i``."""
    refs = np.asarray(inertial_refs, dtype=float)
    if refs.ndim != 2 or len(refs) < 2:
        raise RankDeficiencyError(f"need at least two reference vectors, got {len(refs)}")
    # row i of refs @ R is (R^T r_i)^T
    raw = refs @ quat.to_rotation(Q_true) + noise.draw(len(refs))
    both = np.vstack((refs, raw))
    lengths = np.sqrt((both * both).sum(axis=1))
    if not lengths.all():
        raise RankDeficiencyError("zero-length observation vector")
    both = both / lengths[:, None]
    r, b = both[:len(refs)], both[len(refs):]
    if abs(float(r[0] @ r[1])) > 1.0 - COLLINEAR_TOL:
        raise RankDeficiencyError("reference vectors r1 and r2 are collinear")
    return [VectorPair(ri, bi) for ri, bi in zip(r, b)]


def augment_third(pairs):
    """Append the pair ``(r1 x r2, b1 x b2)`` so two observations span 3D."""
    if len(pairs) != 2:
        raise ValueError(f"expected two pairs, got {len(pairs)}")
    p1, p2 = pairs
    for a, b in ((p1.r, p2.r), (p1.b, p2.b)):
        if abs(float(a @ b)) > 1.0 - COLLINEAR_TOL:
            raise RankDeficiencyError("observation vectors are collinear")
    third = VectorPair(unit(quat.cross(p1.r, p2.r)), unit(quat.cross(p1.b, p2.b)))
    return [p1, p2, third]


def _left(v):
    # matrix of p -> [0, v] * p
    v1, v2, v3 = v
    return np.array([
        [0.0, -v1, -v2, -v3],
        [v1, 0.0, -v3, v2],
        [v2, v3, 0.0, -v1],
        [v3, -v2, v1, 0.0],
    ])


def profile_matrix_products(pairs):
    """Symmetric 4x4 ``K`` with ``Q^T K Q = sum_i r_i . R(Q) b_i``, built from products.

    ``r . (Q b Q^-1) = <[0,r] Q, Q [0,b]>``, and both products are linear in
    Q: left multiplication by ``[0, r]`` and right multiplication by
    ``[0, b]`` (which is ``quat.gamma(b)``).  Slower than
    :func:`profile_matrix`; kept as an independent construction.
    """
    K = np.zeros((4, 4))
    for p in pairs:
        K += _left(p.r).T @ quat.gamma(p.b)
    return K


def profile_matrix(M_I, M_B):
    """Davenport matrix from stacked unit columns.

    With ``M = sum_i b_i r_i^T``, ``tr(R(Q) M) = Q^T K Q`` for
    ``K = [[tr M, z^T], [z, M + M^T - tr(M) I]]`` and ``z`` the axial vector
    of ``M - M^T``.
    """
    (m00, m01, m02), (m10, m11, m12), (m20, m21, m22) = (M_B @ M_I.T).tolist()
    tr = m00 + m11 + m22
    z1, z2, z3 = m12 - m21, m20 - m02, m01 - m10
    s01, s02, s12 = m01 + m10, m02 + m20, m12 + m21
    return np.array([
        [tr, z1, z2, z3],
        [z1, 2 * m00 - tr, s01, s02],
        [z2, s01, 2 * m11 - tr, s12],
        [z3, s02, s12, 2 * m22 - tr],
    ])


def _clearly_full_rank(M):
    # For three unit columns s1 * s2 <= |M|_F^2 / 2 = 1.5, so the smallest
    # singular value is at least |det M| / 1.5; skip the SVD when that clears
    # the tolerance.
    if M.shape != (3, 3):
        return False
    (a, b, c), (d, e, f), (g, h, i) = M.tolist()
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return abs(det) > 1.5 * RANK_TOL


def reconstruct(pairs):
    """Optimal attitude for equal-weight Wahba loss via Davenport's q-method.

    Returns the eigenvector of the largest eigenvalue of the profile matrix,
    signed so that its scalar part is nonnegative.
    """
    if len(pairs) < 3:
        raise RankDeficiencyError(f"need at least three pairs, got {len(pairs)}")
    M_I = np.array([p.r for p in pairs]).T
    M_B = np.array([p.b for p in pairs]).T
    for name, M in (("inertial", M_I), ("body", M_B)):
        if _clearly_full_rank(M):
            continue
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] <= RANK_TOL:
            raise RankDeficiencyError(
                f"{name} observation matrix has rank < 3 (smallest singular value {sv[-1]:.3g})"
            )
    K = profile_matrix(M_I, M_B)
    try:
        vals, vecs = np.linalg.eigh(K)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigen-decomposition of the profile matrix failed: {exc}") from exc
    Q = quat.normalize(vecs[:, np.argmax(vals)])
    return quat.positive_scalar(Q)


def wahba_loss(Q, pairs):
    R_T = quat.to_rotation(Q).T
    return sum(float(np.sum((p.b - R_T @ p.r) ** 2)) for p in pairs)
