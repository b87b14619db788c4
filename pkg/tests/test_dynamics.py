import math
import warnings

import numpy as np
import pytest

from quatppf import quat
from quatppf.dynamics import (
    AssumptionWarning, BodyState, DesiredState, SinusoidTrajectory, check_inertia,
    coriolis_s, desired_initial, desired_step, true_step,
)

J_REF = np.diag([0.016, 0.015, 0.03])


def invariants(state, J):
    W = state.Omega
    return 0.5 * W @ J @ W, np.linalg.norm(J @ W)


def test_equilibrium_is_fixed():
    s = BodyState(quat.normalize(np.array([0.2, 0.4, -0.1, 0.8])), np.zeros(3))
    out = true_step(s, J_REF, np.zeros(3), 0.005)
    np.testing.assert_allclose(out.Q, s.Q, atol=1e-15)
    np.testing.assert_array_equal(out.Omega, np.zeros(3))


def test_spherical_inertia_conserves_rate():
    J = 0.02 * np.eye(3)
    W0 = np.array([0.4, -1.1, 0.7])
    s = BodyState(quat.IDENTITY, W0)
    for _ in range(1000):
        s = true_step(s, J, np.zeros(3), 0.005)
    assert abs(np.linalg.norm(s.Omega) - np.linalg.norm(W0)) < 1e-9


def test_constant_rate_attitude_is_exact():
    # spherical body spinning at constant rate: Q(t) = Q0 * [cos(|w|t/2), sin(|w|t/2) w/|w|]
    W = np.array([0.3, -0.5, 0.9])
    s = BodyState(quat.IDENTITY, W)
    for _ in range(400):
        s = true_step(s, np.eye(3), np.zeros(3), 0.005)
    n = np.linalg.norm(W)
    half = 0.5 * n * 2.0
    np.testing.assert_allclose(s.Q, [math.cos(half), *(math.sin(half) * W / n)], atol=1e-12)


def test_torque_free_reference_inertia_conserves_energy_and_momentum():
    s = BodyState(quat.IDENTITY, np.array([0.2, 0.3, 0.3]))
    T0, H0 = invariants(s, J_REF)
    for _ in range(10000):
        s = true_step(s, J_REF, np.zeros(3), 1e-4)
    T1, H1 = invariants(s, J_REF)
    assert abs(T1 - T0) < 1e-7
    assert abs(H1 - H0) < 1e-7


def test_torque_free_drift_per_second_at_control_rate():
    s = BodyState(quat.IDENTITY, np.array([0.2, 0.3, 0.3]))
    T0, H0 = invariants(s, J_REF)
    for _ in range(200):
        s = true_step(s, J_REF, np.zeros(3), 0.005)
    T1, H1 = invariants(s, J_REF)
    assert abs(T1 - T0) / T0 < 1e-7
    assert abs(H1 - H0) / H0 < 1e-7


def test_substeps_agree_with_single_step():
    s = BodyState(quat.IDENTITY, np.array([0.2, 0.3, 0.3]))
    tau = np.array([0.01, -0.02, 0.005])
    a = true_step(s, J_REF, tau, 0.005)
    b = true_step(s, J_REF, tau, 0.005, substeps=8)
    np.testing.assert_allclose(a.Omega, b.Omega, atol=1e-10)
    # the mean-rate attitude update is second order: O(h^3 |w| |w_dot|) per step
    np.testing.assert_allclose(a.Q, b.Q, atol=1e-8)


def test_true_step_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        true_step(BodyState(quat.IDENTITY, np.zeros(3)), J_REF, np.zeros(3), -0.1)


def test_check_inertia():
    np.testing.assert_array_equal(check_inertia(J_REF), J_REF)
    with pytest.raises(ValueError, match="symmetric"):
        check_inertia([[1, 0.1, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError, match="positive definite"):
        check_inertia(np.diag([1.0, 0.0, 1.0]))
    with pytest.raises(ValueError, match="3x3"):
        check_inertia(np.eye(2))


def test_desired_acceleration_at_zero():
    traj = SinusoidTrajectory()
    np.testing.assert_allclose(traj.accel(0.0), [0.03 * math.sin(math.pi / 4),
                                                 0.05 * math.sin(math.pi / 3),
                                                 0.02 * math.sin(math.pi / 2)], rtol=1e-15)
    np.testing.assert_allclose(traj.accel(0.0), [0.02121, 0.04330, 0.02000], atol=5e-6)


def test_still_reference_keeps_attitude():
    traj = SinusoidTrajectory(amp=(0.0, 0.0, 0.0))
    d = desired_initial(quat.IDENTITY, traj)
    for k in range(100):
        d = desired_step(d, k * 0.005, 0.005, traj)
    np.testing.assert_array_equal(d.Q_d, quat.IDENTITY)
    np.testing.assert_array_equal(d.Omega_d, np.zeros(3))


def test_analytic_rate_matches_rk4_of_acceleration():
    traj = SinusoidTrajectory()
    h = 0.005
    W = traj.velocity(0.0)
    for k in range(6000):
        t = k * h
        k1 = traj.accel(t)
        k2 = traj.accel(t + 0.5 * h)
        k4 = traj.accel(t + h)
        W = W + h / 6.0 * (k1 + 4.0 * k2 + k4)
    np.testing.assert_allclose(W, traj.velocity(30.0), atol=1e-8)


def test_velocity_is_antiderivative():
    traj = SinusoidTrajectory(omega0=(0.1, -0.2, 0.05))
    np.testing.assert_allclose(traj.velocity(0.0), traj.omega0, atol=1e-16)
    for t in np.linspace(0, 30, 17):
        fd = (traj.velocity(t + 1e-6) - traj.velocity(t - 1e-6)) / 2e-6
        np.testing.assert_allclose(fd, traj.accel(t), atol=1e-9)


def test_reference_bounds_over_run():
    traj = SinusoidTrajectory()
    W0 = traj.velocity(0.0)
    ts = np.arange(0.0, 30.0 + 1e-9, 0.005)
    acc = max(np.linalg.norm(traj.accel(t)) for t in ts)
    vel = max(np.linalg.norm(traj.velocity(t) - W0) for t in ts)
    assert acc <= 0.05 * math.sqrt(3)
    assert acc <= 0.0617
    assert vel <= 0.26


def test_desired_attitude_stays_unit():
    traj = SinusoidTrajectory()
    d = desired_initial(quat.IDENTITY, traj)
    for k in range(6000):
        d = desired_step(d, k * 0.005, 0.005, traj, C_d=0.5)
    assert abs(np.linalg.norm(d.Q_d) - 1.0) < 1e-12


def test_desired_bound_warning():
    traj = SinusoidTrajectory(amp=(3.0, 0.0, 0.0), freq=(1.0, 1.0, 1.0))
    d = desired_initial(quat.IDENTITY, traj)
    with pytest.warns(AssumptionWarning, match="C_d"):
        desired_step(d, 0.0, 0.005, traj, C_d=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        desired_step(d, 0.0, 0.005, traj, C_d=None)


def test_desired_state_fields():
    d = desired_initial(quat.IDENTITY, SinusoidTrajectory())
    assert isinstance(d, DesiredState)
    np.testing.assert_array_equal(d.Omega_d, np.zeros(3))


def test_coriolis_zero_rate():
    np.testing.assert_array_equal(coriolis_s(np.zeros(3), J_REF), np.zeros((3, 3)))


def test_coriolis_is_skew(rng):
    for _ in range(200):
        W, x = rng.standard_normal(3), rng.standard_normal(3)
        S = coriolis_s(W, J_REF)
        np.testing.assert_allclose(S + S.T, np.zeros((3, 3)), atol=1e-12)
        assert abs(x @ S @ x) < 1e-12


def test_coriolis_identity_inertia(rng):
    W = rng.standard_normal(3)
    np.testing.assert_allclose(coriolis_s(W, np.eye(3)), -quat.skew(W), atol=1e-15)
    # three-term definition with skew matrices built column by column from np.cross
    def sk(v):
        return np.column_stack([np.cross(v, e) for e in np.eye(3)])
    Wx = sk(W)
    np.testing.assert_allclose(sk(J_REF @ W) - J_REF @ Wx - Wx @ J_REF, coriolis_s(W, J_REF), atol=1e-15)
