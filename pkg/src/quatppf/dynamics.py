"""Rigid-body truth propagation and the desired attitude trajectory."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import quat


class AssumptionWarning(UserWarning):
    """The desired trajectory exceeded its configured bound ``C_d``."""


def check_inertia(J):
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3):
        raise ValueError(f"inertia must be 3x3, got shape {J.shape}")
    if not np.allclose(J, J.T, atol=1e-12, rtol=0.0):
        raise ValueError("inertia must be symmetric")
    if np.linalg.eigvalsh(J).min() <= 0:
        raise ValueError("inertia must be positive definite")
    return J


@dataclass(frozen=True)
class BodyState:
    Q: np.ndarray
    Omega: np.ndarray


def euler_rate(Omega, J, J_inv, tau):
    """``J^-1 ([J Omega]x Omega + tau)``."""
    return J_inv @ (quat.cross(J @ Omega, Omega) + tau)


def true_step(state, J, tau, dt, J_inv=None, substeps=1):
    """Advance the true body by ``dt`` under constant torque ``tau``.

    Angular velocity uses classical RK4; attitude uses the exact exponential
    step driven by the mean of the substep's initial and final velocity.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if J_inv is None:
        J_inv = np.linalg.inv(J)
    h = dt / substeps
    # plain floats: numpy call overhead dominates at 3x3
    Jl = np.asarray(J, dtype=float).tolist()
    Jil = np.asarray(J_inv, dtype=float).tolist()
    tx, ty, tz = (float(v) for v in tau)

    def rate(w):
        x, y, z = w
        a = Jl[0][0] * x + Jl[0][1] * y + Jl[0][2] * z
        b = Jl[1][0] * x + Jl[1][1] * y + Jl[1][2] * z
        c = Jl[2][0] * x + Jl[2][1] * y + Jl[2][2] * z
        u = (b * z - c * y + tx, c * x - a * z + ty, a * y - b * x + tz)
        return [r[0] * u[0] + r[1] * u[1] + r[2] * u[2] for r in Jil]

    Q = state.Q
    W = [float(v) for v in state.Omega]
    for _ in range(substeps):
        k1 = rate(W)
        k2 = rate([w + 0.5 * h * k for w, k in zip(W, k1)])
        k3 = rate([w + 0.5 * h * k for w, k in zip(W, k2)])
        k4 = rate([w + h * k for w, k in zip(W, k3)])
        W_next = [w + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
                  for w, a, b, c, d in zip(W, k1, k2, k3, k4)]
        Q = quat.exp_step(np.array([0.5 * (w + v) for w, v in zip(W, W_next)]), h, Q)
        W = W_next
    return BodyState(Q, np.array(W))


def coriolis_s(Omega, J):
    """``[J Omega]x - J [Omega]x - [Omega]x J``, a skew-symmetric matrix."""
    Wx = quat.skew(Omega)
    return quat.skew(J @ Omega) - J @ Wx - Wx @ J


@dataclass(frozen=True)
class SinusoidTrajectory:
    """Desired angular acceleration ``amp * sin(freq * t + phase)`` per axis.

    The angular velocity is the exact antiderivative started from ``omega0``.
    Defaults reproduce the reference maneuver used in the experiments.
    """

    amp: tuple = (0.03, 0.05, 0.02)
    freq: tuple = (0.3, 0.4, 0.2)
    phase: tuple = (math.pi / 4, math.pi / 3, math.pi / 2)
    omega0: tuple = (0.0, 0.0, 0.0)

    def accel(self, t):
        return np.array([a * math.sin(w * t + p) for a, w, p in zip(self.amp, self.freq, self.phase)])

    def velocity(self, t):
        return np.array([
            w0 + a / w * (math.cos(p) - math.cos(w * t + p))
            for w0, a, w, p in zip(self.omega0, self.amp, self.freq, self.phase)
        ])


@dataclass(frozen=True)
class DesiredState:
    Q_d: np.ndarray
    Omega_d: np.ndarray
    Omega_d_dot: np.ndarray


def desired_initial(Q_d0, trajectory):
    return DesiredState(np.asarray(Q_d0, dtype=float), trajectory.velocity(0.0), trajectory.accel(0.0))


def desired_step(state, t, dt, trajectory, C_d=None):
    """Advance the reference from ``t`` to ``t + dt``.

    ``Q_d`` is integrated with the exponential step at the analytic midpoint
    velocity; ``Omega_d`` and its derivative are evaluated in closed form.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    Q_d = quat.exp_step(trajectory.velocity(t + 0.5 * dt), dt, state.Q_d)
    t1 = t + dt
    out = DesiredState(Q_d, trajectory.velocity(t1), trajectory.accel(t1))
    if C_d is not None:
        peak = max(quat.norm(out.Omega_d), quat.norm(out.Omega_d_dot))
        if peak > C_d:
            warnings.warn(
                f"desired trajectory magnitude {peak:.4g} exceeds C_d = {C_d} at t = {t1:.4g}",
                AssumptionWarning,
                stacklevel=2,
            )
    return out
