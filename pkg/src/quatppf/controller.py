"""Observer-based attitude tracking controller with an auxiliary quaternion.

The controller sees only observer outputs: the tracking error is formed
from ``Q_hat`` rather than the true attitude, and the body rate enters
through ``R~_o^T Omega_hat``.  An auxiliary quaternion ``Q_a`` follows the
estimated tracking error; the performance funnel is imposed on the
auxiliary error ``Q~_a = Q_a^-1 * Q~_c``.  See :mod:`quatppf.observer` for
the two sign conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .ppf import PpfParams


@dataclass(frozen=True)
class ControllerGains:
    k_w: float
    k_c: float
    k_beta: float
    ppf: PpfParams

    def problems(self):
        out = []
        for name in ("k_w", "k_c", "k_beta"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be a positive constant, got {getattr(self, name)}")
        return out

    def advisories(self):
        # sufficient condition from the stability argument; the reference
        # experiment runs with k_beta = 0.1, ell_a = 1, so this only warns
        if not self.k_beta >= 2.0 * self.ppf.ell:
            return [f"k_beta below 2 * ell_a ({self.k_beta} < {2.0 * self.ppf.ell})"]
        return []


@dataclass(frozen=True)
class ControllerState:
    Q_a: np.ndarray


@dataclass(frozen=True)
class TorqueTerms:
    """The torque and its four summands."""

    tau: np.ndarray
    W_c: np.ndarray
    damping: np.ndarray
    gyroscopic: np.ndarray
    feedforward: np.ndarray


def control_errors(Q_hat, Q_a, Q_d):
    """Return ``(Q~_c, Q~_a)`` with ``Q~_c = Q_d^-1 * Q_hat`` and ``Q~_a = Q_a^-1 * Q~_c``."""
    Q_tilde_c = quat.product(quat.inverse(Q_d), Q_hat)
    return Q_tilde_c, quat.product(quat.inverse(Q_a), Q_tilde_c)


def auxiliary_rate(Q_tilde_a, E_a, Delta_a, gains, sign=1.0, R_tilde_a=None):
    """``beta_a = sign * k_beta (E_a Delta_a + 1) R~_a^T q~_a``."""
    if R_tilde_a is None:
        R_tilde_a = quat.to_rotation(Q_tilde_a)
    return sign * gains.k_beta * (E_a * Delta_a + 1.0) * (R_tilde_a.T @ Q_tilde_a[1:])


def auxiliary_step(state, Q_tilde_a, E_a, Delta_a, gains, dt, sign=1.0):
    beta_a = auxiliary_rate(Q_tilde_a, E_a, Delta_a, gains, sign)
    return ControllerState(quat.exp_step(beta_a, dt, state.Q_a)), beta_a


def control_torque(R_tilde_o, Q_tilde_c, q_tilde_a, E_a, Delta_a, Omega_hat,
                   Omega_d, Omega_d_dot, J, gains, sign=1.0, R_tilde_c=None):
    """Torque command.

    ``W_c = sign * k_w (E_a Delta_a q~_a + q~_c)`` and
    ``tau = -W_c - k_c (R~_o^T Omega_hat - R~_c^T Omega_d)
    + [R~_c^T Omega_d]x J R~_c^T Omega_d + J R~_c^T Omega_d_dot``.
    """
    if R_tilde_c is None:
        R_tilde_c = quat.to_rotation(Q_tilde_c)
    W_c = sign * gains.k_w * (E_a * Delta_a * q_tilde_a + Q_tilde_c[1:])
    Omega_d_body = R_tilde_c.T @ Omega_d
    damping = -gains.k_c * (R_tilde_o.T @ Omega_hat - Omega_d_body)
    gyroscopic = quat.cross(Omega_d_body, J @ Omega_d_body)
    feedforward = J @ (R_tilde_c.T @ Omega_d_dot)
    tau = -W_c + damping + gyroscopic + feedforward
    return TorqueTerms(tau, W_c, damping, gyroscopic, feedforward)


def tracking_velocity_error(Omega, R_tilde_c, Omega_d):
    """``Omega - R~_c^T Omega_d`` (needs the true rate; diagnostics only)."""
    return Omega - R_tilde_c.T @ Omega_d


def lyapunov_lc(E_a, q_tilde_c0, Omega_tilde_c, J, k_w):
    """``E_a^2 + 2 (1 - q~_c0) + Omega~_c^T J Omega~_c / (2 k_w)``."""
    return (E_a * E_a + 2.0 * (1.0 - q_tilde_c0)
            + float(Omega_tilde_c @ J @ Omega_tilde_c) / (2.0 * k_w))
