"""Velocity-free full-state attitude observer on S^3 x R^3.

The observer propagates an attitude estimate ``Q_hat`` and an angular
velocity estimate ``Omega_hat`` from a reconstructed attitude ``Q_y`` and the
applied torque only.  Correction terms are scaled by ``E * Delta + 1`` so the
observation error ``e_o = 1 - |q~_o0|`` stays inside its performance funnel.

Sign conventions
----------------
With the Hamilton product, ``d/dt q~0 = -1/2 q~^T (Omega~ - R~^T W)`` for the
error ``Q~ = Q_hat^-1 * Q``.  A correction ``W = -k (E Delta + 1) R~ q~`` then
pushes ``q~0`` toward -1, not +1.  Two conventions are supported:

``"hamilton"`` (default)
    Error quaternions are first mapped to ``q~0 >= 0`` and the corrections
    use ``+k (E Delta + 1) R~ q~`` (equivalently, the textbook formula
    applied to ``Q~^-1``).  The error converges along the short geodesic to
    ``q~0 = +1``, and the Lyapunov function decreases monotonically.
``"as_printed"``
    Corrections use ``-k (E Delta + 1) R~ q~`` on the raw error quaternion,
    with no representative flip.  Estimates converge to ``q~0 = -1``, which
    is the same rotation, but the Lyapunov function can rise while
    ``q~0 > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .ppf import PpfChannel, PpfParams, evaluate_channel

CONVENTIONS = {"hamilton": 1.0, "as_printed": -1.0}


def correction_sign(convention):
    try:
        return CONVENTIONS[convention]
    except KeyError:
        raise ValueError(
            f"unknown convention {convention!r}; expected one of {sorted(CONVENTIONS)}"
        ) from None


def error_representative(Q_tilde, convention):
    """Error quaternion fed to the corrections under ``convention``."""
    return quat.positive_scalar(Q_tilde) if convention == "hamilton" else Q_tilde


@dataclass(frozen=True)
class ObserverGains:
    k_o: float
    gamma_o: float
    ppf: PpfParams
    gamma_Omega: float = 1.0

    def problems(self):
        out = []
        for name in ("k_o", "gamma_o", "gamma_Omega"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be a positive constant, got {getattr(self, name)}")
        if not self.k_o >= self.ppf.ell:
            out.append(f"k_o must be at least ell_o ({self.k_o} < {self.ppf.ell})")
        return out


@dataclass(frozen=True)
class ObserverState:
    Q_hat: np.ndarray
    Omega_hat: np.ndarray


@dataclass(frozen=True)
class ObserverOutput:
    """Everything the observer computed at one sample, before its update."""

    Q_tilde_o: np.ndarray
    R_tilde_o: np.ndarray
    channel: PpfChannel
    W_Omega: np.ndarray
    W_tau: np.ndarray
    tau_hat: np.ndarray


def observation_errors(state, Q_y):
    Q_tilde_o = quat.product(quat.inverse(state.Q_hat), Q_y)
    return Q_tilde_o, quat.to_rotation(Q_tilde_o)


def correction_terms(Q_tilde_o, E_o, Delta_o, gains, sign=1.0, R_tilde_o=None):
    """Return ``(W_Omega, W_tau)``; both lie along ``R~_o q~_o``."""
    if R_tilde_o is None:
        R_tilde_o = quat.to_rotation(Q_tilde_o)
    direction = sign * (E_o * Delta_o + 1.0) * (R_tilde_o @ Q_tilde_o[1:])
    return gains.k_o * direction, gains.gamma_o * direction


def observer_step(state, Q_y, tau, J, gains, t, dt, epsilon=1e-3,
                  convention="hamilton", J_inv=None):
    """One discrete observer update.

    ``tau`` is the most recent torque applied to the body.  Returns the next
    state and the intermediate quantities of this sample.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    sign = correction_sign(convention)
    if J_inv is None:
        J_inv = np.linalg.inv(J)
    Q_tilde_o, R_o = observation_errors(state, Q_y)
    channel = evaluate_channel(Q_tilde_o[0], t, gains.ppf, epsilon)
    Q_err = error_representative(Q_tilde_o, convention)
    W_Omega, W_tau = correction_terms(Q_err, channel.E, channel.Delta, gains, sign, R_o)

    tau_hat = R_o @ tau
    # J_hat = R J R^T; evaluate J_hat^-1 (...) in the rotated frame, where
    # R^T (a x b) = (R^T a) x (R^T b) and R^T tau_hat = tau
    W = state.Omega_hat
    w, w_Omega, w_tau = (R_o.T @ np.array([W, W_Omega, W_tau]).T).T
    Omega_dot = R_o @ (J_inv @ (
        quat.cross(J @ w, w) + tau + J @ quat.cross(w, w_Omega) + w_tau
    ))
    nxt = ObserverState(
        Q_hat=quat.exp_step(W + W_Omega, dt, state.Q_hat),
        Omega_hat=W + dt * Omega_dot,
    )
    return nxt, ObserverOutput(Q_tilde_o, R_o, channel, W_Omega, W_tau, tau_hat)


def velocity_error(Omega, R_tilde_o, Omega_hat):
    """``Omega - R~_o^T Omega_hat`` (needs the true rate; diagnostics only)."""
    return Omega - R_tilde_o.T @ Omega_hat


def lyapunov_vo(Q_tilde_o, Omega_tilde_o, E_o, J, gamma_Omega):
    """``E_o^2 + (1 - q~_o0) + Omega~^T J Omega~ / (2 gamma_Omega)``."""
    return (E_o * E_o + (1.0 - Q_tilde_o[0])
            + float(Omega_tilde_o @ J @ Omega_tilde_o) / (2.0 * gamma_Omega))
