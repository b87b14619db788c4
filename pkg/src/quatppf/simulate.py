"""Discrete closed-loop simulation: truth, sensing, observer and controller.

Each sample ``k`` (``t_k = k * dt``):

1. synthesize two noisy body vectors from the true attitude, add their cross
   product, and reconstruct ``Q_y``;
2. run the observer on ``Q_y`` and the previously applied torque;
3. update the auxiliary quaternion and compute the new torque;
4. hold that torque for one period while the true body and the reference
   are propagated.

Only ``Q_y`` and the torque cross from the plant to the estimator/controller
pair (:class:`ObserverController`); the true rate is read solely for logged
diagnostics.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, quat, sensing
from .controller import (
    ControllerState, auxiliary_rate, control_errors, control_torque,
    lyapunov_lc, tracking_velocity_error,
)
from .dynamics import BodyState, desired_initial, desired_step, true_step
from .observer import (
    ObserverState, correction_sign, error_representative, lyapunov_vo,
    observer_step, velocity_error,
)
from .ppf import evaluate_channel


class NumericalAbort(RuntimeError):
    """The closed loop produced a non-finite value."""

    def __init__(self, step, records):
        self.step = step
        self.records = records
        last = records[-1].k if records else None
        super().__init__(f"non-finite state at step {step}; last good record index {last}")


@dataclass
class SimLogRecord:
    """Every quantity of one sample.  Vector fields are numpy arrays."""

    k: int
    t: float
    Q: np.ndarray
    Omega: np.ndarray
    Q_d: np.ndarray
    Omega_d: np.ndarray
    Q_y: np.ndarray
    Q_hat: np.ndarray
    Omega_hat: np.ndarray
    Q_a: np.ndarray
    q_tilde_o0: float
    q_tilde_o_norm: float
    q_tilde_c0: float
    q_tilde_c_norm: float
    q_tilde_a0: float
    q_tilde_a_norm: float
    e_o: float
    xi_o: float
    E_o: float
    Delta_o: float
    e_a: float
    xi_a: float
    E_a: float
    Delta_a: float
    W_Omega: np.ndarray
    W_tau: np.ndarray
    beta_a: np.ndarray
    W_c: np.ndarray
    tau: np.ndarray
    Omega_tilde_o_norm: float
    Omega_tilde_c_norm: float
    V_o: float
    L_c: float
    clamp_active_o: bool
    clamp_active_a: bool
    b1: np.ndarray
    b2: np.ndarray
    q_tilde_c_true_norm: float
    Omega_err_d_norm: float


# (field name, width) with width 0 meaning scalar
_VECTOR_WIDTH = {
    "Q": 4, "Omega": 3, "Q_d": 4, "Omega_d": 3, "Q_y": 4, "Q_hat": 4,
    "Omega_hat": 3, "Q_a": 4, "W_Omega": 3, "W_tau": 3, "beta_a": 3,
    "W_c": 3, "tau": 3, "b1": 3, "b2": 3,
}
_INT_FIELDS = {"k"}
_BOOL_FIELDS = {"clamp_active_o", "clamp_active_a"}
LAYOUT = [(f.name, _VECTOR_WIDTH.get(f.name, 0)) for f in fields(SimLogRecord)]


def csv_header():
    cols = []
    for name, width in LAYOUT:
        cols += [f"{name}_{i}" for i in range(width)] if width else [name]
    return cols


@dataclass(frozen=True)
class StepResult:
    """Output of :meth:`ObserverController.step` for one sample."""

    tau: np.ndarray
    obs: object
    Q_tilde_c: np.ndarray
    Q_tilde_a: np.ndarray
    channel_a: object
    beta_a: np.ndarray
    torque: object
    Omega_hat: np.ndarray
    Q_hat: np.ndarray
    Q_a: np.ndarray


class ObserverController:
    """Estimator and tracking controller driven only by ``Q_y`` and the torque.

    The object owns the observer state, the auxiliary quaternion and the last
    applied torque; :meth:`step` consumes one reconstructed attitude and the
    reference at that sample and returns the next torque.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.J = cfg.inertia
        self.J_inv = np.linalg.inv(self.J)
        self.obs_gains = cfg.observer_gains
        self.ctl_gains = cfg.controller_gains
        self.convention = cfg.convention
        self.sign = correction_sign(cfg.convention)
        self.observer = ObserverState(cfg.quaternion("Qhat0"), cfg.vector("Omega_hat0"))
        self.aux = ControllerState(cfg.quaternion("Qa0"))
        self.tau = cfg.vector("tau0")

    def step(self, t, Q_y, desired):
        cfg = self.cfg
        dt = cfg.dt
        Q_hat, Omega_hat = self.observer.Q_hat, self.observer.Omega_hat
        Q_a = self.aux.Q_a

        self.observer, obs = observer_step(
            self.observer, Q_y, self.tau, self.J, self.obs_gains, t, dt,
            cfg.epsilon_clamp, self.convention, self.J_inv,
        )

        Q_tilde_c, Q_tilde_a = control_errors(Q_hat, Q_a, desired.Q_d)
        channel_a = evaluate_channel(Q_tilde_a[0], t, self.ctl_gains.ppf, cfg.epsilon_clamp)
        Q_a_err = error_representative(Q_tilde_a, self.convention)
        beta_a = auxiliary_rate(Q_a_err, channel_a.E, channel_a.Delta, self.ctl_gains, self.sign)
        self.aux = ControllerState(quat.exp_step(beta_a, dt, Q_a))

        torque = control_torque(
            obs.R_tilde_o, Q_tilde_c, Q_a_err[1:], channel_a.E, channel_a.Delta,
            Omega_hat, desired.Omega_d, desired.Omega_d_dot, self.J, self.ctl_gains,
            self.sign,
        )
        tau = torque.tau
        if cfg.tau_limit is not None:
            tau = np.clip(tau, -cfg.tau_limit, cfg.tau_limit)
        self.tau = tau
        return StepResult(tau, obs, Q_tilde_c, Q_tilde_a, channel_a, beta_a, torque,
                          Omega_hat, Q_hat, Q_a)


def measure(Q, refs, noise):
    """Noisy body vectors for ``refs`` and the reconstructed attitude."""
    pairs = sensing.augment_third(sensing.synthesize(Q, refs, noise))
    return pairs, sensing.reconstruct(pairs)


def _finite(*arrays):
    # a sum is non-finite whenever any term is
    return math.isfinite(sum(sum(a.tolist()) for a in arrays))


def run(cfg, measurements=None):
    """Simulate ``cfg.n_steps`` samples and return one record per sample.

    ``measurements`` optionally replaces the reconstructed attitudes: a
    sequence of ``Q_y`` values, one per sample.  The true body is still
    simulated and logged, but the estimator sees only the supplied stream.
    """
    J = cfg.inertia
    J_inv = np.linalg.inv(J)
    refs = cfg.refs
    noise = sensing.NoiseModel(cfg.noise_std, cfg.seed)
    traj = cfg.trajectory
    dt = cfg.dt

    truth = BodyState(cfg.quaternion("Q0"), cfg.vector("Omega0"))
    desired = desired_initial(cfg.quaternion("Qd0"), traj)
    loop = ObserverController(cfg)
    k_w, gamma_Omega = cfg.k_w, cfg.gamma_Omega

    records = []
    for k in range(cfg.n_steps):
        t = k * dt
        pairs, Q_y = measure(truth.Q, refs, noise)
        if measurements is not None:
            Q_y = np.asarray(measurements[k], dtype=float)
        if not _finite(Q_y):
            raise NumericalAbort(k, records)

        s = loop.step(t, Q_y, desired)
        obs = s.obs

        # diagnostics against the truth
        Q_o = quat.positive_scalar(obs.Q_tilde_o)
        Omega_tilde_o = velocity_error(truth.Omega, obs.R_tilde_o, s.Omega_hat)
        Q_c_true = quat.product(quat.inverse(desired.Q_d), truth.Q)
        Omega_tilde_c = tracking_velocity_error(truth.Omega, quat.to_rotation(Q_c_true), desired.Omega_d)
        V_o = lyapunov_vo(Q_o, Omega_tilde_o, obs.channel.E, J, gamma_Omega)
        L_c = lyapunov_lc(s.channel_a.E, Q_c_true[0], Omega_tilde_c, J, k_w)

        rec = SimLogRecord(
            k=k, t=t, Q=truth.Q, Omega=truth.Omega, Q_d=desired.Q_d, Omega_d=desired.Omega_d,
            Q_y=Q_y, Q_hat=s.Q_hat, Omega_hat=s.Omega_hat, Q_a=s.Q_a,
            q_tilde_o0=float(obs.Q_tilde_o[0]), q_tilde_o_norm=float(quat.norm(obs.Q_tilde_o[1:])),
            q_tilde_c0=float(s.Q_tilde_c[0]), q_tilde_c_norm=float(quat.norm(s.Q_tilde_c[1:])),
            q_tilde_a0=float(s.Q_tilde_a[0]), q_tilde_a_norm=float(quat.norm(s.Q_tilde_a[1:])),
            e_o=obs.channel.e, xi_o=obs.channel.xi, E_o=obs.channel.E, Delta_o=obs.channel.Delta,
            e_a=s.channel_a.e, xi_a=s.channel_a.xi, E_a=s.channel_a.E, Delta_a=s.channel_a.Delta,
            W_Omega=obs.W_Omega, W_tau=obs.W_tau, beta_a=s.beta_a, W_c=s.torque.W_c, tau=s.tau,
            Omega_tilde_o_norm=float(quat.norm(Omega_tilde_o)),
            Omega_tilde_c_norm=float(quat.norm(Omega_tilde_c)),
            V_o=V_o, L_c=L_c,
            clamp_active_o=obs.channel.clamped, clamp_active_a=s.channel_a.clamped,
            b1=pairs[0].b, b2=pairs[1].b,
            q_tilde_c_true_norm=float(quat.norm(Q_c_true[1:])),
            Omega_err_d_norm=float(quat.norm(truth.Omega - desired.Omega_d)),
        )
        if not (_finite(s.tau, loop.observer.Q_hat, loop.observer.Omega_hat, loop.aux.Q_a)
                and math.isfinite(V_o) and math.isfinite(L_c)):
            raise NumericalAbort(k, records)
        records.append(rec)

        truth = true_step(truth, J, s.tau, dt, J_inv, cfg.substeps)
        if not _finite(truth.Q, truth.Omega):
            raise NumericalAbort(k + 1, records)
        desired = desired_step(desired, t, dt, traj, cfg.C_d)
    return records


def summarize(records, cfg=None):
    """Final error norms and funnel statistics of a run."""
    last = records[-1]
    out = {
        "steps": len(records),
        "t_final": last.t,
        "q_tilde_o_norm": last.q_tilde_o_norm,
        "q_tilde_c_norm": last.q_tilde_c_norm,
        "q_tilde_a_norm": last.q_tilde_a_norm,
        "Omega_tilde_o_norm": last.Omega_tilde_o_norm,
        "Omega_err_d_norm": last.Omega_err_d_norm,
        "envelope_violations_o": int(sum(r.e_o >= r.xi_o for r in records)),
        "envelope_violations_a": int(sum(r.e_a >= r.xi_a for r in records)),
        "clamps_o": int(sum(r.clamp_active_o for r in records)),
        "clamps_a": int(sum(r.clamp_active_a for r in records)),
        "max_abs_tau": max(float(np.max(np.abs(r.tau))) for r in records),
    }
    if cfg is not None:
        out["seed"] = cfg.seed
    return out


def window_mean(records, name, t_start, t_end=math.inf):
    """Mean of scalar field ``name`` over records with ``t_start <= t <= t_end``."""
    vals = [getattr(r, name) for r in records if t_start <= r.t <= t_end]
    if not vals:
        raise ValueError(f"no records in [{t_start}, {t_end}]")
    return float(np.mean(vals))


# start of the steady-state averaging window, s
STEADY_START = 25.0


def _sweep_one(cfg, out_dir=None):
    records = run(cfg)
    if out_dir is not None:
        write_log(records, Path(out_dir) / f"seed_{cfg.seed}.csv", cfg)
    summary = summarize(records, cfg)
    # None when the run ends before the window opens
    steady = None
    if records and records[-1].t >= STEADY_START:
        steady = window_mean(records, "q_tilde_c_norm", STEADY_START)
    summary["steady_q_tilde_c_norm"] = steady
    return summary


def sweep(configs, workers=None, out_dir=None):
    """Run independent configs in worker processes; one summary per config, in order.

    Each summary carries ``steady_q_tilde_c_norm``, the mean of ``|q~_c|``
    from ``STEADY_START`` to the end of the run.
    """
    configs = list(configs)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, configs, [out_dir] * len(configs)))


def _format(value):
    return repr(float(value))


def record_row(rec):
    row = []
    for name, width in LAYOUT:
        v = getattr(rec, name)
        if width:
            row += [_format(x) for x in v]
        elif name in _INT_FIELDS:
            row.append(str(int(v)))
        elif name in _BOOL_FIELDS:
            row.append("1" if v else "0")
        else:
            row.append(_format(v))
    return row


def write_log(records, path, cfg=None):
    """Write records as CSV, preceded by ``#`` lines with version, seed and config digest."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# quatppf {__version__}\n")
        if cfg is not None:
            fh.write(f"# seed={cfg.seed}\n")
            fh.write(f"# config_sha256={cfg.digest()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header())
        for rec in records:
            writer.writerow(record_row(rec))


def read_log(path):
    """Parse a file written by :func:`write_log`; returns ``(meta, records)``."""
    meta = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            text = line[1:].strip()
            if "=" in text:
                key, value = text.split("=", 1)
                meta[key.strip()] = value.strip()
            elif text:
                meta.setdefault("tool", text)
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    if header != csv_header():
        raise ValueError(f"{path}: unexpected CSV header")
    records = []
    for row in reader:
        i = 0
        kwargs = {}
        for name, width in LAYOUT:
            if width:
                kwargs[name] = np.array([float(x) for x in row[i:i + width]])
                i += width
            else:
                cell = row[i]
                i += 1
                if name in _INT_FIELDS:
                    kwargs[name] = int(cell)
                elif name in _BOOL_FIELDS:
                    kwargs[name] = cell == "1"
                else:
                    kwargs[name] = float(cell)
        records.append(SimLogRecord(**kwargs))
    return meta, records
