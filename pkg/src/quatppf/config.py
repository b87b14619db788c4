"""Simulation configuration, validation and the YAML config file format."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, fields

import numpy as np
import yaml

from . import quat, sensing
from .controller import ControllerGains
from .dynamics import SinusoidTrajectory
from .observer import CONVENTIONS, ObserverGains
from .ppf import PpfParams, constrained_error, ppf_problems

_IDENTITY = (1.0, 0.0, 0.0, 0.0)
_ZERO = (0.0, 0.0, 0.0)


class ValidationError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.problems))


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    """All inputs of one closed-loop run.

    Defaults are the reference experiment: 200 Hz for 30 s, two inertial
    references observed with 0.08 noise, a large initial attitude error and
    the sinusoidal reference maneuver.
    """

    dt: float = 0.005
    duration: float = 30.0
    seed: int = 0
    noise_std: float = 0.08
    inertial_refs: tuple = ((1.0, 1.2, 1.3), (0.0, 0.0, 1.0))
    J: tuple = ((0.016, 0.0, 0.0), (0.0, 0.015, 0.0), (0.0, 0.0, 0.03))
    Q0: tuple = (0.0087, 0.3906, 0.1302, 0.9113)
    Qd0: tuple = _IDENTITY
    Qa0: tuple = _IDENTITY
    Qhat0: tuple = _IDENTITY
    Omega0: tuple = (0.2, 0.3, 0.3)
    Omega_hat0: tuple = _ZERO
    Omega_d0: tuple = _ZERO
    tau0: tuple = _ZERO
    desired_amp: tuple = (0.03, 0.05, 0.02)
    desired_freq: tuple = (0.3, 0.4, 0.2)
    desired_phase: tuple = (math.pi / 4, math.pi / 3, math.pi / 2)
    C_d: float | None = 0.5
    k_o: float = 10.0
    gamma_o: float = 0.1
    gamma_Omega: float = 1.0
    k_w: float = 1.0
    k_c: float = 0.1
    k_beta: float = 0.1
    xi0_o: float = 1.7
    xi_inf_o: float = 0.05
    ell_o: float = 1.0
    delta_o: float = 1.7
    xi0_a: float = 1.7
    xi_inf_a: float = 0.05
    ell_a: float = 1.0
    delta_a: float = 1.7
    epsilon_clamp: float = 1e-3
    substeps: int = 1
    tau_limit: float | None = None
    convention: str = "hamilton"

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    # derived objects; validation happens in validate(), not here

    @property
    def inertia(self):
        return np.array(self.J, dtype=float)

    def quaternion(self, name):
        return quat.normalize(np.array(getattr(self, name), dtype=float))

    def vector(self, name):
        return np.array(getattr(self, name), dtype=float)

    @property
    def refs(self):
        return [np.array(r, dtype=float) for r in self.inertial_refs]

    @property
    def trajectory(self):
        return SinusoidTrajectory(
            tuple(self.desired_amp), tuple(self.desired_freq),
            tuple(self.desired_phase), tuple(self.Omega_d0),
        )

    @property
    def ppf_o(self):
        return PpfParams(self.xi0_o, self.xi_inf_o, self.ell_o, self.delta_o)

    @property
    def ppf_a(self):
        return PpfParams(self.xi0_a, self.xi_inf_a, self.ell_a, self.delta_a)

    @property
    def observer_gains(self):
        return ObserverGains(self.k_o, self.gamma_o, self.ppf_o, self.gamma_Omega)

    @property
    def controller_gains(self):
        return ControllerGains(self.k_w, self.k_c, self.k_beta, self.ppf_a)

    @property
    def n_steps(self):
        # tolerate duration/dt landing a hair above an integer
        return int(math.ceil(self.duration / self.dt - 1e-9))

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        """SHA-256 of the canonical JSON form of the configuration."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def initial_errors(cfg):
    """Noise-free ``(e_o(0), e_a(0))`` implied by the initial attitudes."""
    Q0, Qd0, Qa0, Qhat0 = (cfg.quaternion(n) for n in ("Q0", "Qd0", "Qa0", "Qhat0"))
    Q_tilde_o = quat.product(quat.inverse(Qhat0), Q0)
    Q_tilde_c = quat.product(quat.inverse(Qd0), Qhat0)
    Q_tilde_a = quat.product(quat.inverse(Qa0), Q_tilde_c)
    return constrained_error(Q_tilde_o[0]), constrained_error(Q_tilde_a[0])


def _shape_problems(cfg):
    out = []
    shapes = {"J": (3, 3), "Q0": (4,), "Qd0": (4,), "Qa0": (4,), "Qhat0": (4,),
              "Omega0": (3,), "Omega_hat0": (3,), "Omega_d0": (3,), "tau0": (3,),
              "desired_amp": (3,), "desired_freq": (3,), "desired_phase": (3,)}
    for name, shape in shapes.items():
        try:
            arr = np.array(getattr(cfg, name), dtype=float)
        except (TypeError, ValueError):
            out.append(f"{name} must be numeric")
            continue
        if arr.shape != shape:
            out.append(f"{name} must have shape {shape}, got {arr.shape}")
        elif not np.all(np.isfinite(arr)):
            out.append(f"{name} must be finite")
        elif len(shape) == 1 and shape[0] == 4 and np.linalg.norm(arr) == 0:
            out.append(f"{name} must be a nonzero quaternion")
    try:
        refs = np.array(cfg.inertial_refs, dtype=float)
        if refs.ndim != 2 or refs.shape[1] != 3 or refs.shape[0] != 2:
            out.append(f"inertial_refs must be two 3-vectors, got shape {refs.shape}")
    except (TypeError, ValueError):
        out.append("inertial_refs must be numeric")
    return out


def check(cfg):
    """Return ``(problems, advisories)`` for ``cfg`` without raising."""
    problems = _shape_problems(cfg)
    if problems:
        return problems, []
    advisories = []
    if not cfg.dt > 0:
        problems.append(f"dt must be positive, got {cfg.dt}")
    if not cfg.duration > cfg.dt:
        problems.append(f"duration must exceed dt ({cfg.duration} <= {cfg.dt})")
    if not cfg.noise_std >= 0:
        problems.append(f"noise_std must be nonnegative, got {cfg.noise_std}")
    if not cfg.epsilon_clamp > 0:
        problems.append(f"epsilon_clamp must be positive, got {cfg.epsilon_clamp}")
    if not (isinstance(cfg.substeps, int) and cfg.substeps >= 1):
        problems.append(f"substeps must be a positive integer, got {cfg.substeps}")
    if cfg.tau_limit is not None and not cfg.tau_limit > 0:
        problems.append(f"tau_limit must be positive when set, got {cfg.tau_limit}")
    if cfg.convention not in CONVENTIONS:
        problems.append(f"convention must be one of {sorted(CONVENTIONS)}, got {cfg.convention!r}")
    freq_ok = all(w > 0 for w in cfg.desired_freq)
    if not freq_ok:
        problems.append("desired_freq entries must be positive")

    J = cfg.inertia
    if not np.allclose(J, J.T, atol=1e-12, rtol=0.0):
        problems.append("J must be symmetric")
    elif np.linalg.eigvalsh(J).min() <= 0:
        problems.append("J must be positive definite")

    try:
        sensing.check_refs(cfg.refs)
    except sensing.RankDeficiencyError as exc:
        problems.append(f"attitude not reconstructible (rank(M) < 3): {exc}")

    e_o0, e_a0 = initial_errors(cfg)
    funnel_ok = True
    for label, ch, e0 in (("observer", "o", e_o0), ("controller", "a", e_a0)):
        msgs = ppf_problems(*(getattr(cfg, f"{k}_{ch}") for k in ("xi0", "xi_inf", "ell", "delta")), e0=e0)
        funnel_ok = funnel_ok and not msgs
        problems += [f"{label} funnel: {msg}" for msg in msgs]

    if funnel_ok:
        problems += cfg.observer_gains.problems()
        problems += cfg.controller_gains.problems()
        advisories += cfg.controller_gains.advisories()
    else:
        for name in ("k_o", "gamma_o", "gamma_Omega", "k_w", "k_c", "k_beta"):
            if not getattr(cfg, name) > 0:
                problems.append(f"{name} must be a positive constant, got {getattr(cfg, name)}")

    if cfg.C_d is not None and freq_ok:
        bound = _trajectory_bound(cfg.trajectory)
        if bound > cfg.C_d:
            advisories.append(
                f"desired trajectory peak {bound:.4g} exceeds C_d = {cfg.C_d}"
            )
    return problems, advisories


def _trajectory_bound(traj):
    # |Omega_d_dot| <= |amp|; each Omega_d component <= |omega0| + 2 |amp| / freq
    acc = math.sqrt(sum(a * a for a in traj.amp))
    vel = math.sqrt(sum((abs(w0) + 2 * abs(a) / f) ** 2
                        for w0, a, f in zip(traj.omega0, traj.amp, traj.freq)))
    return max(acc, vel)


def validate(cfg):
    """Return ``cfg`` if valid; otherwise raise ValidationError listing every problem."""
    problems, advisories = check(cfg)
    if problems:
        raise ValidationError(problems)
    for msg in advisories:
        warnings.warn(msg, ConfigWarning, stacklevel=2)
    return cfg


def paper_config(**overrides):
    return SimConfig(**overrides)


_FIELD_NAMES = {f.name for f in fields(SimConfig)}


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}


def _number(value):
    # YAML 1.1 reads exponents without a sign or dot ("1e-3") as strings
    if isinstance(value, bool):
        raise ValueError(value)
    if isinstance(value, str):
        return float(value)
    return value


def _freeze(value):
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return _number(value)


def from_mapping(data):
    """Build a SimConfig from plain values; unknown keys and non-numbers are errors."""
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ValidationError([f"unknown config key {k!r}" for k in unknown])
    kwargs, problems = {}, []
    for name, value in data.items():
        kind = _FIELD_TYPES[name]
        if kind == "str":
            kwargs[name] = value
            continue
        if value is None and "None" in kind:
            kwargs[name] = None
            continue
        try:
            value = _freeze(value)
        except (TypeError, ValueError):
            problems.append(f"{name} must be numeric, got {value!r}")
            continue
        if kind.startswith("float") and isinstance(value, (int, float)):
            value = float(value)
        elif kind == "int" and isinstance(value, float) and value.is_integer():
            value = int(value)
        kwargs[name] = value
    if problems:
        raise ValidationError(problems)
    return SimConfig(**kwargs)


def load_config(path):
    """Read a YAML config file: one key per SimConfig field, arrays in brackets."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValidationError([f"{path}: expected a mapping of keys to values"])
    return from_mapping(data)


def dump_config(cfg, path):
    data = {k: _thaw(v) for k, v in cfg.to_dict().items()}
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, default_flow_style=None, sort_keys=False)


def _thaw(value):
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value
