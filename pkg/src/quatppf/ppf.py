"""Prescribed performance functions and the error transformation.

A performance function ``xi(t)`` decays exponentially from ``xi0`` to
``xi_inf``.  A constrained error ``e`` with ``-delta_lo * xi < e < delta_hi * xi``
is mapped to an unconstrained error ``E`` through the inverse of the smooth
saturation ``N``; keeping ``E`` finite keeps ``e`` inside the funnel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class EnvelopeViolation(ValueError):
    """Raised when a normalized error ``e / xi`` leaves ``(-delta_lo, delta_hi)``."""


@dataclass(frozen=True)
class PpfParams:
    """Funnel parameters for one error channel.

    The lower and upper saturation bounds are equal (``delta``), which makes
    ``E = 0`` exactly when ``e = 0``.
    """

    xi0: float
    xi_inf: float
    ell: float
    delta: float

    def __post_init__(self):
        problems = ppf_problems(self.xi0, self.xi_inf, self.ell, self.delta)
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self, e0=None):
        return ppf_problems(self.xi0, self.xi_inf, self.ell, self.delta, e0)


def ppf_problems(xi0, xi_inf, ell, delta, e0=None):
    """Constraint violations of a funnel; ``e0`` is the initial error if known."""
    out = []
    if not xi_inf > 0:
        out.append(f"xi_inf must be positive, got {xi_inf}")
    if not xi0 > xi_inf:
        out.append(f"xi0 must exceed xi_inf ({xi0} <= {xi_inf})")
    if not ell > 0:
        out.append(f"ell must be positive, got {ell}")
    if not delta > 0:
        out.append(f"delta must be positive, got {delta}")
    if e0 is not None:
        if not xi0 > e0:
            out.append(f"xi0 must exceed the initial error ({xi0} <= {e0:.6g})")
        if not delta > e0:
            out.append(f"delta must exceed the initial error ({delta} <= {e0:.6g})")
    return out


def ppf_value(t, p):
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return (p.xi0 - p.xi_inf) * math.exp(-p.ell * t) + p.xi_inf


def ppf_rate(t, p):
    """Time derivative of :func:`ppf_value`."""
    return -p.ell * (p.xi0 - p.xi_inf) * math.exp(-p.ell * t)


def constrained_error(q_tilde0):
    """``1 - |q0|``: distance of the error quaternion from the nearer identity."""
    if q_tilde0 < 0:
        return 1.0 + q_tilde0
    return 1.0 - q_tilde0


def smooth_n(E, delta_lo, delta_hi):
    """Smooth saturation onto ``(-delta_lo, delta_hi)``."""
    # (dh e^E - dl e^-E) / (e^E + e^-E), written to avoid overflow for large |E|
    if E >= 0:
        z = math.exp(-2.0 * E)
        return (delta_hi - delta_lo * z) / (1.0 + z)
    z = math.exp(2.0 * E)
    return (delta_hi * z - delta_lo) / (z + 1.0)


def transform(e, xi, delta_lo, delta_hi=None):
    """Unconstrained error ``E = 0.5 ln((delta_lo + e/xi) / (delta_hi - e/xi))``."""
    if delta_hi is None:
        delta_hi = delta_lo
    x = e / xi
    if not -delta_lo < x < delta_hi:
        raise EnvelopeViolation(
            f"e/xi = {x:.6g} outside ({-delta_lo:.6g}, {delta_hi:.6g})"
        )
    return 0.5 * math.log((delta_lo + x) / (delta_hi - x))


def delta_gain(e, xi, delta_lo, delta_hi=None):
    """``dE/de``: ``(1 / (2 xi)) * (1 / (delta_lo + e/xi) + 1 / (delta_hi - e/xi))``."""
    if delta_hi is None:
        delta_hi = delta_lo
    x = e / xi
    if not -delta_lo < x < delta_hi:
        raise EnvelopeViolation(
            f"e/xi = {x:.6g} outside ({-delta_lo:.6g}, {delta_hi:.6g})"
        )
    return (0.5 / xi) * (1.0 / (delta_lo + x) + 1.0 / (delta_hi - x))


@dataclass(frozen=True)
class PpfChannel:
    """Funnel quantities of one channel at one sample."""

    xi: float
    e: float
    E: float
    Delta: float
    clamped: bool


def evaluate_channel(q_tilde0, t, p, epsilon):
    """Sign-disambiguate, clamp the funnel if needed, and transform.

    When the error has already left the funnel (``e > xi``), ``xi`` is raised
    to ``e + epsilon`` for this sample only so the transform stays defined.
    """
    xi = ppf_value(t, p)
    e = constrained_error(q_tilde0)
    clamped = e > xi
    if clamped:
        xi = e + epsilon
    return PpfChannel(
        xi=xi,
        e=e,
        E=transform(e, xi, p.delta),
        Delta=delta_gain(e, xi, p.delta),
        clamped=clamped,
    )
