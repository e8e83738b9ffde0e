"""Admissible functions Z(u) and the sin-ratio estimate they provide."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import orlicz
from .errors import InvalidParameter, InverseOverflow
from .quadrature import integrate_to_zero

__all__ = [
    "ZKind",
    "AdmissibleFunction",
    "eval_z",
    "inverse_z",
    "log_excess_inverse",
    "sin_ratio_bound",
    "admissibility_integral",
]

_EXP_LIMIT = 700.0


class ZKind(str, enum.Enum):
    POWER = "power"
    LOG_POWER = "log_power"


@dataclass(frozen=True)
class AdmissibleFunction:
    """Z(u) = u^alpha (0 < alpha <= 1) or Z(u) = ln^alpha(u + 1) (alpha > 0).

    ``u0`` is derived from the kind: 0 for power, e^alpha - 1 for log_power.
    """

    kind: ZKind
    alpha: float
    u0: float = field(init=False)

    def __post_init__(self):
        kind = ZKind(self.kind)
        object.__setattr__(self, "kind", kind)
        alpha = float(self.alpha)
        if not alpha > 0:
            raise InvalidParameter(f"alpha must be positive, got {alpha}")
        if kind is ZKind.POWER and alpha > 1:
            raise InvalidParameter("power Z needs alpha <= 1 so that u/Z(u) is nondecreasing")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "u0", 0.0 if kind is ZKind.POWER else math.expm1(alpha))

    def __call__(self, u):
        return eval_z(self, u)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_z(z: AdmissibleFunction, u):
    u = np.asarray(u, dtype=float)
    if z.kind is ZKind.POWER:
        return _out(u**z.alpha)
    return _out(np.log1p(u) ** z.alpha)


def inverse_z(z: AdmissibleFunction, v):
    v = np.asarray(v, dtype=float)
    if z.kind is ZKind.POWER:
        return _out(v ** (1.0 / z.alpha))
    w = v ** (1.0 / z.alpha)
    if np.any(w > _EXP_LIMIT):
        raise InverseOverflow("exp argument exceeds 700; clamp the quadrature variable")
    return _out(np.expm1(w))


def log_excess_inverse(z: AdmissibleFunction, v):
    """ln(Z^{-1}(v) - u0), evaluated without forming Z^{-1}(v).

    -inf where Z^{-1}(v) <= u0. This is the quantity every entropy integrand
    needs, and for log_power it stays finite far past the overflow of Z^{-1}.
    """
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if z.kind is ZKind.POWER:
            r = np.log(v) / z.alpha
        else:
            w = v ** (1.0 / z.alpha)
            # e^w - e^alpha = e^w * (1 - e^(alpha - w))
            r = np.where(w > z.alpha, w + np.log(-np.expm1(np.minimum(z.alpha - w, 0.0))), -np.inf)
    return _out(r)


def sin_ratio_bound(z: AdmissibleFunction, u, v):
    """Z(|u| + u0) / Z(|v| + u0), which dominates |sin(u/v)|."""
    v = np.asarray(v, dtype=float)
    if np.any(v == 0):
        raise InvalidParameter("sin_ratio_bound needs v != 0")
    num = np.asarray(eval_z(z, np.abs(u) + z.u0))
    den = np.asarray(eval_z(z, np.abs(v) + z.u0))
    return _out(num / den)


def check_profile(z: AdmissibleFunction, grid=None):
    """Probe the hypotheses of the sin-ratio inequality; True when they hold."""
    us = np.linspace(1e-6, 200.0, 4001) if grid is None else np.asarray(grid, float)
    vals = np.asarray(eval_z(z, us))
    if np.any(vals <= 0) or np.any(np.diff(vals) <= 0):
        return False
    tail = us[us > z.u0]
    ratio = tail / np.asarray(eval_z(z, tail))
    return bool(np.all(np.diff(ratio) >= -1e-12 * ratio[1:]))


def admissibility_integral(z: AdmissibleFunction, f: orlicz.NFunction, eps):
    """int_0^eps Psi(ln(Z^{-1}(1/s) - u0)) ds, math.inf when divergent.

    Only the part of (0, eps] where the Psi argument is positive contributes
    (Psi is continued by 0 elsewhere).
    """
    if not eps > 0:
        raise InvalidParameter("eps must be positive")

    def integrand(s):
        arg = np.asarray(log_excess_inverse(z, 1.0 / s))
        return np.asarray(orlicz.psi(f, np.where(arg > 0, arg, 0.0)))

    # ln(Z^{-1}(1/s) - u0) = 0 exactly at s = 1/Z(u0 + 1)
    kink = 1.0 / float(eval_z(z, z.u0 + 1.0))
    return integrate_to_zero(integrand, float(eps), breakpoints=(kink,), stop_rel=1e-12)
