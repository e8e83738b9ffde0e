"""Orlicz N-functions, their Young-Fenchel conjugates and sub-Gaussian tails.

Every function here accepts scalars or numpy arrays and returns the same
shape (0-d inputs come back as Python floats).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NonConvergence

__all__ = [
    "NKind",
    "NFunction",
    "SubGaussianStandard",
    "eval_phi",
    "inverse_phi",
    "conjugate",
    "numeric_conjugate",
    "psi",
    "tail_bound",
    "check_condition_q",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_BRACKET_LIMIT = 1e30


class NKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    POWER_ALPHA = "power_alpha"
    PIECEWISE_POWER = "piecewise_power"
    EXP_POWER = "exp_power"


@dataclass(frozen=True)
class NFunction:
    """An N-function from the closed catalog.

    ``gaussian``         x^2/2
    ``power_alpha``      |x|^alpha/alpha, 1 < alpha <= 2
    ``piecewise_power``  x^2/alpha on |x| <= 1, |x|^alpha/alpha beyond, alpha > 2
    ``exp_power``        exp(a|x|^alpha) - 1, 1 < alpha <= 2, a > 0
    """

    kind: NKind
    alpha: float = 2.0
    a_scale: float = 1.0

    def __post_init__(self):
        kind = NKind(self.kind)
        object.__setattr__(self, "kind", kind)
        alpha = float(self.alpha)
        if kind is NKind.GAUSSIAN:
            alpha = 2.0
        elif kind is NKind.POWER_ALPHA:
            if not 1.0 < alpha <= 2.0:
                raise InvalidParameter(f"power_alpha needs 1 < alpha <= 2, got {alpha}")
        elif kind is NKind.PIECEWISE_POWER:
            if not alpha > 2.0:
                raise InvalidParameter(f"piecewise_power needs alpha > 2, got {alpha}")
        elif kind is NKind.EXP_POWER:
            if not 1.0 < alpha <= 2.0:
                raise InvalidParameter(f"exp_power needs 1 < alpha <= 2, got {alpha}")
            if not self.a_scale > 0:
                raise InvalidParameter("exp_power needs a_scale > 0")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "a_scale", float(self.a_scale))

    @classmethod
    def gaussian(cls):
        return cls(NKind.GAUSSIAN)

    @property
    def conjugate_exponent(self):
        """p with 1/p + 1/alpha = 1."""
        return self.alpha / (self.alpha - 1.0)

    def __call__(self, x):
        return eval_phi(self, x)

    def validate(self, grid=None):
        """Probe-grid check of the N-function axioms and Condition Q.

        Raises InvalidParameter describing the first violated property.
        """
        xs = np.linspace(-20.0, 20.0, 801) if grid is None else np.asarray(grid, float)
        v = eval_phi(self, xs)
        if eval_phi(self, 0.0) != 0.0:
            raise InvalidParameter("phi(0) != 0")
        if np.any(v[xs != 0] <= 0):
            raise InvalidParameter("phi must be positive away from 0")
        if not np.allclose(v, eval_phi(self, -xs), rtol=1e-14, atol=0):
            raise InvalidParameter("phi must be even")
        mid = eval_phi(self, 0.5 * (xs[:-1] + xs[1:]))
        if np.any(mid > 0.5 * (v[:-1] + v[1:]) * (1 + 1e-12)):
            raise InvalidParameter("phi fails the midpoint convexity probe")
        # phi(x)/x must fall towards 0 and rise towards infinity along the ladder
        probe = np.array([1e-6, 1e-3, 1.0, 1e3, 1e6])
        slope = np.asarray(eval_phi(self, probe)) / probe
        if not np.all(slope[:2] < slope[1:3]):
            raise InvalidParameter("phi(x)/x does not decrease towards 0")
        if not np.all((slope[3:] > slope[2:4]) | np.isposinf(slope[3:])):
            raise InvalidParameter("phi(x)/x does not increase towards infinity")
        if not check_condition_q(self):
            raise InvalidParameter("Condition Q fails")
        return True


@dataclass(frozen=True)
class SubGaussianStandard:
    """The phi-sub-Gaussian standard tau of a random variable."""

    tau: float

    def __post_init__(self):
        if not self.tau >= 0:
            raise InvalidParameter(f"tau must be >= 0, got {self.tau}")

    @classmethod
    def from_variance(cls, variance):
        # centred Gaussian: tau^2 equals the variance
        return cls(math.sqrt(variance))


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_phi(f: NFunction, x):
    ax = np.abs(np.asarray(x, dtype=float))
    k = f.kind
    if k is NKind.GAUSSIAN:
        r = 0.5 * ax * ax
    elif k is NKind.POWER_ALPHA:
        r = ax**f.alpha / f.alpha
    elif k is NKind.PIECEWISE_POWER:
        r = np.where(ax <= 1.0, ax * ax, ax**f.alpha) / f.alpha
    else:
        with np.errstate(over="ignore"):
            r = np.expm1(f.a_scale * ax**f.alpha)
    return _out(r)


def inverse_phi(f: NFunction, v):
    """The y >= 0 with phi(y) = v, for v >= 0."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise InvalidParameter("inverse_phi needs v >= 0")
    k = f.kind
    with np.errstate(over="ignore"):
        if k is NKind.GAUSSIAN:
            r = np.sqrt(2.0 * v)
        elif k is NKind.POWER_ALPHA:
            r = (f.alpha * v) ** (1.0 / f.alpha)
        elif k is NKind.PIECEWISE_POWER:
            r = np.where(
                v <= 1.0 / f.alpha,
                np.sqrt(f.alpha * v),
                (f.alpha * v) ** (1.0 / f.alpha),
            )
        else:
            r = (np.log1p(v) / f.a_scale) ** (1.0 / f.alpha)
    return _out(r)


def _analytic_conjugate(f, ax):
    k = f.kind
    if k is NKind.GAUSSIAN:
        return 0.5 * ax * ax
    p = f.conjugate_exponent
    if k is NKind.POWER_ALPHA:
        return ax**p / p
    if k is NKind.PIECEWISE_POWER:
        a = f.alpha
        return np.where(
            ax <= 2.0 / a,
            a * ax * ax / 4.0,
            np.where(ax <= 1.0, ax - 1.0 / a, ax**p / p),
        )
    return None


def numeric_conjugate(f: NFunction, x, rtol=1e-10):
    """sup_y (xy - phi(y)) by golden-section search on y >= 0.

    The search is vectorised over ``x``; the bracket is doubled or halved
    until it sits within a factor of a few of the maximiser.
    """
    ax = np.atleast_1d(np.abs(np.asarray(x, dtype=float)))
    shape = np.shape(x)

    def g(y):
        return ax * y - np.asarray(eval_phi(f, y))

    hi = np.ones_like(ax)
    with np.errstate(over="ignore", invalid="ignore"):
        grow = g(2.0 * hi) > g(hi)
        while np.any(grow):
            hi = np.where(grow, 2.0 * hi, hi)
            if np.any(hi > _BRACKET_LIMIT):
                raise NonConvergence("conjugate bracket exceeded 1e30; phi grows too slowly")
            grow = g(2.0 * hi) > g(hi)
        # and halved while the maximiser sits well below it (small |x|)
        shrink = (g(0.5 * hi) > g(hi)) & (hi > 1e-290)
        while np.any(shrink):
            hi = np.where(shrink, 0.5 * hi, hi)
            shrink = (g(0.5 * hi) > g(hi)) & (hi > 1e-290)
    hi = 2.0 * hi
    lo = np.zeros_like(ax)
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    gc, gd = g(c), g(d)
    for _ in range(400):
        if np.all((hi - lo <= rtol * np.maximum(hi, 1e-200)) | (ax == 0)):
            break
        left = gc > gd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        c_new = hi - _GOLDEN * (hi - lo)
        d_new = lo + _GOLDEN * (hi - lo)
        c, d = np.where(left, c_new, d), np.where(left, c, d_new)
        gc = g(c)
        gd = g(d)
    else:
        raise NonConvergence("golden-section search did not reach tolerance")
    y = 0.5 * (lo + hi)
    r = np.maximum(np.maximum(g(y), g(lo)), 0.0)
    r = np.where(ax == 0, 0.0, r)
    return _out(r.reshape(shape))


def conjugate(f: NFunction, x):
    """Young-Fenchel transform phi*(x).

    Closed form for gaussian, power_alpha and piecewise_power; the
    exp_power transform has no elementary form and is found numerically.
    """
    ax = np.abs(np.asarray(x, dtype=float))
    r = _analytic_conjugate(f, ax)
    if r is None:
        return numeric_conjugate(f, x)
    return _out(r)


def psi(f: NFunction, v):
    """Entropy weight v / phi^{-1}(v), continued by 0 at v = 0."""
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(v > 0, v / np.asarray(inverse_phi(f, np.maximum(v, 0.0))), 0.0)
    return _out(r)


def tail_bound(f: NFunction, u, tau):
    """min(1, 2 exp(-phi*(u/tau))), the exponential tail estimate.

    ``tau`` may be a float or a SubGaussianStandard. tau == 0 describes the
    zero random variable, whose tail is 0 for every u > 0.
    """
    t = tau.tau if isinstance(tau, SubGaussianStandard) else float(tau)
    if t < 0:
        raise InvalidParameter("tau must be >= 0")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise InvalidParameter("tail_bound needs u > 0")
    if t == 0:
        return _out(np.zeros_like(u))
    return _out(np.minimum(1.0, 2.0 * np.exp(-np.asarray(conjugate(f, u / t)))))


def check_condition_q(f) -> bool:
    """liminf_{x->0} phi(x)/x^2 > 0, probed on x = 2^-1 ... 2^-40.

    ``f`` is an NFunction or any callable phi.
    """
    xs = np.ldexp(1.0, -np.arange(1, 41))
    phi = f if not isinstance(f, NFunction) else (lambda x: eval_phi(f, x))
    ratios = np.asarray(phi(xs), dtype=float) / (xs * xs)
    return bool(np.min(ratios) > 1e-12)
