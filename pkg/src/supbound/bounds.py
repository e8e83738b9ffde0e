"""Supremum bounds on a bounded rectangle.

The entropy integrals are evaluated in log space: ln(h W + 1) is formed as
logaddexp(ln h + ln W, 0) with ln W = ln(Z^{-1}(v) - u0), so log_power Z
never overflows however small the integration variable gets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import admissible as adm
from . import orlicz, spectral
from .errors import BelowThreshold, Infeasible, InvalidParameter
from .field import DomainRect
from .quadrature import integrate_to_zero
from ._io import open_out

__all__ = [
    "BoundInputs",
    "BoundRow",
    "BoundReport",
    "gamma_big",
    "gamma0",
    "entropy_integral",
    "threshold_u",
    "bound_at",
    "optimize_theta",
    "closed_form_power_beta",
    "closed_form_log",
    "optimize_theta_beta",
    "generic_entropy_bound",
    "bound_report",
    "write_bound_csv",
]

THETA_GRID = np.round(np.arange(1, 100) / 100.0, 2)
FEAS_MARGIN = 1e-12
_TINY = float(np.nextafter(0.0, 1.0))


def _clamp(p):
    return float(min(1.0, max(_TINY, p)))


@dataclass(eq=False)
class BoundInputs:
    """Everything the bounded-domain bound needs.

    C_Z is computed once on construction; entropy integrals are memoised
    per (C_Z, delta).
    """

    f: orlicz.NFunction
    z: adm.AdmissibleFunction
    m: spectral.SpectralMeasure
    eq: spectral.EquationSpec
    dom: DomainRect
    C_y: float = 1.0
    validate: bool = True
    C_Z: float = field(init=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.C_y > 0:
            raise InvalidParameter("C_y must be positive")
        cz2 = spectral.c_z_squared(self.m, self.z, self.eq)
        if not math.isfinite(cz2):
            raise InvalidParameter("C_Z^2 diverges for this measure and Z")
        self.C_Z = math.sqrt(cz2)
        if self.validate:
            if not orlicz.check_condition_q(self.f):
                raise InvalidParameter("phi fails Condition Q")
            if not math.isfinite(adm.admissibility_integral(self.z, self.f, 0.1)):
                raise InvalidParameter("Z is not admissible for this phi")


def gamma_big(inp: BoundInputs):
    """C_y times the total variation of the spectral measure."""
    return inp.C_y * spectral.total_variation(inp.m)


def gamma0(inp: BoundInputs, C_Z=None):
    C_Z = inp.C_Z if C_Z is None else C_Z
    return 2.0 * inp.C_y * C_Z / adm.eval_z(inp.z, 1.0 / inp.dom.kappa_len + inp.z.u0)


def _log1p_scaled(log_h, log_w):
    """ln(h W + 1) from ln h and ln W (either may be -inf)."""
    return np.logaddexp(log_h + log_w, 0.0)


def _side_logs(dom):
    with np.errstate(divide="ignore"):
        # a zero-width side gives -inf, i.e. a factor ln(0 W + 1) = 0
        return float(np.log((dom.b - dom.a) / 2.0)), float(np.log((dom.d - dom.c) / 2.0))


def _entropy_integrand(inp, C_Z):
    c2 = 2.0 * C_Z * inp.C_y
    lt, lx = _side_logs(inp.dom)

    def integrand(s):
        lw = np.asarray(adm.log_excess_inverse(inp.z, c2 / s))
        arg = _log1p_scaled(lt, lw) + _log1p_scaled(lx, lw)
        return np.asarray(orlicz.psi(inp.f, arg))

    return integrand


def _entropy_kink(z, c2):
    # W = Z^{-1}(c2/s) - u0 vanishes at s = c2 / Z(u0)
    zu0 = adm.eval_z(z, z.u0)
    return (c2 / zu0,) if zu0 > 0 else ()


def entropy_integral(inp: BoundInputs, C_Z=None, delta=1.0):
    """int_0^delta Psi(ln[((b-a)/2 W + 1)((d-c)/2 W + 1)]) ds, W = Z^{-1}(2 C_Z C_y/s) - u0."""
    C_Z = inp.C_Z if C_Z is None else C_Z
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    key = ("I", float(C_Z), float(delta))
    if key not in inp._cache:
        kink = _entropy_kink(inp.z, 2.0 * C_Z * inp.C_y)
        inp._cache[key] = integrate_to_zero(
            _entropy_integrand(inp, C_Z), float(delta), breakpoints=kink, rtol=1e-10, stop_rel=1e-12
        )
    return inp._cache[key]


def _delta_for(inp, C_Z, theta):
    return min(theta * gamma_big(inp), gamma0(inp, C_Z))


def threshold_u(inp: BoundInputs, C_Z=None, theta=0.5):
    """2 I(min(theta Gamma, gamma0)) / (theta (1 - theta))."""
    if not 0 < theta < 1:
        raise InvalidParameter("theta must lie in (0, 1)")
    C_Z = inp.C_Z if C_Z is None else C_Z
    i_val = entropy_integral(inp, C_Z, _delta_for(inp, C_Z, theta))
    return 2.0 * i_val / (theta * (1.0 - theta))


def _arg(inp, C_Z, u, theta, i_val=None):
    if i_val is None:
        i_val = entropy_integral(inp, C_Z, _delta_for(inp, C_Z, theta))
    return (u * (1.0 - theta) - 2.0 * i_val / theta) / gamma_big(inp)


def _feasible(u, thr):
    return u > thr * (1.0 + FEAS_MARGIN)


def bound_at(inp: BoundInputs, u, theta, prefactor2=True, C_Z=None, clamp=True):
    """pref * exp(-phi*((u(1-theta) - (2/theta) I(min(theta Gamma, gamma0))) / Gamma))."""
    C_Z = inp.C_Z if C_Z is None else C_Z
    thr = threshold_u(inp, C_Z, theta)
    if not _feasible(u, thr):
        raise BelowThreshold(f"u={u:g} does not exceed the threshold {thr:g} at theta={theta:g}")
    arg = _arg(inp, C_Z, u, theta)
    val = (2.0 if prefactor2 else 1.0) * math.exp(-orlicz.conjugate(inp.f, arg))
    return _clamp(val) if clamp else val


def _golden_max(fun, lo, hi, tol=1e-6):
    res = optimize.minimize_scalar(lambda t: -fun(t), bounds=(lo, hi), method="bounded", options={"xatol": tol})
    return float(res.x), -float(res.fun)


def optimize_theta(inp: BoundInputs, u, prefactor2=True, C_Z=None):
    """Grid search over theta in {0.01..0.99} then bounded refinement on the best bracket.

    Returns (theta_star, bound_star). Raises Infeasible carrying the minimal
    feasible u over the grid when no grid theta works.
    """
    C_Z = inp.C_Z if C_Z is None else C_Z
    thr = np.array([threshold_u(inp, C_Z, t) for t in THETA_GRID])
    ok = np.array([_feasible(u, v) for v in thr])
    if not ok.any():
        raise Infeasible(f"u={u:g} below every grid threshold", min_feasible_u=float(thr.min()))
    args = np.array([_arg(inp, C_Z, u, t) if k else -np.inf for t, k in zip(THETA_GRID, ok)])
    i = int(np.argmax(args))
    lo = THETA_GRID[max(i - 1, 0)]
    hi = THETA_GRID[min(i + 1, THETA_GRID.size - 1)]
    best_t, best_a = float(THETA_GRID[i]), float(args[i])
    if hi > lo:
        t_ref, a_ref = _golden_max(lambda t: _arg(inp, C_Z, u, t), lo, hi)
        if a_ref > best_a and _feasible(u, threshold_u(inp, C_Z, t_ref)):
            best_t, best_a = t_ref, a_ref
    val = (2.0 if prefactor2 else 1.0) * math.exp(-orlicz.conjugate(inp.f, best_a))
    return best_t, _clamp(val)


def _require(inp, fkind, zkind, what):
    if inp.f.kind is not fkind or inp.z.kind is not zkind:
        raise InvalidParameter(f"{what} needs phi={fkind.value} and Z={zkind.value}")


def closed_form_power_beta(inp: BoundInputs, delta, beta, C_Z=None):
    """Upper bound for the entropy integral with Gaussian phi and Z = u^alpha,
    from ln((1+x)(1+y)) <= (x^beta + y^beta)/beta."""
    _require(inp, orlicz.NKind.GAUSSIAN, adm.ZKind.POWER, "closed_form_power_beta")
    alpha = inp.z.alpha
    if not 0 < beta < alpha:
        raise InvalidParameter(f"beta must lie in (0, {alpha:g})")
    C_Z = inp.C_Z if C_Z is None else C_Z
    r = beta / (2.0 * alpha)
    dom = inp.dom
    sides = ((dom.b - dom.a) / 2.0) ** (beta / 2.0) + ((dom.d - dom.c) / 2.0) ** (beta / 2.0)
    return (2.0 * C_Z * inp.C_y) ** r * delta ** (1.0 - r) / (1.0 - r) * sides / math.sqrt(2.0 * beta)


def closed_form_log(inp: BoundInputs, delta, C_Z=None, sqrt2_second=False):
    """Upper bound for the entropy integral with Gaussian phi and Z = ln^alpha(u+1).

    Valid when alpha > 1/2 and both half sides h satisfy h e^alpha >= 1:
    delta sqrt(max(ln(hx ht), 0)/2) + delta (2C/delta)^{1/(2 alpha)} / (1 - 1/(2 alpha)).
    ``sqrt2_second`` divides the second term by sqrt(2). That variant is kept for
    comparison only; it is not a valid bound in general.
    """
    _require(inp, orlicz.NKind.GAUSSIAN, adm.ZKind.LOG_POWER, "closed_form_log")
    alpha = inp.z.alpha
    ht, hx = (inp.dom.b - inp.dom.a) / 2.0, (inp.dom.d - inp.dom.c) / 2.0
    if not alpha > 0.5:
        raise InvalidParameter("closed_form_log needs alpha > 1/2")
    if ht * math.exp(alpha) < 1 or hx * math.exp(alpha) < 1:
        raise InvalidParameter("closed_form_log needs (side/2) e^alpha >= 1 on both sides")
    C_Z = inp.C_Z if C_Z is None else C_Z
    c2 = 2.0 * C_Z * inp.C_y
    q = 1.0 / (2.0 * alpha)
    first = delta * math.sqrt(max(math.log(ht * hx), 0.0) / 2.0)
    second = delta * (c2 / delta) ** q / (1.0 - q)
    if sqrt2_second:
        second /= math.sqrt(2.0)
    return first + second


def optimize_theta_beta(inp: BoundInputs, u, prefactor2=True, n_beta=40):
    """inf over (theta, beta) of the bound with the power-beta closed form in
    place of the quadrature entropy integral. Returns (theta, beta, bound)."""
    alpha = inp.z.alpha
    betas = alpha * (np.arange(1, n_beta + 1) / (n_beta + 1))
    G, g0 = gamma_big(inp), gamma0(inp)
    best = None
    for beta in betas:
        for t in THETA_GRID:
            i_val = closed_form_power_beta(inp, min(t * G, g0), beta)
            if not _feasible(u, 2 * i_val / (t * (1 - t))):
                continue
            a = _arg(inp, inp.C_Z, u, t, i_val)
            if best is None or a > best[2]:
                best = (float(t), float(beta), a)
    if best is None:
        raise Infeasible(f"u={u:g} infeasible on the (theta, beta) grid", min_feasible_u=math.nan)
    t, beta, a = best
    return t, beta, _clamp((2.0 if prefactor2 else 1.0) * math.exp(-orlicz.conjugate(inp.f, a)))


def generic_entropy_bound(
    sigma,
    sigma_inv,
    f,
    dom,
    eps0,
    u,
    theta,
    log_sigma_inv=None,
    prefactor2=True,
    kink=(),
):
    """Entropy bound for a separable phi-sub-Gaussian field on a rectangle
    whose increments obey tau(X(p) - X(q)) <= sigma(|p - q|).

    sigma_inv(v) may be inf (the whole side is one cell); ``log_sigma_inv``,
    if given, is used in place of ln(sigma_inv) to avoid overflow.
    """
    if not 0 < theta < 1:
        raise InvalidParameter("theta must lie in (0, 1)")
    g0 = float(sigma(max(dom.b - dom.a, dom.d - dom.c)))
    lt, lx = _side_logs(dom)

    def lsi(v):
        if log_sigma_inv is not None:
            return np.asarray(log_sigma_inv(v), float)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(sigma_inv(v), float))

    def integrand(v):
        l_inv = -lsi(v)
        return np.asarray(orlicz.psi(f, _log1p_scaled(lt, l_inv) + _log1p_scaled(lx, l_inv)))

    delta = min(theta * eps0, g0)
    i_val = integrate_to_zero(integrand, delta, breakpoints=kink, rtol=1e-10, stop_rel=1e-12)
    thr = 2.0 * i_val / (theta * (1.0 - theta))
    if not _feasible(u, thr):
        raise BelowThreshold(f"u={u:g} does not exceed the threshold {thr:g}")
    arg = (u * (1.0 - theta) - 2.0 * i_val / theta) / eps0
    return _clamp((2.0 if prefactor2 else 1.0) * math.exp(-orlicz.conjugate(f, arg)))


@dataclass(frozen=True)
class BoundRow:
    u: float
    theta_star: float
    threshold: float
    bound: float
    bound_no_prefactor: float
    feasible: bool


@dataclass
class BoundReport:
    rows: list
    gamma: float
    c_z: float
    gamma0: float
    prefactor2: bool
    entropy_evaluations: dict

    @property
    def feasible_rows(self):
        return [r for r in self.rows if r.feasible]


def bound_report(inp: BoundInputs, us, prefactor2=True):
    """Optimise theta at every u and collect the bound curve."""
    rows = []
    for u in np.asarray(us, float):
        u = float(u)
        try:
            t, _ = optimize_theta(inp, u, prefactor2=True)
        except Infeasible as exc:
            rows.append(BoundRow(u, math.nan, exc.min_feasible_u, 1.0, 1.0, False))
            continue
        raw = math.exp(-orlicz.conjugate(inp.f, _arg(inp, inp.C_Z, u, t)))
        full = (2.0 if prefactor2 else 1.0) * raw
        rows.append(BoundRow(u, t, threshold_u(inp, inp.C_Z, t), _clamp(full), _clamp(raw), True))
    evals = {k[2]: v for k, v in inp._cache.items() if k[0] == "I"}
    return BoundReport(rows, gamma_big(inp), inp.C_Z, gamma0(inp), prefactor2, evals)


BOUND_COLUMNS = ["u", "theta_star", "threshold", "bound", "bound_no_prefactor", "feasible"]


def write_bound_csv(report: BoundReport, path):
    with open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(BOUND_COLUMNS)
        for r in report.rows:
            w.writerow(
                [
                    f"{r.u:.17g}",
                    f"{r.theta_star:.17g}",
                    f"{r.threshold:.17g}",
                    f"{r.bound:.17g}",
                    f"{r.bound_no_prefactor:.17g}",
                    "true" if r.feasible else "false",
                ]
            )
