"""Growth-rate bounds for sup |U(t,x)|/c(t) on [-A, A] x [0, inf).

Time is cut into segments [b_k, b_{k+1}]; each segment contributes one term
exp(-phi*(s c_k (1-theta) / (2 eps_k))) to a series whose sum multiplies the
tail factor 2 exp(-phi*(u/s)).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import optimize

from . import admissible as adm
from . import kernels, orlicz, spectral
from .bounds import BoundInputs, _clamp, _log1p_scaled
from .errors import BelowThreshold, InvalidParameter, SeriesDiverges, SWindowEmpty
from .field import kernel_matrix
from .quadrature import integrate_panel, integrate_to_zero
from ._io import open_out

__all__ = [
    "Segmentation",
    "WKind",
    "WeightFunction",
    "SeriesResult",
    "ThresholdInfo",
    "GrowthRow",
    "GrowthReport",
    "eps_k",
    "i_phi_k",
    "s_window_low",
    "first_valid_k",
    "series_sum",
    "growth_threshold",
    "growth_bound",
    "iterated_log_weights",
    "growth_report",
    "write_growth_csv",
]

E = math.e
DIRECT_TERMS = 1 << 20
SCAN_CHUNK = 1 << 16
DEFAULT_K_MAX = 10**15


@dataclass(frozen=True)
class Segmentation:
    """Segments [b_k, b_{k+1}], k_start <= k < k_end, with b_0 = 0.

    Either explicit ``b`` (finite) or geometric b_k = L e^k for k >= 1
    (infinite when k_end is None). Geometric quantities are handled through
    ln b_k so that large k never overflows.
    """

    A: float
    b: Optional[tuple] = None
    L: Optional[float] = None
    k_start: int = 0
    k_end: Optional[int] = None
    K_max: int = DEFAULT_K_MAX

    def __post_init__(self):
        if not self.A > 0:
            raise InvalidParameter("A must be positive")
        if (self.b is None) == (self.L is None):
            raise InvalidParameter("give exactly one of explicit b or geometric L")
        if self.b is not None:
            b = tuple(float(v) for v in self.b)
            if len(b) < 2 or b[0] != 0.0 or any(y <= x for x, y in zip(b[:-1], b[1:])):
                raise InvalidParameter("explicit b must start at 0 and increase strictly")
            object.__setattr__(self, "b", b)
            k_end = len(b) - 1 if self.k_end is None else int(self.k_end)
            if k_end > len(b) - 1:
                raise InvalidParameter("k_end runs past the explicit b list")
            object.__setattr__(self, "k_end", k_end)
        elif not self.L > 0:
            raise InvalidParameter("L must be positive")
        if self.k_start < 0 or (self.k_end is not None and self.k_end <= self.k_start):
            raise InvalidParameter("need 0 <= k_start < k_end")
        if self.K_max < 1:
            raise InvalidParameter("K_max must be positive")
        ks = self.indices() if self.finite else np.array([self.k_start, self.k_start + 1])
        # geometric gaps increase with k, so the first two cover the rest
        if np.any(self.width(ks) < 2 * self.A * (1 - 1e-15)):
            raise InvalidParameter("segments must satisfy b_{k+1} - b_k >= 2A")

    @property
    def finite(self):
        return self.k_end is not None

    def indices(self):
        if not self.finite:
            raise InvalidParameter("infinite segmentation has no finite index list")
        return np.arange(self.k_start, self.k_end)

    def log_b(self, k):
        k = np.asarray(k, dtype=float)
        if self.b is not None:
            with np.errstate(divide="ignore"):
                return np.log(np.asarray(self.b)[k.astype(int)])
        return np.where(k >= 1, math.log(self.L) + k, -np.inf)

    def b_at(self, k):
        r = np.exp(self.log_b(k))
        return float(r) if np.ndim(r) == 0 else r

    def log_width(self, k):
        k = np.asarray(k, dtype=float)
        if self.b is not None:
            b = np.asarray(self.b)
            ki = k.astype(int)
            return np.log(b[ki + 1] - b[ki])
        # k = 0: [0, L e]; k >= 1: L e^k (e - 1)
        return np.where(k >= 1, math.log(self.L) + k + math.log(E - 1), math.log(self.L) + 1.0)

    def width(self, k):
        return np.exp(self.log_width(k))

    def with_range(self, k_start, k_end=None):
        return replace(self, k_start=int(k_start), k_end=k_end if k_end is None else int(k_end))


class WKind(str, enum.Enum):
    ITERATED_LOG = "iterated_log"
    CONSTANT = "constant"
    VALUES = "values"


@dataclass(frozen=True)
class WeightFunction:
    """c(t) and the per-segment minima c_k.

    iterated_log: c(t) = D sqrt(ln ln(t/L)), positive for t > L e;
    constant: c(t) = c; values: explicit c_k indexed by k.
    ``s`` and ``theta`` record the parameters a weight was tuned for.
    """

    kind: WKind
    L: float = 1.0
    D: float = 1.0
    c: float = 1.0
    values: tuple = ()
    s: Optional[float] = None
    theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", WKind(self.kind))
        if self.kind is WKind.ITERATED_LOG and not (self.L > 0 and self.D > 0):
            raise InvalidParameter("iterated_log weight needs L, D > 0")
        if self.kind is WKind.CONSTANT and not self.c > 0:
            raise InvalidParameter("constant weight must be positive")
        if self.kind is WKind.VALUES:
            vals = tuple(float(v) for v in self.values)
            if not vals or any(not v >= 0 for v in vals):
                raise InvalidParameter("weight values must be nonnegative")
            object.__setattr__(self, "values", vals)

    @classmethod
    def iterated_log(cls, L, D, s=None, theta=None):
        return cls(WKind.ITERATED_LOG, L=L, D=D, s=s, theta=theta)

    @classmethod
    def constant(cls, c):
        return cls(WKind.CONSTANT, c=c)

    @classmethod
    def from_values(cls, values):
        return cls(WKind.VALUES, values=tuple(values))

    @property
    def monotone(self):
        """Nondecreasing in t, so the series terms are nonincreasing in k."""
        return self.kind is not WKind.VALUES

    def c_t(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WKind.CONSTANT:
            r = np.full_like(t, self.c)
        elif self.kind is WKind.ITERATED_LOG:
            with np.errstate(divide="ignore", invalid="ignore"):
                ll = np.log(np.log(t / self.L))
            r = self.D * np.sqrt(np.where(ll > 0, ll, 0.0))
        else:
            raise InvalidParameter("explicit weight values have no c(t)")
        return float(r) if r.ndim == 0 else r

    def c_k(self, seg: Segmentation, k):
        """min of c over [b_k, b_{k+1}]; k may be real for the functional kinds."""
        k = np.asarray(k, dtype=float)
        if self.kind is WKind.CONSTANT:
            r = np.full_like(k, self.c)
        elif self.kind is WKind.VALUES:
            ki = k.astype(int)
            if np.any(ki >= len(self.values)):
                raise InvalidParameter("segment index beyond the explicit weight values")
            r = np.asarray(self.values)[ki]
        else:
            # c increases, so the minimum sits at b_k
            with np.errstate(divide="ignore", invalid="ignore"):
                ll = np.log(seg.log_b(k) - math.log(self.L))
            r = self.D * np.sqrt(np.where(ll > 0, ll, 0.0))
        return float(r) if r.ndim == 0 else r


def eps_k(inp: BoundInputs, seg: Segmentation, k, refine=False, nt=32, nx=32, n_bins=2048):
    """C_y times the sup of the standard deviation of U over V_k.

    Default is the majorant C_y (total variation)^(1/2); ``refine`` evaluates
    the variance on an nt x nx grid over V_k and never exceeds the majorant.
    """
    major = inp.C_y * math.sqrt(spectral.total_variation(inp.m))
    if not refine or seg.L is not None and k > 700:
        return major
    b0 = float(seg.b_at(k)) if k > 0 else 0.0
    ts = np.linspace(b0, b0 + float(seg.width(k)), nt)
    xs = np.linspace(-seg.A, seg.A, nx)
    m = inp.m
    if m.form is spectral.MeasureForm.GRID:
        ki = kernel_matrix(inp.eq, ts, xs, m.lam)
        km = kernel_matrix(inp.eq, ts, xs, m.mu)
        var = np.sum(ki * km * m.mass, axis=1)
    else:
        lam, mass = m.discretize(n_bins)
        var = kernel_matrix(inp.eq, ts, xs, lam) ** 2 @ mass
    return min(major, inp.C_y * math.sqrt(max(float(np.max(var)), 0.0)))


def i_phi_k(inp: BoundInputs, seg: Segmentation, k, delta):
    """C_y int_0^delta Psi(ln(A W + 1) + ln(w_k/2 W + 1)) ds, W = Z^{-1}(2 C_Z C_y/s) - u0, w_k the segment width."""
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    c2 = 2.0 * inp.C_Z * inp.C_y
    la = math.log(seg.A)
    lw = float(seg.log_width(k)) - math.log(2.0)
    key = ("Ik", la, lw, float(delta))
    if key not in inp._cache:
        z, f = inp.z, inp.f

        def integrand(s):
            lw_ = np.asarray(adm.log_excess_inverse(z, c2 / s))
            return np.asarray(orlicz.psi(f, _log1p_scaled(la, lw_) + _log1p_scaled(lw, lw_)))

        zu0 = adm.eval_z(z, z.u0)
        kink = (c2 / zu0,) if zu0 > 0 else ()
        inp._cache[key] = inp.C_y * integrate_to_zero(integrand, float(delta), breakpoints=kink, rtol=1e-10)
    return inp._cache[key]


def _eps_array(inp, seg, ks, eps):
    if eps is None:
        return np.full(np.shape(ks), eps_k(inp, seg, 0))
    return np.broadcast_to(np.asarray(eps, dtype=float), np.shape(ks)).astype(float)


def s_window_low(inp, seg, w, theta, eps=None):
    """sup_k 4 eps_k / (c_k (1 - theta)); inf when some c_k vanishes."""
    if seg.finite:
        ks = seg.indices()
    else:
        # monotone weights: the sup is at the first segment
        ks = np.array([seg.k_start])
    c = np.asarray(w.c_k(seg, ks), dtype=float)
    e = _eps_array(inp, seg, ks, eps)
    with np.errstate(divide="ignore"):
        return float(np.max(np.where(c > 0, 4.0 * e / (c * (1.0 - theta)), np.inf)))


def first_valid_k(inp, seg, w, s, theta, eps=None, search=10**4):
    """Smallest k_start for which sup_k 4 eps/(c_k(1-theta)) < s.

    Only meaningful for monotone weights, where the remaining sup sits at
    the new first segment.
    """
    if not w.monotone:
        raise InvalidParameter("automatic start needs a monotone weight")
    top = seg.k_end if seg.finite else seg.k_start + search
    for k in range(seg.k_start, top):
        if s_window_low(inp, seg.with_range(k, seg.k_end), w, theta, eps) < s:
            return k
    raise SWindowEmpty(f"no segment start below k={top} admits s={s:g}")


@dataclass(frozen=True)
class SeriesResult:
    """converged with the summed value, the last index used, and an upper
    estimate of the remainder beyond it (0 for a finite horizon)."""

    converged: bool
    value: float
    k_used: int
    tail: float = 0.0
    reason: str = ""

    @property
    def total(self):
        return self.value + self.tail


def _term_fn(inp, seg, w, s, theta, eps_const):
    scale = s * (1.0 - theta) / (2.0 * eps_const)

    def t(k):
        x = scale * np.asarray(w.c_k(seg, k), dtype=float)
        return np.exp(-np.asarray(orlicz.conjugate(inp.f, x), dtype=float))

    return t


def _em_block(t, a, b):
    """sum_{k=a}^{b} t(k) for smooth slowly varying t, by Euler-Maclaurin."""
    if b < a:
        return 0.0
    if b - a < 64:
        return float(np.sum(t(np.arange(a, b + 1, dtype=float))))
    la, lb = math.log(a), math.log(b)
    # integrate in y = ln k where t(e^y) e^y is smooth
    integral = integrate_panel(lambda y: t(np.exp(y)) * np.exp(y), la, lb, rtol=1e-13)

    def dt(x):
        h = 1e-4 * x
        return float((t(np.array([x + h])) - t(np.array([x - h])))[0] / (2 * h))

    ta, tb = float(t(np.array([float(a)]))[0]), float(t(np.array([float(b)]))[0])
    return integral + 0.5 * (ta + tb) + (dt(b) - dt(a)) / 12.0


def _tail_integral(t, K):
    """int_K^inf t(x) dx >= sum_{k>K} t(k) for nonincreasing t; via x = K/v."""
    def g(v):
        tv = t(K / v)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(tv > 0, tv * (K / v) / v, 0.0)

    return integrate_to_zero(g, 1.0, rtol=1e-10, stop_rel=1e-10)


def series_sum(inp, seg, w, s, theta, eps=None, rel_tol=1e-16, run=50):
    """Sum of exp(-phi*(s c_k (1-theta) / (2 eps_k))) over the segments.

    Finite horizon: the exact finite sum. Infinite horizon: Converged once
    ``run`` consecutive terms are each below rel_tol of the running sum,
    NotConverged if that does not happen by K_max. The first DIRECT_TERMS
    terms are scanned one by one; beyond that the (monotone) terms are
    located by bisection and the skipped block is summed by Euler-Maclaurin.
    """
    if not 0 < theta < 1:
        raise InvalidParameter("theta must lie in (0, 1)")
    if seg.finite:
        ks = seg.indices()
        c = np.asarray(w.c_k(seg, ks), dtype=float)
        x = s * c * (1.0 - theta) / (2.0 * _eps_array(inp, seg, ks, eps))
        terms = np.exp(-np.asarray(orlicz.conjugate(inp.f, x), dtype=float))
        return SeriesResult(True, math.fsum(terms), int(seg.k_end - 1))
    if eps is not None and np.ndim(eps) != 0:
        raise InvalidParameter("infinite horizons take a single eps")
    e = float(eps) if eps is not None else eps_k(inp, seg, 0)
    t = _term_fn(inp, seg, w, s, theta, e)
    k0, k_max = seg.k_start, seg.k_start + int(seg.K_max) - 1
    total, small_run, k = 0.0, 0, k0
    stop_k = min(k0 + DIRECT_TERMS - 1, k_max)
    while k <= stop_k:
        hi = min(k + SCAN_CHUNK - 1, stop_k)
        block = t(np.arange(k, hi + 1, dtype=float))
        total, small_run, stop = kernels.scan_series(block, total, small_run, rel_tol, run)
        if stop >= 0:
            k_used = k + stop
            return SeriesResult(True, total, k_used, _tail_integral(t, float(k_used)))
        k = hi + 1
    if k > k_max:
        return SeriesResult(False, total, k_max, math.inf, "K_max reached")
    if not w.monotone:
        return SeriesResult(False, total, k - 1, math.inf, "direct scan exhausted")

    def small(kk):
        return float(t(np.array([float(kk)]))[0]) < rel_tol * total

    # terms are nonincreasing: find the first index whose term is small
    if not small(k_max):
        return SeriesResult(False, total, k_max, math.inf, "terms do not fall below tolerance by K_max")
    lo, hi = k - 1, k
    while not small(hi):
        lo, hi = hi, min(2 * hi, k_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if small(mid) else (mid, hi)
    k_used = hi + run - 1
    total += _em_block(t, k, k_used)
    return SeriesResult(True, total, k_used, _tail_integral(t, float(k_used)))


@dataclass(frozen=True)
class ThresholdInfo:
    """The u threshold used and both candidate rules.

    sup_segments: sup over segments of I_k(theta eps_k)/c_k times 4/(theta(1-theta))
    (inf when c_k vanishes or the sup is not attained in the sampled range);
    first_segment: the same ratio at the first segment only.
    """

    value: float
    rule: str
    sup_segments: float
    first_segment: float
    k_arg: int
    samples: tuple = field(default=(), repr=False)


def _sample_ks(seg, k_last):
    if seg.finite and seg.k_end - seg.k_start <= 512:
        return seg.indices()
    top = k_last if not seg.finite else seg.k_end - 1
    dense = np.arange(seg.k_start, min(seg.k_start + 64, top + 1))
    sparse = np.unique(np.round(np.geomspace(max(seg.k_start, 1), max(top, 2), 128)).astype(np.int64))
    return np.unique(np.concatenate([dense, sparse[sparse >= seg.k_start]]))


def growth_threshold(inp, seg, w, theta, eps=None, rule="sup_segments", k_last=None):
    if rule not in ("sup_segments", "first_segment"):
        raise InvalidParameter("threshold rule must be 'sup_segments' or 'first_segment'")
    fac = 4.0 / (theta * (1.0 - theta))
    ks = _sample_ks(seg, k_last if k_last is not None else seg.k_start + 10**6)
    e = _eps_array(inp, seg, ks, eps if seg.finite or eps is None else float(eps))
    c = np.asarray(w.c_k(seg, ks), dtype=float)
    ratios = []
    for k, ek, ck in zip(ks, e, c):
        ratios.append(math.inf if ck <= 0 else i_phi_k(inp, seg, int(k), theta * ek) / ck)
    ratios = np.asarray(ratios)
    first_segment = float(ratios[0]) * fac
    i = int(np.argmax(ratios))
    sup_segments = float(ratios[i]) * fac
    if not seg.finite and i == ratios.size - 1:
        sup_segments = math.inf
    value = sup_segments if rule == "sup_segments" else first_segment
    samples = tuple(zip(ks.tolist(), e.tolist(), c.tolist(), ratios.tolist()))
    return ThresholdInfo(value, rule, sup_segments, first_segment, int(ks[i]), samples)


def growth_bound(inp, seg, w, u, s, theta=0.5, eps=None, threshold_rule="sup_segments", series=None, threshold=None):
    """2 exp(-phi*(u/s)) times the segment series, clamped to (0, 1].

    The series remainder estimate is included, so the emitted value
    dominates the infinite sum.
    """
    low = s_window_low(inp, seg, w, theta, eps)
    if not low < u / 2:
        raise SWindowEmpty(f"window ({low:g}, {u / 2:g}) for s is empty")
    if not low < s < u / 2:
        raise InvalidParameter(f"s={s:g} lies outside the window ({low:g}, {u / 2:g})")
    if series is None:
        series = series_sum(inp, seg, w, s, theta, eps)
    if not series.converged:
        raise SeriesDiverges(f"segment series not converged ({series.reason})")
    if threshold is None:
        threshold = growth_threshold(inp, seg, w, theta, eps, threshold_rule, series.k_used)
    if not u > threshold.value * (1 + 1e-12):
        raise BelowThreshold(f"u={u:g} does not exceed the growth threshold {threshold.value:g}")
    return _clamp(2.0 * math.exp(-orlicz.conjugate(inp.f, u / s)) * series.total)


def iterated_log_weights(L, A, delta, s, theta, gamma_sqrt):
    """c(t) = D sqrt(ln ln(t/L)) with D = 2 gamma_sqrt (2(1+delta))^(1/2) / (s (1-theta))."""
    if not L > 2 * A / (E * (E - 1)):
        raise InvalidParameter("need L > 2A / (e (e - 1)) so geometric segments are wide enough")
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    if not (s > 0 and 0 < theta < 1 and gamma_sqrt > 0):
        raise InvalidParameter("need s > 0, 0 < theta < 1, gamma_sqrt > 0")
    D = 2.0 * gamma_sqrt * math.sqrt(2.0 * (1.0 + delta)) / (s * (1.0 - theta))
    return WeightFunction.iterated_log(L, D, s=s, theta=theta)


@dataclass(frozen=True)
class GrowthRow:
    u: float
    s: float
    theta: float
    series: float
    bound: float
    threshold: float
    k_used: int
    feasible: bool


@dataclass
class GrowthReport:
    rows: list
    threshold: ThresholdInfo
    series: SeriesResult
    s: float
    theta: float
    k_start: int
    t_min: float
    diagnostics: list

    def xi_tail(self):
        """(u, P{xi > u} upper bound) for the dominating variable with |U| < xi c(t)."""
        return [(r.u, r.bound) for r in self.rows if r.feasible]


def _best_s(inp, seg, w, theta, eps, low, u_top):
    hi = u_top / 2

    def obj(ls):
        s = math.exp(ls)
        ser = series_sum(inp, seg, w, s, theta, eps)
        if not ser.converged:
            return math.inf
        return -orlicz.conjugate(inp.f, u_top / s) + math.log(max(ser.total, 1e-300))

    res = optimize.minimize_scalar(
        obj, bounds=(math.log(low) + 1e-9, math.log(hi) - 1e-9), method="bounded", options={"xatol": 1e-6}
    )
    return math.exp(float(res.x))


def growth_report(inp, seg, w, us, s=None, theta=None, eps=None, threshold_rule="sup_segments", auto_start=True):
    us = [float(u) for u in us]
    if theta is None:
        theta = w.theta if w.theta is not None else 0.5
    if s is None:
        s = w.s
    if auto_start and w.monotone:
        k0 = first_valid_k(inp, seg, w, s if s is not None else max(us) / 2, theta, eps)
        seg = seg.with_range(k0, seg.k_end)
    low = s_window_low(inp, seg, w, theta, eps)
    if not low < max(us) / 2:
        raise SWindowEmpty(f"window ({low:g}, {max(us) / 2:g}) for s is empty")
    if s is None:
        s = _best_s(inp, seg, w, theta, eps, low, max(us))
    ser = series_sum(inp, seg, w, s, theta, eps)
    if not ser.converged:
        raise SeriesDiverges(f"segment series not converged ({ser.reason})")
    thr = growth_threshold(inp, seg, w, theta, eps, threshold_rule, ser.k_used)
    rows = []
    for u in us:
        ok = low < s < u / 2 and u > thr.value * (1 + 1e-12)
        b = growth_bound(inp, seg, w, u, s, theta, eps, threshold_rule, ser, thr) if ok else 1.0
        rows.append(GrowthRow(u, s, theta, ser.total, b, thr.value, ser.k_used, ok))
    t_min = float(seg.b_at(seg.k_start)) if seg.k_start > 0 else 0.0
    diags = [dict(k=k, eps=e, c=c, ratio=r) for k, e, c, r in thr.samples]
    return GrowthReport(rows, thr, ser, s, theta, seg.k_start, t_min, diags)


GROWTH_COLUMNS = ["u", "s", "theta", "series", "bound", "threshold", "k_used"]


def write_growth_csv(report: GrowthReport, path):
    with open_out(path) as fh:
        wr = csv.writer(fh)
        wr.writerow(GROWTH_COLUMNS)
        for r in report.rows:
            wr.writerow([f"{v:.17g}" for v in (r.u, r.s, r.theta, r.series, r.bound, r.threshold)] + [r.k_used])
