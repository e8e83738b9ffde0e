"""Vectorised Gauss-Legendre panels and the two improper-integral drivers.

``integrate_to_zero`` handles integrands singular (but monotone) at the
left endpoint 0 by dyadic halving toward the singularity. ``integrate_line``
handles integrals over the real line by doubling shells beyond a declared
truncation. Both detect divergence from the ratio of successive dyadic
contributions and close a convergent run with a geometric tail estimate.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonConvergence

__all__ = ["integrate_panel", "integrate_to_zero", "integrate_line"]

_LO_N, _HI_N = 12, 24
_XL, _WL = np.polynomial.legendre.leggauss(_LO_N)
_XH, _WH = np.polynomial.legendre.leggauss(_HI_N)


def _gl_pair(f, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = np.concatenate([mid + half * _XL, mid + half * _XH])
    vals = np.asarray(f(nodes), dtype=float)
    lo = half * np.dot(_WL, vals[:_LO_N])
    hi = half * np.dot(_WH, vals[_LO_N:])
    return lo, hi


def integrate_panel(f, a, b, rtol=1e-12, atol=1e-300, max_depth=40):
    """Adaptive Gauss-Legendre on [a, b] (12 vs 24 nodes, bisect on disagreement).

    A sub-panel is accepted when its error estimate is within rtol of its
    own value or of its share (by width) of the whole-interval estimate, so
    algebraic endpoint kinks cost a bounded number of bisections.
    """
    if b <= a:
        return 0.0
    total = 0.0
    _, whole = _gl_pair(f, a, b)
    density = abs(whole) / (b - a) if math.isfinite(whole) else 0.0
    stack = [(a, b, 0)]
    while stack:
        lo_, hi_, depth = stack.pop()
        coarse, fine = _gl_pair(f, lo_, hi_)
        err = abs(fine - coarse)
        scale = max(abs(fine), density * (hi_ - lo_))
        if err <= max(rtol * scale, atol) or not math.isfinite(fine):
            total += fine
            continue
        if depth >= max_depth:
            raise NonConvergence(f"panel [{lo_:g}, {hi_:g}] did not converge")
        m = 0.5 * (lo_ + hi_)
        stack.append((lo_, m, depth + 1))
        stack.append((m, hi_, depth + 1))
    return total


def _smoothstep(f, a, b):
    # s = a + (b - a)(3t^2 - 2t^3): the Jacobian vanishes at both ends, which
    # turns sqrt-type endpoint kinks (at breakpoints) into smooth integrands
    w = b - a

    def g(t):
        return np.asarray(f(a + w * t * t * (3.0 - 2.0 * t)), dtype=float) * (6.0 * w) * t * (1.0 - t)

    return g


def _split(f, a, b, breakpoints, rtol):
    cuts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    return sum(integrate_panel(_smoothstep(f, lo, hi), 0.0, 1.0, rtol=rtol) for lo, hi in zip(cuts[:-1], cuts[1:]))


def _geometric_tail(contribs):
    # tail of a run whose contributions shrink geometrically; 0 when the run
    # has already vanished or the ratio is not yet below one
    if len(contribs) < 2 or contribs[-1] == 0:
        return 0.0
    prev, last = contribs[-2], contribs[-1]
    if prev <= 0:
        return 0.0
    rho = last / prev
    if not 0 < rho < 1:
        return 0.0
    return last * rho / (1.0 - rho)


def _settled(contribs, rel=1e-9):
    # the last three contribution ratios agree: the run is geometric to
    # working precision and its tail extrapolation is exact to that level
    if len(contribs) < 4 or min(contribs[-4:]) <= 0:
        return False
    r = [contribs[i] / contribs[i - 1] for i in (-3, -2, -1)]
    return r[2] < 1 and abs(r[2] - r[1]) <= rel * r[2] and abs(r[1] - r[0]) <= rel * r[2]


def integrate_to_zero(
    f,
    b,
    breakpoints=(),
    rtol=1e-12,
    stop_rel=1e-12,
    max_halvings=1000,
    divergence_ratio=0.999,
    divergence_run=20,
):
    """int_0^b f(s) ds for f >= 0 possibly singular at 0.

    Returns math.inf when the dyadic contributions on [b 2^-(k+1), b 2^-k]
    stop decaying (ratio >= ``divergence_ratio`` for ``divergence_run``
    consecutive halvings).
    """
    if b <= 0:
        return 0.0
    total = 0.0
    contribs = []
    run = 0
    hi = float(b)
    for _ in range(max_halvings):
        lo = 0.5 * hi
        c = _split(f, lo, hi, breakpoints, rtol)
        if not math.isfinite(c):
            return math.inf
        contribs.append(abs(c))
        total += c
        if len(contribs) >= 2 and contribs[-2] > 0 and contribs[-1] >= divergence_ratio * contribs[-2]:
            run += 1
            if run >= divergence_run:
                return math.inf
        else:
            run = 0
        if len(contribs) >= 4:
            tail = _geometric_tail(contribs)
            if abs(c) + tail <= stop_rel * abs(total) or (_settled(contribs) and tail <= 1e-3 * abs(total)):
                return total + tail
        hi = lo
    raise NonConvergence(f"no convergence toward 0 after {max_halvings} halvings")


def integrate_line(
    g,
    lam_max,
    breakpoints=(0.0,),
    rtol=1e-12,
    stop_rel=1e-13,
    max_doublings=200,
    divergence_ratio=0.999,
    divergence_run=10,
):
    """int_R g(lam) d lam: quadrature on [-lam_max, lam_max] then doubling shells.

    Returns math.inf when the shell contributions fail to decay.
    """
    total = _split(g, -lam_max, lam_max, breakpoints, rtol)
    if not math.isfinite(total):
        return math.inf
    contribs = []
    run = 0
    lo = float(lam_max)
    for _ in range(max_doublings):
        hi = 2.0 * lo
        with np.errstate(over="ignore", invalid="ignore"):
            c = integrate_panel(g, lo, hi, rtol=rtol) + integrate_panel(g, -hi, -lo, rtol=rtol)
        if not math.isfinite(c):
            return math.inf
        contribs.append(abs(c))
        total += c
        if len(contribs) >= 2 and contribs[-2] > 0 and contribs[-1] >= divergence_ratio * contribs[-2]:
            run += 1
            if run >= divergence_run:
                return math.inf
        else:
            run = 0
        if len(contribs) >= 2:
            tail = _geometric_tail(contribs)
            if abs(c) + tail <= stop_rel * abs(total) or (_settled(contribs) and tail <= 1e-3 * abs(total)):
                return total + tail
        lo = hi
    raise NonConvergence(f"no convergence after {max_doublings} shell doublings")
