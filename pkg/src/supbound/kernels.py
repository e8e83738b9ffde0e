"""Hot loops, each in a numba version and a numpy version.

The numba versions are used unless SUPBOUND_NUMBA=0. Both versions of a
kernel take and return the same arrays so the benchmark and the tests can
call them side by side.
"""

from __future__ import annotations

import numpy as np

from ._backend import HAVE_NUMBA, use_numba

__all__ = ["sup_abs_weighted", "scan_series", "sup_abs_weighted_numpy", "scan_series_numpy"]


def sup_abs_weighted_numpy(kmat, w, scale=None):
    """max_g scale_g |sum_j kmat[g, j] w[r, j]| for each replication r.

    kmat: (G, J) kernel values on the flattened grid;
    w: (R, J) spectral increments; scale: optional (G,) positive weights.
    """
    u = np.abs(kmat @ w.T)
    if scale is not None:
        u *= scale[:, None]
    if u.shape[0] == 0:
        return np.zeros(w.shape[0])
    return u.max(axis=0)


def scan_series_numpy(terms, total, run, rel_tol, run_needed):
    """Add ``terms`` to ``total`` until ``run_needed`` consecutive terms are
    each below rel_tol times the running sum.

    Returns (total, run, stop) where stop is the index of the term that
    completed the run, or -1 if the block was consumed without stopping.
    """
    n = terms.shape[0]
    if n == 0:
        return total, run, -1
    cs = total + np.cumsum(terms)
    small = terms < rel_tol * cs
    idx = np.arange(n)
    last_big = np.maximum.accumulate(np.where(small, -1 - run, idx))
    runlen = idx - last_big
    hit = np.flatnonzero(runlen >= run_needed)
    if hit.size:
        stop = int(hit[0])
        return float(total + np.sum(terms[: stop + 1])), run_needed, stop
    tail = int(runlen[-1])
    return float(total + np.sum(terms)), tail, -1


if HAVE_NUMBA:
    import numba

    @numba.njit(cache=True, nogil=True, fastmath=False)
    def _sup_abs_weighted_nb(kmat, w, scale, use_scale):
        G, J = kmat.shape
        R = w.shape[0]
        out = np.zeros(R)
        for r in range(R):
            best = 0.0
            for g in range(G):
                acc = 0.0
                for j in range(J):
                    acc += kmat[g, j] * w[r, j]
                a = abs(acc)
                if use_scale:
                    a *= scale[g]
                if a > best:
                    best = a
            out[r] = best
        return out

    @numba.njit(cache=True, nogil=True)
    def _scan_series_nb(terms, total, run, rel_tol, run_needed):
        # Neumaier-compensated running sum
        comp = 0.0
        for i in range(terms.shape[0]):
            x = terms[i]
            t = total + x
            if abs(total) >= abs(x):
                comp += (total - t) + x
            else:
                comp += (x - t) + total
            total = t
            if x < rel_tol * (total + comp):
                run += 1
                if run >= run_needed:
                    return total + comp, run, i
            else:
                run = 0
        return total + comp, run, -1


def sup_abs_weighted(kmat, w, scale=None):
    kmat = np.ascontiguousarray(kmat, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if not use_numba():
        return sup_abs_weighted_numpy(kmat, w, scale)
    if scale is None:
        return _sup_abs_weighted_nb(kmat, w, np.ones(1), False)
    return _sup_abs_weighted_nb(kmat, w, np.ascontiguousarray(scale, dtype=np.float64), True)


def scan_series(terms, total, run, rel_tol, run_needed):
    terms = np.ascontiguousarray(terms, dtype=np.float64)
    if not use_numba():
        return scan_series_numpy(terms, total, run, rel_tol, run_needed)
    total, run, stop = _scan_series_nb(terms, float(total), int(run), float(rel_tol), int(run_needed))
    return float(total), int(run), int(stop)
