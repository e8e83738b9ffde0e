"""Dispersion kernel, solution field as a spectral sum, Gaussian simulation."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._backend import max_threads
from .errors import InvalidParameter, UnsupportedMeasure
from .spectral import EquationSpec, Kappa, MeasureForm, SpectralMeasure
from ._io import open_out

__all__ = [
    "DomainRect",
    "FieldSample",
    "drift_polynomial",
    "kernel",
    "kernel_matrix",
    "replication_increments",
    "simulate_field",
    "grid_sup_samples",
    "simulate_sup_samples",
    "sup_abs",
    "write_field_csv",
    "write_sup_csv",
]

CHUNK = 256


@dataclass(frozen=True)
class DomainRect:
    """Time [a, b] times space [c, d]."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (0 <= self.a < self.b):
            raise InvalidParameter("time interval needs 0 <= a < b")
        if not self.c < self.d:
            raise InvalidParameter("space interval needs c < d")

    @property
    def kappa_len(self):
        """max(b - a, d - c)."""
        return max(self.b - self.a, self.d - self.c)


@dataclass(frozen=True, eq=False)
class FieldSample:
    grid_t: np.ndarray
    grid_x: np.ndarray
    values: np.ndarray
    seed: int

    def __post_init__(self):
        if self.values.shape != (self.grid_t.size, self.grid_x.size):
            raise InvalidParameter("values must be (len(grid_t), len(grid_x))")
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameter("field values must be finite")


def drift_polynomial(eq: EquationSpec, lam):
    return eq.drift(lam)


def _phase(eq, t, x, lam):
    return lam * x + t * np.asarray(eq.drift(lam))


def kernel(eq: EquationSpec, t, x, lam):
    """cos or sin of lam x + t P(lam)."""
    ph = _phase(eq, np.asarray(t, float), np.asarray(x, float), np.asarray(lam, float))
    r = np.cos(ph) if eq.kappa is Kappa.COS else np.sin(ph)
    return float(r) if np.ndim(r) == 0 else r


def kernel_matrix(eq: EquationSpec, grid_t, grid_x, lam):
    """(len(t) * len(x), J) kernel values, rows ordered t-major."""
    tt, xx = np.meshgrid(np.asarray(grid_t, float), np.asarray(grid_x, float), indexing="ij")
    lam = np.asarray(lam, float)
    drift = np.asarray(eq.drift(lam)).reshape(1, -1)
    ph = xx.reshape(-1, 1) * lam.reshape(1, -1) + tt.reshape(-1, 1) * drift
    return np.cos(ph) if eq.kappa is Kappa.COS else np.sin(ph)


def replication_increments(seed, replication, sd):
    """Gaussian increments for one replication: the j-th normal of stream
    (seed, replication) scaled by sd[j]."""
    bitgen = np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, int(replication), 0])
    return np.random.Generator(bitgen).standard_normal(sd.size) * sd


def _atoms(m: SpectralMeasure, n_bins):
    if m.form is not MeasureForm.DIAGONAL:
        raise UnsupportedMeasure("simulation needs the uncorrelated-increment (diagonal) form")
    lam, mass = m.discretize(n_bins)
    return np.asarray(lam, float), np.sqrt(np.asarray(mass, float))


def _grid(dom: DomainRect, nt, nx):
    if nt < 1 or nx < 1:
        raise InvalidParameter("grid needs nt, nx >= 1")
    return np.linspace(dom.a, dom.b, nt), np.linspace(dom.c, dom.d, nx)


def simulate_field(eq, m, dom, nt=64, nx=64, seed=0, replication=0, n_bins=2048):
    """One Gaussian realization of U on a uniform nt x nx grid including endpoints."""
    lam, sd = _atoms(m, n_bins)
    gt, gx = _grid(dom, nt, nx)
    w = replication_increments(seed, replication, sd)
    vals = (kernel_matrix(eq, gt, gx, lam) @ w).reshape(nt, nx)
    return FieldSample(gt, gx, vals, int(seed))


def grid_sup_samples(eq, lam, sd, grid_t, grid_x, seed, replications, scale=None, threads=None):
    """max over the grid of scale * |U| for replications 0..R-1.

    Work is split into fixed chunks of replications, so the output does not
    depend on the number of threads.
    """
    R = int(replications)
    if R < 0:
        raise InvalidParameter("replications must be >= 0")
    kmat = np.ascontiguousarray(kernel_matrix(eq, grid_t, grid_x, lam))
    if scale is not None:
        scale = np.ascontiguousarray(np.asarray(scale, float).reshape(-1))
        if scale.size != kmat.shape[0]:
            raise InvalidParameter("scale must match the flattened grid")
    out = np.empty(R)

    def run(start):
        stop = min(start + CHUNK, R)
        w = np.stack([replication_increments(seed, r, sd) for r in range(start, stop)])
        out[start:stop] = kernels.sup_abs_weighted(kmat, w, scale)

    starts = range(0, R, CHUNK)
    n = max_threads() if threads is None else max(1, int(threads))
    if n == 1 or R <= CHUNK:
        for s in starts:
            run(s)
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            list(ex.map(run, starts))
    return out


def simulate_sup_samples(eq, m, dom, nt=64, nx=64, seed=0, replications=1000, threads=None, n_bins=2048):
    lam, sd = _atoms(m, n_bins)
    gt, gx = _grid(dom, nt, nx)
    return grid_sup_samples(eq, lam, sd, gt, gx, seed, replications, threads=threads)


def sup_abs(sample: FieldSample):
    if sample.values.size == 0:
        raise InvalidParameter("empty grid")
    return float(np.max(np.abs(sample.values)))


def write_field_csv(sample: FieldSample, path):
    with open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "value"])
        for i, t in enumerate(sample.grid_t):
            for j, x in enumerate(sample.grid_x):
                w.writerow([f"{t:.17g}", f"{x:.17g}", f"{sample.values[i, j]:.17g}"])


def write_sup_csv(samples, path):
    with open_out(path) as fh:
        fh.write("sup_abs\n")
        for v in samples:
            fh.write(f"{v:.17g}\n" if math.isfinite(v) else "inf\n")
