"""Spectral covariance measures, the dispersive equation, and measure integrals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import admissible as adm
from .errors import InvalidParameter
from .quadrature import integrate_line, integrate_panel

__all__ = [
    "Kappa",
    "EquationSpec",
    "Density",
    "MeasureForm",
    "SpectralMeasure",
    "Existence",
    "total_variation",
    "c_z_squared",
    "existence_classical",
    "existence_generalized",
    "existence_power_phi",
]


class Kappa(str, enum.Enum):
    COS = "cos"
    SIN = "sin"


@dataclass(frozen=True)
class EquationSpec:
    """sum_k a_k d^{2k+1}U/dx^{2k+1} = dU/dt with coefficients a = (a_1..a_N)."""

    a: tuple
    kappa: Kappa = Kappa.COS

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        if not a:
            raise InvalidParameter("equation needs at least one coefficient")
        if a[-1] == 0:
            raise InvalidParameter("leading coefficient a_N must be nonzero")
        if not all(math.isfinite(v) for v in a):
            raise InvalidParameter("coefficients must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "kappa", Kappa(self.kappa))

    @classmethod
    def airy(cls, kappa=Kappa.COS):
        return cls((-1.0,), kappa)

    @property
    def N(self):
        return len(self.a)

    @property
    def order(self):
        return 2 * self.N + 1

    def drift(self, lam):
        """P(lam) = sum_k a_k (-1)^k lam^{2k+1}, Horner in lam^2."""
        lam = np.asarray(lam, dtype=float)
        l2 = lam * lam
        acc = np.zeros_like(lam)
        for k in range(self.N, 0, -1):
            acc = acc * l2 + (self.a[k - 1] if k % 2 == 0 else -self.a[k - 1])
        r = acc * l2 * lam
        return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class Density:
    """Spectral density f >= 0 with a declared truncation and tail mass.

    ``tail_mass`` bounds int_{|lam| > lam_max} f. ``ppf`` (optional) is the
    quantile function of f / mass, used for equal-mass binning.
    """

    pdf: Callable
    lam_max: float
    tail_mass: float
    mass: float
    ppf: Optional[Callable] = None
    name: str = "custom"

    @classmethod
    def gaussian(cls, sigma=1.0, mass=1.0, lam_max=None):
        d = stats.norm(0.0, sigma)
        lm = 8.0 * sigma if lam_max is None else float(lam_max)
        return cls(lambda x: mass * d.pdf(x), lm, mass * 2 * d.sf(lm), mass, d.ppf, "gaussian")

    @classmethod
    def cauchy(cls, gamma=1.0, mass=1.0, lam_max=64.0):
        d = stats.cauchy(0.0, gamma)
        return cls(lambda x: mass * d.pdf(x), float(lam_max), mass * 2 * d.sf(lam_max), mass, d.ppf, "cauchy")

    @classmethod
    def uniform(cls, half_width=1.0, mass=1.0):
        d = stats.uniform(-half_width, 2 * half_width)
        return cls(lambda x: mass * d.pdf(x), float(half_width), 0.0, mass, d.ppf, "uniform")


class MeasureForm(str, enum.Enum):
    DIAGONAL = "diagonal"
    GRID = "grid"


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Covariance measure of the spectral process.

    Diagonal form: either atoms (lam_j, mass_j >= 0) or a Density, carried on
    lam = mu. Grid form: signed masses m_ij at (lam_i, mu_j).
    """

    form: MeasureForm
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mass: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: Optional[np.ndarray] = None
    density: Optional[Density] = None

    def __post_init__(self):
        object.__setattr__(self, "form", MeasureForm(self.form))
        lam = np.asarray(self.lam, dtype=float).ravel()
        mass = np.asarray(self.mass, dtype=float).ravel()
        if lam.shape != mass.shape:
            raise InvalidParameter("lam and mass must have equal length")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(mass))):
            raise InvalidParameter("measure entries must be finite")
        if self.form is MeasureForm.DIAGONAL:
            if self.mu is not None:
                raise InvalidParameter("diagonal measures carry no mu column")
            if np.any(mass < 0):
                raise InvalidParameter("stationary masses must be nonnegative")
            if self.density is not None and lam.size:
                raise InvalidParameter("give atoms or a density, not both")
            if self.density is None and not lam.size:
                raise InvalidParameter("empty measure")
        else:
            mu = np.asarray(self.mu, dtype=float).ravel() if self.mu is not None else None
            if mu is None or mu.shape != lam.shape:
                raise InvalidParameter("grid measures need a mu column matching lam")
            if self.density is not None:
                raise InvalidParameter("grid measures cannot carry a density")
            object.__setattr__(self, "mu", mu)
        lam.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def atoms(cls, lam, mass):
        return cls(MeasureForm.DIAGONAL, lam, mass)

    @classmethod
    def from_density(cls, density: Density):
        return cls(MeasureForm.DIAGONAL, density=density)

    @classmethod
    def grid(cls, lam, mu, mass):
        return cls(MeasureForm.GRID, lam, mass, mu=mu)

    @property
    def is_density(self):
        return self.density is not None

    def to_grid(self):
        """The same diagonal atoms written in grid form."""
        if self.form is not MeasureForm.DIAGONAL or self.is_density:
            raise InvalidParameter("only atomic diagonal measures convert to grid form")
        return SpectralMeasure.grid(self.lam, self.lam, self.mass)

    def __add__(self, other):
        if self.is_density or other.is_density or self.form != other.form:
            raise InvalidParameter("only atomic measures of the same form add")
        mu = None if self.form is MeasureForm.DIAGONAL else np.concatenate([self.mu, other.mu])
        return SpectralMeasure(
            self.form, np.concatenate([self.lam, other.lam]), np.concatenate([self.mass, other.mass]), mu=mu
        )

    def discretize(self, n_bins=2048):
        """Atoms (lam_j, mass_j) for simulation; densities are binned by equal mass."""
        if self.form is not MeasureForm.DIAGONAL:
            raise InvalidParameter("only diagonal measures have an atom representation")
        if not self.is_density:
            return self.lam, self.mass
        if n_bins < 2048:
            raise InvalidParameter("density binning needs at least 2048 bins")
        d = self.density
        q = (np.arange(n_bins) + 0.5) / n_bins
        if d.ppf is not None:
            nodes = np.asarray(d.ppf(q), dtype=float)
        else:
            xs = np.linspace(-d.lam_max, d.lam_max, 20 * n_bins + 1)
            pdf = np.asarray(d.pdf(xs), dtype=float)
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(xs))])
            nodes = np.interp(q * cdf[-1], cdf, xs)
        return nodes, np.full(n_bins, d.mass / n_bins)


@dataclass(frozen=True)
class Existence:
    """Outcome of a convergence check; value is math.inf when divergent."""

    satisfied: bool
    value: float

    def __bool__(self):
        return self.satisfied


def _diag_integral(m: SpectralMeasure, h):
    """int h(lam)^2 dF (diagonal) or sum h(lam_i) h(mu_j) |m_ij| (grid)."""
    if m.form is MeasureForm.GRID:
        return float(np.sum(np.asarray(h(m.lam)) * np.asarray(h(m.mu)) * np.abs(m.mass)))
    if not m.is_density:
        return float(np.sum(np.asarray(h(m.lam)) ** 2 * m.mass))
    d = m.density

    def g(x):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(h(x)) ** 2 * np.asarray(d.pdf(x))

    return integrate_line(g, d.lam_max, breakpoints=(0.0,), rtol=1e-10)


def total_variation(m: SpectralMeasure):
    """int int d|Gamma_y| without the C_y factor."""
    if m.form is MeasureForm.GRID:
        return float(np.sum(np.abs(m.mass)))
    if not m.is_density:
        return float(np.sum(m.mass))
    d = m.density
    core = integrate_panel(d.pdf, -d.lam_max, 0.0, rtol=1e-12) + integrate_panel(d.pdf, 0.0, d.lam_max, rtol=1e-12)
    return core + d.tail_mass


def _z_weight(z, eq):
    def g(lam):
        lam = np.asarray(lam, dtype=float)
        return np.asarray(adm.eval_z(z, np.abs(lam) / 2 + z.u0)) + np.asarray(
            adm.eval_z(z, 0.5 * np.abs(eq.drift(lam)) + z.u0)
        )

    return g


def c_z_squared(m: SpectralMeasure, z: adm.AdmissibleFunction, eq: EquationSpec):
    """C_Z^2 = int int g(lam) g(mu) d|Gamma|, g = Z(|lam|/2 + u0) + Z(|P(lam)|/2 + u0).

    math.inf when a density tail makes the integral diverge.
    """
    return _diag_integral(m, _z_weight(z, eq))


def _existence(value):
    return Existence(math.isfinite(value), value)


def existence_classical(m, z, eq):
    """int int |lam mu|^{2N+1} Z(u0 + |lam|^{2N+1}) Z(u0 + |mu|^{2N+1}) d|Gamma|."""
    p = eq.order

    def h(lam):
        a = np.abs(lam) ** p
        return a * np.asarray(adm.eval_z(z, z.u0 + a))

    return _existence(_diag_integral(m, h))


def existence_generalized(m, z, eq):
    """int int Z(u0 + |lam|^{2N+1}) Z(u0 + |mu|^{2N+1}) d|Gamma|."""
    p = eq.order

    def h(lam):
        return np.asarray(adm.eval_z(z, z.u0 + np.abs(lam) ** p))

    return _existence(_diag_integral(m, h))


def existence_power_phi(m, alpha_exponent, p, eq):
    """int int |lam mu|^{2N+1} (ln(1+|lam|) ln(1+|mu|))^alpha d|Gamma|, for phi = |x|^p/p."""
    if not p > 1:
        raise InvalidParameter("p must exceed 1")
    if not alpha_exponent > 1 - 1 / p:
        raise InvalidParameter(f"need alpha > 1 - 1/p = {1 - 1 / p:g}, got {alpha_exponent}")
    q = eq.order

    def h(lam):
        a = np.abs(lam)
        return a**q * np.log1p(a) ** alpha_exponent

    return _existence(_diag_integral(m, h))
