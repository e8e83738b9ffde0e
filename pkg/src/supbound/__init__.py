"""Tail bounds for suprema of solutions to odd-order dispersive equations
with phi-sub-Gaussian harmonizable initial data."""

from . import admissible, bounds, orlicz, spectral
from .admissible import AdmissibleFunction, ZKind
from .errors import (
    BelowThreshold,
    Infeasible,
    InvalidParameter,
    InverseOverflow,
    NonConvergence,
    SeriesDiverges,
    SupboundError,
    SWindowEmpty,
    UnsupportedMeasure,
)
from .field import DomainRect
from .orlicz import NFunction, NKind, SubGaussianStandard
from .spectral import Density, EquationSpec, Kappa, SpectralMeasure

__version__ = "0.1.0"
