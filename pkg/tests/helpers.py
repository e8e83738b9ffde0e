"""Shared fixtures for the test modules."""

import pathlib

from supbound import admissible as adm
from supbound import bounds, orlicz, spectral
from supbound.field import DomainRect

CONFIGS = pathlib.Path(__file__).parent / "configs"
AIRY_CFG = CONFIGS / "airy_four_atoms.json"


def four_atoms():
    return spectral.SpectralMeasure.atoms([-1.0, 1.0, -2.0, 2.0], [0.25] * 4)


def airy_inputs(z=None, dom=None):
    return bounds.BoundInputs(
        orlicz.NFunction.gaussian(),
        z or adm.AdmissibleFunction("log_power", 1.0),
        four_atoms(),
        spectral.EquationSpec.airy(),
        dom or DomainRect(0.0, 1.0, -1.0, 1.0),
    )
