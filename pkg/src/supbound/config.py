"""Run configuration: a JSON document validated on load (unknown keys rejected)."""

from __future__ import annotations

import json
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import admissible as adm
from . import orlicz, spectral
from .field import DomainRect

__all__ = ["RunConfig", "load_config"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class EquationCfg(_Strict):
    a: List[float]
    N: Optional[int] = None
    kappa: Literal["cos", "sin"] = "cos"

    @model_validator(mode="after")
    def _check(self):
        if self.N is not None and self.N != len(self.a):
            raise ValueError(f"N={self.N} but {len(self.a)} coefficients given")
        self.build()
        return self

    def build(self):
        return spectral.EquationSpec(tuple(self.a), self.kappa)


class PhiCfg(_Strict):
    kind: Literal["gaussian", "power_alpha", "piecewise_power", "exp_power"] = "gaussian"
    alpha: float = 2.0
    a_scale: float = 1.0

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self

    def build(self):
        return orlicz.NFunction(self.kind, self.alpha, self.a_scale)


class ZCfg(_Strict):
    kind: Literal["power", "log_power"]
    alpha: float

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self

    def build(self):
        return adm.AdmissibleFunction(self.kind, self.alpha)


class DensityCfg(_Strict):
    name: Literal["gaussian", "cauchy-truncated", "uniform"]
    mass: float = 1.0
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    half_width: Optional[float] = None
    lam_max: Optional[float] = None

    def build(self):
        if self.mass <= 0:
            raise ValueError("density mass must be positive")
        if self.name == "gaussian":
            return spectral.Density.gaussian(self.sigma or 1.0, self.mass, self.lam_max)
        if self.name == "cauchy-truncated":
            return spectral.Density.cauchy(self.gamma or 1.0, self.mass, self.lam_max or 64.0)
        return spectral.Density.uniform(self.half_width or 1.0, self.mass)


class SpectralCfg(_Strict):
    form: Literal["diagonal", "grid"] = "diagonal"
    atoms: Optional[List[List[float]]] = None
    density: Optional[DensityCfg] = None
    grid: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self

    def build(self):
        if self.form == "grid":
            if self.grid is None or self.atoms is not None or self.density is not None:
                raise ValueError("grid form needs 'grid' rows [lam, mu, mass] only")
            if any(len(r) != 3 for r in self.grid):
                raise ValueError("grid rows must be [lam, mu, mass]")
            lam, mu, mass = zip(*self.grid) if self.grid else ((), (), ())
            return spectral.SpectralMeasure.grid(lam, mu, mass)
        if (self.atoms is None) == (self.density is None):
            raise ValueError("diagonal form needs exactly one of 'atoms' or 'density'")
        if self.atoms is not None:
            if not self.atoms or any(len(r) != 2 for r in self.atoms):
                raise ValueError("atoms must be non-empty rows [lam, mass]")
            lam, mass = zip(*self.atoms)
            return spectral.SpectralMeasure.atoms(lam, mass)
        return spectral.SpectralMeasure.from_density(self.density.build())


class DomainCfg(_Strict):
    a: float
    b: float
    c: float
    d: float

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self

    def build(self):
        return DomainRect(self.a, self.b, self.c, self.d)


class BoundsCfg(_Strict):
    u_min: float
    u_max: float
    u_steps: int = Field(16, ge=1)
    prefactor2: bool = True

    @model_validator(mode="after")
    def _check(self):
        if not 0 < self.u_min <= self.u_max:
            raise ValueError("need 0 < u_min <= u_max")
        return self


class GrowthCfg(_Strict):
    A: float
    L: Optional[float] = None
    b: Optional[List[float]] = None
    delta: float = 1.0
    weight: Literal["iterated_log", "constant", "values"] = "iterated_log"
    c: Optional[float] = None
    values: Optional[List[float]] = None
    s: Optional[float] = None
    theta: Optional[float] = None
    K_max: int = Field(10**15, ge=1)
    k_start: Union[int, Literal["auto"]] = "auto"
    k_end: Optional[int] = None
    threshold_rule: Literal["sup_segments", "first_segment"] = "sup_segments"
    u_min: float = 1.0
    u_max: float = 10.0
    u_steps: int = Field(16, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if (self.L is None) == (self.b is None):
            raise ValueError("growth needs exactly one of L or b")
        if self.weight == "iterated_log" and self.L is None:
            raise ValueError("iterated_log weight needs geometric segments (L)")
        if self.weight == "constant" and self.c is None:
            raise ValueError("constant weight needs c")
        if self.weight == "values" and self.values is None:
            raise ValueError("values weight needs values")
        if self.theta is not None and not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if not 0 < self.u_min <= self.u_max:
            raise ValueError("need 0 < u_min <= u_max")
        return self


class SimulateCfg(_Strict):
    replications: int = Field(1000, ge=0)
    nt: int = Field(64, ge=1)
    nx: int = Field(64, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    n_bins: int = Field(2048, ge=2048)


class VerifyCfg(_Strict):
    confidence: float = Field(0.95, gt=0.5, lt=1.0)


class ExistenceCfg(_Strict):
    log_exponent: Optional[float] = None


class RunConfig(_Strict):
    equation: EquationCfg
    phi: PhiCfg = PhiCfg()
    z: ZCfg
    spectral: SpectralCfg
    domain: Optional[DomainCfg] = None
    C_y: float = Field(1.0, gt=0)
    bounds: Optional[BoundsCfg] = None
    growth: Optional[GrowthCfg] = None
    simulate: SimulateCfg = SimulateCfg()
    verify: VerifyCfg = VerifyCfg()
    existence: ExistenceCfg = ExistenceCfg()

    def dumps(self):
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True)


def load_config(path):
    with open(path) as fh:
        return RunConfig.model_validate_json(fh.read())
