"""
Run configuration
=================

YAML files validated against a versioned schema before anything is solved.
Units follow the consistent N, mm, MPa system, in which an energy release
rate entered in kJ/m^2 has the same numerical value in N/mm.

A minimal smooth-bar campaign::

    version: 1
    material: {preset: ModelMaterial}
    model: AT1
    loading: {values: [0.3, 0.4, 0.5]}

Fields left unset are filled from the preset. ``resolve`` returns the fully
explicit configuration that is echoed into the run manifest.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .fatigue import Accumulation, FatigueParams, FDeg
from .homogeneous import DEFAULT_MAX_CYCLES, Control
from .material import MaterialParams, PfModel, SplitKind
from .study import Campaign, NotchedSetup, material_presets

SCHEMA_VERSION = 1
MANIFEST_FORMAT = "pffatigue-manifest"


class ConfigError(ValueError):
    """Raised for unreadable or schema-invalid configuration files."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MaterialConfig(_Strict):
    preset: str | None = None
    E: float | None = Field(None, gt=0, description="Young's modulus [MPa]")
    nu: float | None = Field(None, gt=-1.0, lt=0.5, description="Poisson's ratio [-]")
    Gc: float | None = Field(None, gt=0, description="toughness [kJ/m^2 = N/mm]")
    ell: float | None = Field(None, gt=0, description="length scale [mm]")

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, v):
        if v is not None and v not in material_presets():
            raise ValueError(f"unknown preset {v!r}; choose from {sorted(material_presets())}")
        return v


class FatigueConfig(_Strict):
    fdeg: FDeg = FDeg.F2
    accumulation: Accumulation = Accumulation.GENERALIZED
    n: float | None = Field(None, ge=1.0)
    kappa: float | None = Field(None, ge=0.0, le=1.0)
    alpha0: float | None = Field(None, gt=0)
    sigma_e: float | None = Field(None, ge=0, description="endurance stress [MPa]")


class LoadingConfig(_Strict):
    control: Control = Control.LOAD
    mode: Literal["amplitude", "max"] = "amplitude"
    values: list[float] = Field(min_length=1)
    relative: bool = Field(True, description="values are fractions of sigma_c (or eps_c)")
    ratios: list[float] = Field(default_factory=lambda: [-1.0], min_length=1)
    max_cycles: int = Field(DEFAULT_MAX_CYCLES, ge=1)

    @field_validator("values")
    @classmethod
    def _positive(cls, v):
        if any(not x > 0 for x in v):
            raise ValueError("load values must be positive")
        return v

    @field_validator("ratios")
    @classmethod
    def _below_one(cls, v):
        if any(not r < 1.0 for r in v):
            raise ValueError("load ratios must be < 1")
        return v


class SolverConfig(_Strict):
    kind: Literal["homogeneous", "fem"] = "homogeneous"
    tol_rel: float = Field(1e-8, ge=0)
    tol_abs: float = Field(0.0, ge=0)
    max_iterations: int = Field(200, ge=1)
    refresh_every: int = Field(50, ge=1)
    max_backtracks: int = Field(6, ge=0)


class MeshConfig(_Strict):
    D: float = Field(12.7, gt=0, description="gross diameter [mm]")
    d: float = Field(6.35, gt=0, description="net diameter [mm]")
    rho: float = Field(1.016, gt=0, description="notch root radius [mm]")
    groove_angle: float = Field(60.0, gt=0, lt=180)
    length: float | None = Field(None, gt=0, description="modelled half length [mm]")
    ref_ratio: float = Field(5.0, gt=0, description="ell / element size at the root")
    growth: float = Field(1.15, gt=1.0)
    root_divisions: int = Field(16, ge=2)

    @model_validator(mode="after")
    def _net_below_gross(self):
        if not self.d < self.D:
            raise ValueError("net diameter d must be smaller than D")
        return self


class OutputConfig(_Strict):
    directory: str = "out"
    snapshot_every: int = Field(0, ge=0, description="VTK every k solved cycles (0: final only)")


class RunConfig(_Strict):
    """Schema of a run; see the module docstring for an example."""

    version: Literal[1]
    name: str = "run"
    material: MaterialConfig
    model: PfModel = PfModel.AT1
    split: SplitKind = SplitKind.NO_TENSION
    fatigue: FatigueConfig = FatigueConfig()
    loading: LoadingConfig
    solver: SolverConfig = SolverConfig()
    mesh: MeshConfig | None = None
    output: OutputConfig = OutputConfig()
    threads: int = Field(1, ge=1)
    verbosity: Literal["debug", "info", "warning", "error"] = "info"
    seed: int = 0

    @model_validator(mode="after")
    def _complete(self):
        m = self.material
        if m.preset is None:
            missing = [k for k in ("E", "nu", "Gc", "ell") if getattr(m, k) is None]
            if missing:
                raise ValueError(f"material: set a preset or all of {missing}")
            if self.fatigue.alpha0 is None:
                raise ValueError("fatigue.alpha0 is required without a material preset")
        return self

    def log_level(self) -> int:
        return getattr(logging, self.verbosity.upper())


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def parse_config(data: dict) -> RunConfig:
    """Validate a mapping; manifests are unwrapped to their configuration."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    if data.get("format") == MANIFEST_FORMAT:
        data = data.get("config")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_error(err)) from None


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: not valid YAML ({err})") from None
    return parse_config(data)


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill preset defaults so that the configuration is fully explicit."""
    m, fcfg = cfg.material, cfg.fatigue
    if m.preset is not None:
        p = material_presets()[m.preset]
        m = m.model_copy(update={
            "E": p.E if m.E is None else m.E,
            "nu": p.nu if m.nu is None else m.nu,
            "Gc": p.Gc if m.Gc is None else m.Gc,
            "ell": p.ell[cfg.model] if m.ell is None else m.ell,
        })
        fcfg = fcfg.model_copy(update={
            "n": p.n if fcfg.n is None else fcfg.n,
            "kappa": p.kappa if fcfg.kappa is None else fcfg.kappa,
            "alpha0": p.alpha0 if fcfg.alpha0 is None else fcfg.alpha0,
            "sigma_e": p.sigma_e if fcfg.sigma_e is None else fcfg.sigma_e,
        })
    fcfg = fcfg.model_copy(update={
        "n": 1.0 if fcfg.n is None else fcfg.n,
        "kappa": 0.5 if fcfg.kappa is None else fcfg.kappa,
        "sigma_e": 0.0 if fcfg.sigma_e is None else fcfg.sigma_e,
    })
    mesh = cfg.mesh
    if cfg.solver.kind == "fem" and mesh is None:
        mesh = MeshConfig()
    # re-validate so the resolved copy obeys the same constraints
    return RunConfig.model_validate(
        cfg.model_copy(update={"material": m, "fatigue": fcfg, "mesh": mesh}).model_dump())


def to_dict(cfg: RunConfig) -> dict:
    """Plain YAML-serializable mapping (enums as their values)."""
    return cfg.model_dump(mode="json")


def material_of(cfg: RunConfig) -> MaterialParams:
    m = resolve(cfg).material
    return MaterialParams(E=m.E, nu=m.nu, Gc=m.Gc, ell=m.ell)


def build_campaign(cfg: RunConfig) -> Campaign:
    """Translate a configuration into a study campaign with absolute load values."""
    from .material import critical_point

    cfg = resolve(cfg)
    mat = material_of(cfg)
    f = cfg.fatigue
    fp = FatigueParams.from_material(mat, cfg.model, f.alpha0, f.sigma_e, n=f.n,
                                     kappa=f.kappa, fdeg=f.fdeg, accumulation=f.accumulation)
    load = cfg.loading
    values = tuple(load.values)
    if load.relative:
        sigma_c, eps_c = critical_point(cfg.model, mat)
        scale = sigma_c if load.control is Control.LOAD else eps_c
        values = tuple(v * scale for v in values)
    notch = None
    if cfg.solver.kind == "fem":
        g, s = cfg.mesh, cfg.solver
        notch = NotchedSetup(D=g.D, d=g.d, rho=g.rho, groove_angle=g.groove_angle,
                             length=g.length, ref_ratio=g.ref_ratio, growth=g.growth,
                             root_divisions=g.root_divisions, tol_rel=s.tol_rel,
                             tol_abs=s.tol_abs, max_iterations=s.max_iterations,
                             refresh_every=s.refresh_every, max_backtracks=s.max_backtracks,
                             snapshot_every=cfg.output.snapshot_every)
    name = cfg.material.preset or "custom"
    return Campaign(name, mat, cfg.model, cfg.split, fp, amplitudes=values,
                    ratios=tuple(load.ratios), control=load.control,
                    amplitude_mode=load.mode, max_cycles=load.max_cycles,
                    solver=cfg.solver.kind, notch=notch)


def with_max_cycles(cfg: RunConfig, max_cycles: int) -> RunConfig:
    return cfg.model_copy(update={"loading": cfg.loading.model_copy(
        update={"max_cycles": int(max_cycles)})})


def with_output(cfg: RunConfig, directory: str) -> RunConfig:
    return cfg.model_copy(update={"output": cfg.output.model_copy(
        update={"directory": str(directory)})})


__all__ = [
    "ConfigError", "FatigueConfig", "LoadingConfig", "MANIFEST_FORMAT", "MaterialConfig",
    "MeshConfig", "OutputConfig", "RunConfig", "SCHEMA_VERSION", "SolverConfig",
    "build_campaign", "load_config", "material_of", "parse_config", "resolve", "to_dict",
    "with_max_cycles", "with_output",
]
