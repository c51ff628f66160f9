"""
Campaigns
=========

S-N curve generation over amplitude and load-ratio grids, Basquin fitting,
regeneration of the n-versus-slope coefficients, material presets and
CSV persistence.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .fatigue import FatigueParams, FDeg
from .homogeneous import DEFAULT_MAX_CYCLES, CycleLoad, Control, run_cycles
from .material import MaterialParams, PfModel, SplitKind, critical_point

CSV_HEADER = ("material", "model", "split", "fdeg", "n", "kappa", "alpha0", "alpha_e",
              "control", "amplitude", "R", "N_i", "N_f", "runout")

#: sigma_a / sigma_c grid used for slope regeneration (just above the endurance limit)
TABLE1_GRID = tuple(np.round(np.linspace(0.21, 0.30, 6), 6))
TABLE1_TARGET_CYCLES = 1.0e5


@dataclass(frozen=True)
class MaterialPreset:
    """
    Named material with its fatigue calibration.

    ``ell`` maps each phase field model to its length scale so that presets
    calibrated on strength (model material) can differ per model.
    """

    name: str
    E: float
    nu: float
    Gc: float
    ell: dict
    sigma_e: float
    alpha0: float
    n: float = 1.0
    kappa: float = 0.5

    def material(self, model: PfModel) -> MaterialParams:
        return MaterialParams(E=self.E, nu=self.nu, Gc=self.Gc, ell=self.ell[model])

    def fatigue(self, model: PfModel, **overrides) -> FatigueParams:
        kw = dict(n=self.n, kappa=self.kappa)
        kw.update(overrides)
        alpha0 = kw.pop("alpha0", self.alpha0)
        sigma_e = kw.pop("sigma_e", self.sigma_e)
        return FatigueParams.from_material(self.material(model), model, alpha0, sigma_e, **kw)


def material_presets() -> dict[str, MaterialPreset]:
    """Built-in presets in N, mm, MPa (Gc in kJ/m^2 = N/mm)."""
    return {
        "AISI4340": MaterialPreset("AISI4340", E=210e3, nu=0.3, Gc=20.0,
                                   ell={PfModel.AT1: 0.318, PfModel.AT2: 0.318},
                                   sigma_e=530.0, alpha0=5.0e-4, n=10.0, kappa=0.55),
        "M300": MaterialPreset("M300", E=210e3, nu=0.3, Gc=13.0,
                               ell={PfModel.AT1: 0.315, PfModel.AT2: 0.315},
                               sigma_e=650.0, alpha0=17.0, n=6.0, kappa=0.5),
        "ModelMaterial": MaterialPreset("ModelMaterial", E=1.0, nu=0.3, Gc=1.0,
                                        ell={PfModel.AT1: 0.375, PfModel.AT2: 0.1055},
                                        sigma_e=0.2, alpha0=100.0),
    }


@dataclass(frozen=True)
class SNPoint:
    amplitude_or_max: float
    R: float
    N_f: int
    runout: bool
    N_i: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class BasquinFit:
    """sigma = C_star N^m_star; m = -1 / m_star."""

    C_star: float
    m_star: float
    m: float
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class NotchedSetup:
    """FEM specimen options for notched campaigns."""

    D: float = 12.7
    d: float = 6.35
    rho: float = 1.016
    groove_angle: float = 60.0
    length: float | None = None
    ref_ratio: float = 5.0
    growth: float = 1.15
    root_divisions: int = 16
    tol_rel: float = 1e-8
    tol_abs: float = 0.0
    max_iterations: int = 200
    refresh_every: int = 50
    max_backtracks: int = 6
    snapshot_every: int = 0


@dataclass(frozen=True)
class Campaign:
    """
    One S-N campaign: every (amplitude, R) pair of the grid is an
    independent run.

    ``amplitude_mode`` is "amplitude" (values are sigma_a or eps_a) or
    "max" (values are the peak sigma_max or eps_max).
    """

    material_name: str
    mat: MaterialParams
    model: PfModel
    split: SplitKind
    fatigue: FatigueParams
    amplitudes: tuple
    ratios: tuple = (-1.0,)
    control: Control = Control.LOAD
    amplitude_mode: str = "amplitude"
    max_cycles: int = DEFAULT_MAX_CYCLES
    solver: str = "homogeneous"
    notch: NotchedSetup | None = None

    def __post_init__(self):
        if len(self.amplitudes) == 0 or len(self.ratios) == 0:
            raise ValueError("campaign load grid is empty")
        if self.amplitude_mode not in ("amplitude", "max"):
            raise ValueError(f"unknown amplitude_mode {self.amplitude_mode!r}")
        if self.solver not in ("homogeneous", "fem"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.solver == "fem" and self.notch is None:
            raise ValueError("fem campaigns need a notch setup")

    def grid(self) -> list[tuple[float, float]]:
        return [(float(a), float(r)) for r in self.ratios for a in self.amplitudes]

    def load(self, value: float, R: float) -> CycleLoad:
        if self.amplitude_mode == "amplitude":
            return CycleLoad(self.control, value, R, max_cycles=self.max_cycles)
        return CycleLoad.from_peak(self.control, value, R, max_cycles=self.max_cycles)


def _run_point(campaign: Campaign, value: float, R: float, snapshot_dir=None) -> SNPoint:
    try:
        load = campaign.load(value, R)
        if campaign.solver == "homogeneous":
            res = run_cycles(load, campaign.mat, campaign.model, campaign.split,
                             campaign.fatigue, record=False)
        else:
            res = _run_notched(campaign, load, snapshot_dir).life
    except Exception as exc:  # recorded per point, never fatal
        return SNPoint(value, R, campaign.max_cycles, False, None, f"{type(exc).__name__}: {exc}")
    N_f = res.N_f if res.N_f is not None else campaign.max_cycles
    return SNPoint(value, R, int(N_f), res.runout, res.N_i)


def _run_notched(campaign: Campaign, load: CycleLoad, snapshot_dir=None):
    from . import fem

    s = campaign.notch
    geom = fem.NotchGeometry(D=s.D, d=s.d, rho=s.rho, groove_angle=s.groove_angle,
                             length=s.length)
    mesh = fem.generate_notched_mesh(geom, campaign.mat.ell, s.ref_ratio, growth=s.growth,
                                     root_divisions=s.root_divisions)
    opts = fem.SolverOptions(tol_rel=s.tol_rel, tol_abs=s.tol_abs,
                             max_iterations=s.max_iterations, refresh_every=s.refresh_every,
                             max_backtracks=s.max_backtracks)
    return fem.run_fatigue_fem(mesh, load, campaign.mat, campaign.model, campaign.split,
                               campaign.fatigue, options=opts, snapshot_dir=snapshot_dir,
                               snapshot_every=s.snapshot_every)


def _run_star(args):
    return _run_point(*args)


def sn_curve(campaign: Campaign, threads: int = 1, snapshot_root=None) -> list[SNPoint]:
    """
    Run every grid point; results come back in grid order.

    FEM campaigns write VTK snapshots of point i to ``snapshot_root/point_<i>``.
    """
    jobs = []
    for i, (a, r) in enumerate(campaign.grid()):
        snap = None
        if snapshot_root is not None and campaign.solver == "fem":
            snap = os.path.join(os.fspath(snapshot_root), f"point_{i:03d}")
        jobs.append((campaign, a, r, snap))
    if threads <= 1 or len(jobs) == 1:
        return [_run_point(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_star, jobs))


def fit_basquin(points: Sequence[SNPoint], sigma_c: float | None = None,
                window: float = 0.7, min_cycles: float = 100.0) -> BasquinFit:
    """
    Least-squares fit of log sigma against log N.

    Runouts, failed runs, points with N_f < ``min_cycles`` and, when
    ``sigma_c`` is given, amplitudes above ``window * sigma_c`` are excluded.
    """
    use = [p for p in points
           if not p.runout and p.error is None and p.N_f >= min_cycles
           and (sigma_c is None or p.amplitude_or_max <= window * sigma_c)]
    if len(use) < 3:
        raise ValueError(f"need at least 3 points in the linear regime, got {len(use)}")
    x = np.log10([p.N_f for p in use])
    y = np.log10([p.amplitude_or_max for p in use])
    if np.ptp(x) == 0:
        raise ValueError("degenerate S-N data: all lives are equal")
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    if slope == 0:
        raise ValueError("degenerate S-N data: zero slope")
    return BasquinFit(C_star=float(10.0**icpt), m_star=float(slope), m=float(-1.0 / slope),
                      r_squared=r2,
                      n_points=len(use))


@dataclass(frozen=True)
class SlopeRegression:
    C1: float
    C2: float
    n: tuple
    m: tuple
    fits: tuple = field(repr=False, default=())


def regenerate_table1(model: PfModel, fdeg: FDeg, n_grid: Sequence[float] = (1, 2, 3, 4, 5),
                      amplitudes: Sequence[float] = TABLE1_GRID,
                      target_cycles: float = TABLE1_TARGET_CYCLES,
                      preset: MaterialPreset | None = None,
                      split: SplitKind = SplitKind.NO_TENSION, threads: int = 1) -> SlopeRegression:
    """
    Regress n on the Basquin slope m for one (model, fdeg) pair.

    Amplitudes are fractions of sigma_c under fully reversed load control.
    The slope does not depend on alpha0, so alpha0 is rescaled per n to put
    the lowest amplitude near ``target_cycles`` and keep run times bounded.
    """
    if len(n_grid) < 4:
        raise ValueError("need at least 4 exponents")
    preset = preset or material_presets()["ModelMaterial"]
    mat = preset.material(model)
    sigma_c, _ = critical_point(model, mat)
    ms, fits = [], []
    for n in n_grid:
        fp = preset.fatigue(model, n=float(n), fdeg=fdeg, kappa=0.5)
        s0 = amplitudes[0]
        probe = replace(fp, alpha0=target_cycles * s0 ** (2 * n))
        res = run_cycles(CycleLoad(Control.LOAD, s0 * sigma_c, max_cycles=10**9), mat, model,
                         split, probe, record=False)
        if res.N_f is None:
            raise RuntimeError(f"lowest amplitude {s0} is a runout for n={n}")
        fp = replace(probe, alpha0=probe.alpha0 * target_cycles / res.N_f)
        camp = Campaign(preset.name, mat, model, split, fp,
                        amplitudes=tuple(a * sigma_c for a in amplitudes), max_cycles=10**9)
        fit = fit_basquin(sn_curve(camp, threads), sigma_c=sigma_c)
        ms.append(fit.m)
        fits.append(fit)
    C1, C2 = np.polyfit(ms, np.asarray(n_grid, float), 1)
    return SlopeRegression(float(C1), float(C2), tuple(float(v) for v in n_grid), tuple(ms),
                           tuple(fits))


def ratio_sweep(campaign: Campaign, value: float, ratios: Sequence[float],
                threads: int = 1) -> list[SNPoint]:
    """Lives at one amplitude (or peak, per ``amplitude_mode``) over several R."""
    return sn_curve(replace(campaign, amplitudes=(value,), ratios=tuple(ratios)), threads)


def csv_rows(campaign: Campaign, points: Sequence[SNPoint]) -> list[list]:
    fp = campaign.fatigue
    rows = []
    for p in points:
        rows.append([campaign.material_name, campaign.model.value, campaign.split.value,
                     fp.fdeg.value, repr(fp.n), repr(fp.kappa), repr(fp.alpha0), repr(fp.alpha_e),
                     campaign.control.value, repr(p.amplitude_or_max), repr(p.R),
                     "" if p.N_i is None else p.N_i, p.N_f, int(p.runout)])
    return rows


def write_csv(path, campaign: Campaign, points: Sequence[SNPoint]) -> None:
    """Write results with one row per grid point; runouts are flagged, not dropped."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(csv_rows(campaign, points))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def endurance_amplitude(points: Sequence[SNPoint]) -> float:
    """Largest amplitude that still runs out (nan if none)."""
    ro = [p.amplitude_or_max for p in points if p.runout]
    return max(ro) if ro else math.nan
