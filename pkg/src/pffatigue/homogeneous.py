"""
Homogeneous bar
===============

Semi-analytical cycle-by-cycle solver for a bar under uniform uniaxial
stress. Each cycle solves the gradient-free phase field balance at the
peak (load or displacement control), evaluates the fatigue driving
variable at peak and valley, and accumulates the fatigue history once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .fatigue import Accumulation, FatigueParams, fatigue_degradation
from .material import (
    MaterialParams,
    PfModel,
    SplitKind,
    golden_max,
    phi_balance,
    uniaxial_split_coefficients,
)

DEFAULT_MAX_CYCLES = 10_000_000
PHI_FAIL = 0.95
PHI_INIT = 1e-3

_ACC_CODES = {
    Accumulation.GENERALIZED: _kernel.GEN,
    Accumulation.LEGACY_PER_INCREMENT: _kernel.PER_INC,
    Accumulation.LEGACY_REFORMULATED: _kernel.REFORM,
    Accumulation.LEGACY_REPRESENTATIVE: _kernel.REPR,
}


class Control(enum.Enum):
    LOAD = "LoadControl"
    DISPLACEMENT = "DisplacementControl"


@dataclass(frozen=True)
class CycleLoad:
    """
    Constant-amplitude proportional cycle.

    ``amplitude`` is the stress (load control) or strain (displacement
    control) amplitude; the peak is ``2 amplitude / (1 - R)``.
    """

    control: Control
    amplitude: float
    R: float = -1.0
    max_cycles: int = DEFAULT_MAX_CYCLES
    substeps_per_cycle: int = 1

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not self.R < 1:
            raise ValueError(f"R must be < 1 for a tensile peak, got {self.R}")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.substeps_per_cycle < 1:
            raise ValueError("substeps_per_cycle must be >= 1")

    @property
    def peak(self) -> float:
        return 2.0 * self.amplitude / (1.0 - self.R)

    @classmethod
    def from_peak(cls, control: Control, peak: float, R: float = -1.0, **kwargs) -> "CycleLoad":
        return cls(control, 0.5 * peak * (1.0 - R), R, **kwargs)


@dataclass
class LifeResult:
    """Outcome of a cycle simulation; N_f is None for a runout."""

    N_i: int | None
    N_f: int | None
    runout: bool
    cycles: int
    alpha_bar: float = 0.0
    phi: float = 0.0
    H: float = 0.0
    peak_tracker: float = 0.0
    trace: dict[str, np.ndarray] = field(default_factory=dict, repr=False)


def solve_phi_homogeneous(H: float, f: float, model: PfModel, mat: MaterialParams,
                          phi_prev: float = 0.0) -> float:
    """Gradient-free phase field balance, clamped to [phi_prev, 1]."""
    if H < 0 or not 0 <= f <= 1 or not 0 <= phi_prev <= 1:
        raise ValueError("need H >= 0, f in [0, 1], phi_prev in [0, 1]")
    phi = phi_balance(model, H, f, mat.Gc, mat.ell)
    return float(min(1.0, max(phi_prev, phi)))


def _trace_capacity(max_cycles: int, dense_until: int, per_decade: int) -> int:
    extra = 0
    if max_cycles > dense_until:
        extra = int(math.ceil(per_decade * math.log10(max_cycles / dense_until))) + 4
    return min(max_cycles, dense_until) + extra + 2


def run_cycles(load: CycleLoad, mat: MaterialParams, model: PfModel, split: SplitKind,
               fp: FatigueParams, *, phi_fail: float = PHI_FAIL, phi_init: float = PHI_INIT,
               record: bool = True, dense_until: int = 10_000, per_decade: int = 200,
               initial: LifeResult | None = None) -> LifeResult:
    """
    Simulate constant-amplitude cycling of the homogeneous bar.

    Load control fails when the peak stress exceeds the current response
    envelope; displacement control fails when phi reaches ``phi_fail``.
    ``initial`` resumes from the final state of an earlier run.
    """
    cpt, _, cpc, _ = uniaxial_split_coefficients(mat, split)
    if cpt <= 0:
        raise ValueError(f"split {split} yields no tensile driving force")
    cap = _trace_capacity(load.max_cycles, dense_until, per_decade) if record else 1
    tr = [np.zeros(cap) for _ in range(5)]
    s0 = initial or LifeResult(None, None, False, 0)
    status, N_i, N, abar, tracker, H, phi, ntr = _kernel.run_kernel(
        _kernel.LOAD if load.control is Control.LOAD else _kernel.DISP,
        float(load.peak), float(load.R), int(load.max_cycles), int(load.substeps_per_cycle),
        _ACC_CODES[fp.accumulation], model is PfModel.AT1,
        mat.E, mat.Gc, mat.ell, cpt, cpc, fp.fdeg.code, fp.alpha0, float(fp.n), fp.kappa,
        fp.alpha_e, fp.alpha_n, phi_fail, phi_init,
        s0.alpha_bar, s0.peak_tracker, s0.H, s0.phi,
        *tr, dense_until if record else 0, per_decade)
    trace = {}
    if record:
        trace = dict(zip(("N", "alpha_bar", "phi", "stress", "strain"), (a[:ntr].copy() for a in tr)))
        trace["N"] = trace["N"].astype(np.int64)
    failed = status == _kernel.FAILED
    if failed and N_i <= 0:
        # unstable failure without a prior damaged state: the crack forms in the last cycle
        N_i = N
    return LifeResult(
        N_i=int(N_i) if N_i > 0 else None,
        N_f=int(N) if failed else None,
        runout=not failed,
        cycles=int(N) if failed else load.max_cycles,
        alpha_bar=float(abar), phi=float(phi), H=float(H), peak_tracker=float(tracker),
        trace=trace,
    )


@dataclass
class MonotonicCurve:
    strain: np.ndarray
    stress: np.ndarray
    peak_stress: float
    peak_strain: float


def monotonic_response(mat: MaterialParams, model: PfModel, split: SplitKind,
                       fp: FatigueParams, alpha_bar_start: float = 0.0,
                       n_points: int = 400, max_strain: float | None = None) -> MonotonicCurve:
    """
    Strain-driven monotonic tension with the fatigue history frozen.

    The envelope peak is located by bounded maximization on top of the sweep.
    """
    if alpha_bar_start < 0:
        raise ValueError("alpha_bar_start must be non-negative")
    f = fatigue_degradation(fp.fdeg, alpha_bar_start, fp.alpha0)
    cpt, _, _, _ = uniaxial_split_coefficients(mat, split)

    def sigma(eps):
        eps = np.asarray(eps, dtype=float)
        phi = np.clip(phi_balance(model, cpt * eps**2, f, mat.Gc, mat.ell), 0.0, 1.0)
        return (1.0 - phi) ** 2 * mat.E * eps

    # reference strain of the pristine envelope for this split
    if model is PfModel.AT1:
        eps_ref = math.sqrt(mat.h_min() / cpt)
    else:
        eps_ref = math.sqrt(mat.Gc / (6.0 * mat.ell * cpt))
    top = max_strain if max_strain is not None else 4.0 * eps_ref
    strain = np.linspace(0.0, top, n_points)
    stress = sigma(strain)
    if f <= 0:
        return MonotonicCurve(strain, stress, 0.0, 0.0)
    i = int(np.argmax(stress))
    lo = strain[max(i - 1, 0)]
    hi = strain[min(i + 1, n_points - 1)]
    peak_stress, peak_strain = golden_max(lambda e: float(sigma(e)), lo, hi)
    if stress[i] > peak_stress:
        peak_stress, peak_strain = float(stress[i]), float(strain[i])
    return MonotonicCurve(strain, stress, peak_stress, peak_strain)
