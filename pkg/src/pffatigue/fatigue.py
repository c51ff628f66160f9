"""
Fatigue degradation and accumulation
====================================

Fatigue degradation functions f(abar) that reduce the toughness, the
fatigue driving variable alpha = g(phi) psi+, the per-cycle accumulation
rule with endurance gate and Walker mean-stress factor, the legacy
per-increment rules it generalizes, and calibration helpers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .material import MaterialParams, PfModel, degrade


class FDeg(enum.Enum):
    F0 = "F0"
    F1 = "F1"
    F2 = "F2"

    @property
    def code(self) -> int:
        return int(self.value[1])


class Accumulation(enum.Enum):
    GENERALIZED = "GeneralizedOnePerCycle"
    LEGACY_PER_INCREMENT = "LegacyPerIncrement"
    LEGACY_REFORMULATED = "LegacyReformulated"
    LEGACY_REPRESENTATIVE = "LegacyRepresentative"


#: (model, fdeg) -> (C1, C2) in n = C1 m + C2
SLOPE_COEFFICIENTS = {
    (PfModel.AT1, FDeg.F0): (0.50, -0.56),
    (PfModel.AT1, FDeg.F1): (0.50, -0.63),
    (PfModel.AT1, FDeg.F2): (0.50, -0.13),
    (PfModel.AT2, FDeg.F0): (0.50, -0.55),
    (PfModel.AT2, FDeg.F1): (0.49, -0.61),
    (PfModel.AT2, FDeg.F2): (0.49, -0.12),
}


@dataclass(frozen=True)
class FatigueParams:
    """
    Fatigue model parameters.

    Attributes:
        alpha0: fatigue susceptibility abar_0 [-]
        n: power exponent on alpha_max / alpha_n [-]
        kappa: Walker mean-stress exponent in [0, 1]
        alpha_e: endurance threshold [energy density]
        alpha_n: normalization of alpha [energy density]
        fdeg: fatigue degradation function
        accumulation: accumulation rule
    """

    alpha0: float
    n: float = 1.0
    kappa: float = 0.5
    alpha_e: float = 0.0
    alpha_n: float = 1.0
    fdeg: FDeg = FDeg.F2
    accumulation: Accumulation = Accumulation.GENERALIZED

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if not self.n >= 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must be in [0, 1], got {self.kappa}")
        if not self.alpha_e >= 0:
            raise ValueError(f"alpha_e must be non-negative, got {self.alpha_e}")
        if not self.alpha_n > 0:
            raise ValueError(f"alpha_n must be positive, got {self.alpha_n}")

    @classmethod
    def from_material(cls, mat: MaterialParams, model: PfModel, alpha0: float,
                      sigma_e: float = 0.0, **kwargs) -> "FatigueParams":
        """Build with alpha_n = sigma_c eps_c / 2 and alpha_e = sigma_e^2 / (2E)."""
        from .material import critical_point

        sigma_c, eps_c = critical_point(model, mat)
        kwargs.setdefault("alpha_n", 0.5 * sigma_c * eps_c)
        kwargs.setdefault("alpha_e", sigma_e**2 / (2.0 * mat.E))
        return cls(alpha0=alpha0, **kwargs)

    def with_(self, **changes) -> "FatigueParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class FatigueState:
    alpha_bar: float = 0.0
    peak_tracker: float = 0.0


@dataclass(frozen=True)
class CycleObservation:
    """Peak/valley fatigue driving values of one cycle and its stress ratio."""

    alpha_max: float
    alpha_min: float
    R: float

    def __post_init__(self):
        if self.alpha_max < 0 or self.alpha_min < 0:
            raise ValueError("alpha values must be non-negative")
        if not math.isfinite(self.R):
            raise ValueError("stress ratio must be finite")


def fatigue_degradation(fdeg: FDeg, alpha_bar, alpha0: float):
    """Toughness factor f(abar) in [0, 1]."""
    a = np.asarray(alpha_bar, dtype=float)
    if np.any(a < 0):
        raise ValueError("alpha_bar must be non-negative")
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    if fdeg is FDeg.F0:
        out = np.where(a <= alpha0, 1.0, (1.0 - (a - alpha0) / (a + alpha0)) ** 2)
    elif fdeg is FDeg.F1:
        out = (1.0 - a / (a + alpha0)) ** 2
    else:
        out = np.where(a <= alpha0, (1.0 - a / alpha0) ** 2, 0.0)
    return float(out) if out.ndim == 0 else out


def fatigue_driving(psi_plus, phi):
    """alpha = g(phi) psi+."""
    if np.any(np.asarray(psi_plus) < 0):
        raise ValueError("psi_plus must be non-negative")
    return degrade(phi) * psi_plus


def walker_factor(R, kappa: float):
    """((1 - R) / 2) ** kappa; only defined for a positive peak stress (R <= 1)."""
    base = 0.5 * (1.0 - np.asarray(R, dtype=float))
    if np.any(base < 0):
        raise ValueError(f"stress ratio R={R} > 1 has no Walker factor")
    out = base**kappa
    return float(out) if np.ndim(out) == 0 else out


def accumulate_generalized(state: FatigueState, obs: CycleObservation,
                           p: FatigueParams, sigma_max_positive: bool = True) -> FatigueState:
    """
    One-per-cycle accumulation with Walker factor and latching endurance gate.

    Cycles with a non-positive peak stress contribute nothing.
    """
    if not sigma_max_positive or obs.alpha_max <= 0 or obs.R > 1:
        return state
    w2 = walker_factor(obs.R, 2.0 * p.kappa)
    tracker = max(state.peak_tracker, obs.alpha_max * w2)
    if tracker - p.alpha_e > 0:
        d = (obs.alpha_max / p.alpha_n) ** p.n * w2**p.n
    else:
        d = 0.0
    return FatigueState(state.alpha_bar + d, tracker)


def accumulate_legacy_per_increment(alpha_seq) -> float:
    """Sum of the positive increments of alpha sampled along a cycle."""
    a = np.asarray(alpha_seq, dtype=float)
    if a.size < 2:
        raise ValueError("need at least two samples")
    d = np.diff(a)
    return float(d[d > 0].sum())


def accumulate_legacy_reformulated(obs: CycleObservation, n: float, alpha_n: float) -> float:
    """(alpha_max^n - sgn(R) alpha_min^n) / alpha_n^n."""
    return (obs.alpha_max**n - np.sign(obs.R) * obs.alpha_min**n) / alpha_n**n


def accumulate_legacy_representative(alpha_max: float, R: float, n: float, alpha_n: float) -> float:
    """(alpha_max / alpha_n)^n (1 - sgn(R) |R|^(2n)) from the peak alone."""
    return (alpha_max / alpha_n) ** n * (1.0 - np.sign(R) * abs(R) ** (2 * n))


def estimate_alpha0(N_ref: float, stress_ratio_sc: float, n: float) -> float:
    """
    Estimate abar_0 from one S-N point (AT1, F2, undamaged energy).

    Most accurate at low stress ratios, where the S-N curve is still linear.
    """
    s = stress_ratio_sc
    if not 0 < s < 1:
        raise ValueError(f"sigma/sigma_c must lie in (0, 1), got {s}")
    if not N_ref > 0:
        raise ValueError("N_ref must be positive")
    return N_ref * s ** (2 * n) / (1.0 - s)


def slope_to_exponent(m: float, model: PfModel, fdeg: FDeg) -> float:
    """Power exponent n for an S-N slope m = -1/m* (tabulated linear fit)."""
    if not m > 0:
        raise ValueError("m must be positive")
    try:
        c1, c2 = SLOPE_COEFFICIENTS[(model, fdeg)]
    except KeyError:
        raise KeyError(f"no slope coefficients for {model}, {fdeg}") from None
    return c1 * m + c2
