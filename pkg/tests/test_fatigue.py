import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fdeg as fdeg_oracle
from pffatigue.fatigue import (
    SLOPE_COEFFICIENTS,
    CycleObservation,
    FatigueParams,
    FatigueState,
    FDeg,
    accumulate_generalized,
    accumulate_legacy_per_increment,
    accumulate_legacy_reformulated,
    accumulate_legacy_representative,
    estimate_alpha0,
    fatigue_degradation,
    fatigue_driving,
    slope_to_exponent,
    walker_factor,
)
from pffatigue.homogeneous import Control, CycleLoad, run_cycles
from pffatigue.material import MaterialParams, PfModel, SplitKind


class TestFatigueParams:
    @pytest.mark.parametrize("kw", [dict(alpha0=0.0), dict(n=0.5), dict(kappa=1.5),
                                    dict(alpha_e=-1.0), dict(alpha_n=0.0)])
    def test_rejects_invalid(self, kw):
        base = dict(alpha0=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            FatigueParams(**base)

    def test_from_material(self):
        mat = MaterialParams(E=1.0, nu=0.3, Gc=1.0, ell=0.375)
        fp = FatigueParams.from_material(mat, PfModel.AT1, 100.0, 0.2)
        assert fp.alpha_n == pytest.approx(0.5)
        assert fp.alpha_e == pytest.approx(0.02)


class TestDegradation:
    def test_f2_undamaged(self):
        assert fatigue_degradation(FDeg.F2, 0.0, 7.0) == 1.0

    def test_f2_vanishes(self):
        assert fatigue_degradation(FDeg.F2, 7.0, 7.0) == 0.0
        assert fatigue_degradation(FDeg.F2, 9.0, 7.0) == 0.0

    def test_f0_threshold_branch(self):
        assert fatigue_degradation(FDeg.F0, 3.5, 7.0) == 1.0

    @pytest.mark.parametrize("kind", list(FDeg))
    @pytest.mark.parametrize("a", [0.0, 0.3, 1.0, 2.5, 40.0])
    def test_matches_oracle(self, kind, a):
        assert fatigue_degradation(kind, a, 1.0) == pytest.approx(fdeg_oracle(kind.name, a, 1.0))

    @pytest.mark.parametrize("kind", list(FDeg))
    def test_monotone_non_increasing(self, kind):
        a = np.linspace(0.0, 10.0, 501)
        f = fatigue_degradation(kind, a, 2.0)
        assert np.all(np.diff(f) <= 1e-15)
        assert np.all((f >= 0.0) & (f <= 1.0))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            fatigue_degradation(FDeg.F1, -1.0, 1.0)


class TestDriving:
    @pytest.mark.parametrize("phi,alpha", [(0.0, 0.125), (1.0, 0.0), (0.5, 0.03125)])
    def test_values(self, phi, alpha):
        assert fatigue_driving(0.125, phi) == pytest.approx(alpha)


class TestWalker:
    def test_fully_reversed(self):
        assert walker_factor(-1.0, 0.5) == 1.0

    def test_swt(self):
        assert walker_factor(0.0, 0.5) == pytest.approx(math.sqrt(0.5))

    def test_positive_ratio(self):
        assert walker_factor(0.5, 1.0) == pytest.approx(0.25)

    def test_rejects_ratio_above_one(self):
        with pytest.raises(ValueError):
            walker_factor(1.5, 0.5)


class TestGeneralizedAccumulation:
    def test_below_endurance(self):
        fp = FatigueParams(alpha0=1.0, alpha_e=0.2, alpha_n=0.5)
        s = accumulate_generalized(FatigueState(), CycleObservation(0.1, 0.1, -1.0), fp)
        assert s.alpha_bar == 0.0
        assert s.peak_tracker == pytest.approx(0.1)

    def test_fully_reversed_increment(self):
        fp = FatigueParams(alpha0=1.0, n=1.0, kappa=0.5, alpha_e=0.02, alpha_n=0.5)
        s = accumulate_generalized(FatigueState(), CycleObservation(0.125, 0.125, -1.0), fp)
        assert s.alpha_bar == pytest.approx(0.25)

    def test_mean_stress_increment(self):
        fp = FatigueParams(alpha0=1.0, n=2.0, kappa=0.5, alpha_e=0.0, alpha_n=0.5)
        s = accumulate_generalized(FatigueState(), CycleObservation(0.125, 0.0, 0.0), fp)
        assert s.alpha_bar == pytest.approx(0.015625)

    def test_gate_latches(self):
        fp = FatigueParams(alpha0=1.0, alpha_e=0.2, alpha_n=1.0)
        s = accumulate_generalized(FatigueState(0.0, 0.3), CycleObservation(0.1, 0.1, -1.0), fp)
        assert s.alpha_bar == pytest.approx(0.1)
        assert s.peak_tracker == pytest.approx(0.3)

    def test_compressive_peak_contributes_nothing(self):
        fp = FatigueParams(alpha0=1.0)
        state = FatigueState(1.0, 0.0)
        out = accumulate_generalized(state, CycleObservation(0.5, 0.5, -1.0), fp,
                                     sigma_max_positive=False)
        assert out == state

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 10.0), st.floats(0.0, 1.0), st.floats(-3.0, 0.9),
           st.floats(1.0, 6.0), st.floats(0.0, 1.0))
    def test_non_decreasing(self, abar, amax, R, n, kappa):
        fp = FatigueParams(alpha0=1.0, n=n, kappa=kappa, alpha_e=0.1)
        out = accumulate_generalized(FatigueState(abar, 0.0), CycleObservation(amax, 0.0, R), fp)
        assert out.alpha_bar >= abar


class TestLegacyAccumulation:
    def test_unloading_only(self):
        assert accumulate_legacy_per_increment([1.0, 0.7, 0.2, 0.0]) == 0.0

    def test_positive_increments(self):
        assert accumulate_legacy_per_increment([0, 0.5, 1.0, 0.5, 0]) == pytest.approx(1.0)

    def test_spectral_two_peaks(self):
        # fully reversed cycle with the active energy rising on both half cycles
        a2, a6 = 0.3, 0.05
        seq = [0.0, a2 / 2, a2, a2 / 2, 0.0, a6 / 2, a6, a6 / 2, 0.0]
        assert accumulate_legacy_per_increment(seq) == pytest.approx(a2 + a6)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            accumulate_legacy_per_increment([1.0])

    @pytest.mark.parametrize("amax,amin,R,expected", [(0.125, 0.125, -1.0, 0.25),
                                                      (0.125, 0.0, 0.0, 0.125),
                                                      (0.2, 0.05, 0.25, 0.15)])
    def test_reformulated(self, amax, amin, R, expected):
        obs = CycleObservation(amax, amin, R)
        assert accumulate_legacy_reformulated(obs, 1.0, 1.0) == pytest.approx(expected)

    @pytest.mark.parametrize("amax,R,n,expected", [(0.125, -1.0, 1.0, 0.25), (0.125, 0.0, 1.0, 0.125),
                                                   (0.2, 0.5, 2.0, 0.0375)])
    def test_representative(self, amax, R, n, expected):
        assert accumulate_legacy_representative(amax, R, n, 1.0) == pytest.approx(expected)

    def test_reformulated_matches_substepping(self):
        # NoTension, R = 0.25: alpha follows the square of the strain path
        amax, R = 0.2, 0.25
        lam = np.concatenate([np.linspace(R, 1.0, 400), np.linspace(1.0, R, 400)[1:]])
        seq = amax * lam**2
        ref = accumulate_legacy_per_increment(seq)
        obs = CycleObservation(amax, amax * R**2, R)
        assert accumulate_legacy_reformulated(obs, 1.0, 1.0) == pytest.approx(ref, rel=1e-12)


class TestAlpha0Estimate:
    def test_linear_exponent(self):
        assert estimate_alpha0(1e6, 0.5, 1.0) == pytest.approx(5e5)

    def test_quadratic_exponent(self):
        assert estimate_alpha0(1e3, 0.5, 2.0) == pytest.approx(125.0)

    @pytest.mark.parametrize("s", [0.0, 1.0, 1.2])
    def test_rejects_ratio(self, s):
        with pytest.raises(ValueError):
            estimate_alpha0(1e3, s, 1.0)

    def test_roundtrip(self):
        mat = MaterialParams(E=1.0, nu=0.3, Gc=1.0, ell=0.375)
        N_ref = 5000.0
        a0 = estimate_alpha0(N_ref, 0.4, 1.0)
        fp = FatigueParams.from_material(mat, PfModel.AT1, a0, 0.0)
        res = run_cycles(CycleLoad(Control.LOAD, 0.4), mat, PfModel.AT1, SplitKind.NO_TENSION, fp)
        assert res.N_f == pytest.approx(N_ref, rel=0.10)


class TestSlopeToExponent:
    def test_table_rows(self):
        assert SLOPE_COEFFICIENTS[(PfModel.AT1, FDeg.F2)] == (0.50, -0.13)
        assert SLOPE_COEFFICIENTS[(PfModel.AT2, FDeg.F1)] == (0.49, -0.61)

    def test_substitution(self):
        assert slope_to_exponent(10.0, PfModel.AT1, FDeg.F2) == pytest.approx(4.87)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            slope_to_exponent(0.0, PfModel.AT1, FDeg.F2)
