"""
Verification suites
===================

Each check returns a :class:`Check` with a one-line report. The suites are
grouped the way the ``verify`` subcommand exposes them; the notched-bar
trend check is expensive and only runs on request.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fatigue import (Accumulation, CycleObservation, FatigueParams, FatigueState, FDeg,
                      SLOPE_COEFFICIENTS, accumulate_generalized,
                      accumulate_legacy_per_increment, estimate_alpha0)
from .homogeneous import Control, CycleLoad, monotonic_response, run_cycles
from .material import (MaterialParams, PfModel, SplitKind, critical_point,
                       critical_strength_closed_form, maximize_homogeneous_stress, split_energy,
                       strain_energy, uniaxial_split_coefficients)
from .study import material_presets, regenerate_table1

#: reference strength of the AISI 4340 calibration [MPa]
AISI4340_SIGMA_C = 1793.0


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.criterion:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(criterion: int, name: str):
    def wrap(fn: Callable[..., tuple[bool, str, dict]]):
        def run(*args, **kwargs) -> Check:
            t = time.perf_counter()
            ok, detail, data = fn(*args, **kwargs)
            return Check(criterion, name, bool(ok), detail, time.perf_counter() - t, data)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def _model_material(model: PfModel) -> MaterialParams:
    return material_presets()["ModelMaterial"].material(model)


# ------------------------------------------------------------------ 1
@_timed(1, "critical strength")
def check_critical_strength():
    at1 = critical_strength_closed_form(PfModel.AT1, _model_material(PfModel.AT1))[0]
    at2 = maximize_homogeneous_stress(PfModel.AT2, _model_material(PfModel.AT2))[0]
    aisi = material_presets()["AISI4340"].material(PfModel.AT1)
    s_aisi = critical_point(PfModel.AT1, aisi)[0]
    e1 = abs(at1 - 1.0)
    e2 = abs(at2 - 1.0)
    e3 = abs(s_aisi / AISI4340_SIGMA_C - 1.0)
    ok = [e1 <= 1e-10, e2 <= 5e-3, e3 <= 1e-2]
    detail = (f"AT1 {at1:.12f} ({'ok' if ok[0] else 'off'}), AT2 {at2:.5f} "
              f"({'ok' if ok[1] else 'off'}), AISI4340 {s_aisi:.1f} MPa vs "
              f"{AISI4340_SIGMA_C:.0f} ({100 * e3:.1f}%, {'ok' if ok[2] else 'off'})")
    return all(ok), detail, {"AT1": at1, "AT2": at2, "AISI4340": s_aisi}


# ------------------------------------------------------------------ 2
@_timed(2, "slope coefficients")
def check_table1(threads: int = 1, tol_c1: float = 0.05, tol_c2: float = 0.15):
    parts, ok, data = [], True, {}
    for model in PfModel:
        for fdeg in FDeg:
            reg = regenerate_table1(model, fdeg, threads=threads)
            c1, c2 = SLOPE_COEFFICIENTS[(model, fdeg)]
            good = abs(reg.C1 - c1) <= tol_c1 and abs(reg.C2 - c2) <= tol_c2
            ok &= good
            data[(model.value, fdeg.value)] = (reg.C1, reg.C2)
            parts.append(f"{model.value}/{fdeg.value} ({reg.C1:.3f}, {reg.C2:.3f})"
                         f"{'' if good else ' off'}")
    return ok, "; ".join(parts), data


# ------------------------------------------------------------------ 3
def _legacy_cycle_increment(eps_peak, phi, R, mat, split, substeps):
    """Per-increment accumulation along mean -> max -> mean -> min -> mean, phi frozen."""
    cpt, _, cpc, _ = uniaxial_split_coefficients(mat, split)
    g = (1.0 - phi) ** 2
    mean, amp = 0.5 * (1.0 + R), 0.5 * (1.0 - R)
    t = np.linspace(0.0, 1.0, substeps + 1)
    tri = np.where(t <= 0.25, 4 * t, np.where(t <= 0.75, 2 - 4 * t, 4 * t - 4))
    lam = mean + amp * tri
    eps = lam * eps_peak
    alpha = g * np.where(eps >= 0, cpt, cpc) * eps**2
    return accumulate_legacy_per_increment(alpha)


@_timed(3, "one-per-cycle equivalence")
def check_appendix_a(substeps: int = 8):
    split = SplitKind.NO_TENSION
    fp = FatigueParams(alpha0=100.0, n=1.0, alpha_n=1.0, alpha_e=0.0, fdeg=FDeg.F2)
    worst, dN, parts = 0.0, [], []
    for model in PfModel:
        mat = _model_material(model)
        sc, _ = critical_point(model, mat)
        load = CycleLoad(Control.LOAD, 0.5 * sc)
        rep = run_cycles(load, mat, model, split, fp)
        cpt, _, _, _ = uniaxial_split_coefficients(mat, split)
        st = FatigueState()
        for eps, phi in zip(rep.trace["strain"], rep.trace["phi"]):
            amax = (1.0 - phi) ** 2 * cpt * eps**2
            new = accumulate_generalized(st, CycleObservation(amax, 0.0, -1.0), fp)
            d_gen = new.alpha_bar - st.alpha_bar
            d_leg = _legacy_cycle_increment(eps, phi, -1.0, mat, split, substeps)
            worst = max(worst, abs(d_gen - d_leg) / max(abs(d_leg), 1e-300))
            st = new
        sub = run_cycles(CycleLoad(Control.LOAD, 0.5 * sc, substeps_per_cycle=substeps), mat,
                         model, split, fp.with_(accumulation=Accumulation.LEGACY_PER_INCREMENT),
                         record=False)
        dN.append(abs(rep.N_f - sub.N_f))
        parts.append(f"{model.value} N_f {rep.N_f} vs {sub.N_f}")
    ok = worst <= 1e-10 and max(dN) <= 1
    return ok, f"max per-cycle rel. diff {worst:.1e}; " + ", ".join(parts), {"worst": worst}


# ------------------------------------------------------------------ 4
@_timed(4, "alpha0 estimate round trip")
def check_appendix_b(ratio: float = 0.4, tol: float = 0.10):
    model = PfModel.AT1
    pre = material_presets()["ModelMaterial"]
    mat = pre.material(model)
    fp = pre.fatigue(model, fdeg=FDeg.F2)
    sc, _ = critical_point(model, mat)
    load = CycleLoad(Control.LOAD, ratio * sc)
    src = run_cycles(load, mat, model, SplitKind.NO_TENSION, fp, record=False)
    a0 = estimate_alpha0(src.N_f, ratio, fp.n)
    back = run_cycles(load, mat, model, SplitKind.NO_TENSION, fp.with_(alpha0=a0), record=False)
    err = abs(back.N_f / src.N_f - 1.0)
    return err <= tol, (f"source N_f {src.N_f}, estimated alpha0 {a0:.4g}, "
                        f"re-simulated N_f {back.N_f} ({100 * err:.1f}%)"), {"err": err}


# ------------------------------------------------------------------ 5
@_timed(5, "endurance and residual strength")
def check_endurance(low: float = 0.15, high: float = 0.5, max_cycles: int = 10**7):
    pre = material_presets()["ModelMaterial"]
    split = SplitKind.NO_TENSION
    ok, parts, drops, lives = True, [], {}, {}
    for model in PfModel:
        mat, fp = pre.material(model), pre.fatigue(model, fdeg=FDeg.F2)
        sc, _ = critical_point(model, mat)
        ro = run_cycles(CycleLoad(Control.LOAD, low * sc, max_cycles=max_cycles), mat, model,
                        split, fp, record=False)
        peak = monotonic_response(mat, model, split, fp, ro.alpha_bar).peak_stress
        good = ro.runout and abs(peak / sc - 1.0) <= 1e-6
        ok &= good
        parts.append(f"{model.value} {'runout' if ro.runout else f'N_f {ro.N_f}'} "
                     f"then sigma_peak/sigma_c {peak / sc:.7f}")
        lives[model] = run_cycles(CycleLoad(Control.LOAD, high * sc), mat, model, split, fp,
                                  record=False).N_f
    if None in lives.values():
        return False, "; ".join(parts) + "; high amplitude ran out", {}
    # residual strength of both models after the same number of cycles
    k = max(1, min(lives.values()) // 2)
    for model in PfModel:
        mat, fp = pre.material(model), pre.fatigue(model, fdeg=FDeg.F2)
        sc, _ = critical_point(model, mat)
        part = run_cycles(CycleLoad(Control.LOAD, high * sc, max_cycles=k), mat, model, split, fp,
                          record=False)
        peak = monotonic_response(mat, model, split, fp, part.alpha_bar).peak_stress
        drops[model] = 1.0 - peak / sc
    ok &= drops[PfModel.AT1] > drops[PfModel.AT2] > 0.0
    parts.append(f"after {k} cycles at {high} sigma_c strength drop AT1 "
                 f"{drops[PfModel.AT1]:.3f} vs AT2 {drops[PfModel.AT2]:.3f}")
    return ok, "; ".join(parts), {"drops": drops, "lives": lives}


# ------------------------------------------------------------------ 6
@_timed(6, "load ratio trends")
def check_load_ratio(ratios=(-1.0, -0.5, 0.0, 0.25, 0.5), amplitude: float = 0.25,
                     peak: float = 0.6):
    pre = material_presets()["ModelMaterial"]
    ok, parts = True, []
    for model in PfModel:
        mat, fp = pre.material(model), pre.fatigue(model, fdeg=FDeg.F2)
        sc, _ = critical_point(model, mat)
        fixed_a = [run_cycles(CycleLoad(Control.LOAD, amplitude * sc, R), mat, model,
                              SplitKind.NO_TENSION, fp, record=False).cycles for R in ratios]
        fixed_m = [run_cycles(CycleLoad.from_peak(Control.LOAD, peak * sc, R), mat, model,
                              SplitKind.NO_TENSION, fp, record=False).cycles for R in ratios]
        a_ok = all(x >= y for x, y in zip(fixed_a, fixed_a[1:]))
        m_ok = all(x <= y for x, y in zip(fixed_m, fixed_m[1:]))
        ok &= a_ok and m_ok
        parts.append(f"{model.value} fixed amplitude {fixed_a}, fixed peak {fixed_m}")
    return ok, f"R {list(ratios)}: " + "; ".join(parts), {}


# ------------------------------------------------------------------ 7
@_timed(7, "single-element oracle")
def check_fem_oracle(cycles: int = 1000, tol: float = 1e-6):
    from .fem import run_fatigue_fem, single_element_mesh

    pre = material_presets()["ModelMaterial"]
    worst, parts = 0.0, []
    for model in PfModel:
        mat = pre.material(model)
        fp = pre.fatigue(model, fdeg=FDeg.F2)
        _, ec = critical_point(model, mat)
        # displacement control at an amplitude that degrades within the window
        load = CycleLoad(Control.DISPLACEMENT, 0.45 * ec, -1.0, max_cycles=cycles)
        fp = fp.with_(alpha0=_oracle_alpha0(load, mat, model, fp, cycles))
        ref = run_cycles(load, mat, model, SplitKind.SPECTRAL, fp, dense_until=cycles)
        res = run_fatigue_fem(single_element_mesh(), load, mat, model, SplitKind.SPECTRAL, fp,
                              elastic_skip=False, dense_until=cycles)
        n = min(len(ref.trace["N"]), len(res.history["N"]))
        e_phi = _rel(res.history["phi_max"][:n], ref.trace["phi"][:n])
        e_ab = _rel(res.history["alpha_bar_max"][:n], ref.trace["alpha_bar"][:n])
        worst = max(worst, e_phi, e_ab)
        parts.append(f"{model.value} {n} cycles, max phi {ref.trace['phi'][n - 1]:.3f}, "
                     f"rel. error phi {e_phi:.1e} abar {e_ab:.1e}")
    return worst <= tol, "; ".join(parts), {"worst": worst}


def _oracle_alpha0(load, mat, model, fp, cycles):
    """alpha0 putting the oracle run's failure just past ``cycles``."""
    probe = run_cycles(load, mat, model, SplitKind.SPECTRAL, fp.with_(alpha0=1.0), record=False)
    life = probe.N_f or load.max_cycles
    return 1.5 * cycles / life


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(b), 1e-12)
    return float(np.max(np.abs(a - b) / scale)) if len(a) else math.inf


# ------------------------------------------------------------------ 8
NOTCH_RADII = {2: 1.016, 3: 0.368, 5: 0.107}


@_timed(8, "notched trends")
def check_notched(peaks=(600.0, 700.0, 800.0), ref_ratio: float = 5.0,
                  max_cycles: int = 10**6):
    from .fem import NotchGeometry, generate_notched_mesh, run_fatigue_fem

    pre = material_presets()["M300"]
    model, split = PfModel.AT1, SplitKind.NO_TENSION
    ok, parts, data = True, [], {}

    def life(rho, peak, ell):
        mat = MaterialParams(E=pre.E, nu=pre.nu, Gc=pre.Gc, ell=ell)
        fp = FatigueParams.from_material(mat, model, pre.alpha0, pre.sigma_e, n=pre.n,
                                         kappa=pre.kappa, fdeg=FDeg.F2)
        mesh = generate_notched_mesh(NotchGeometry(rho=rho), ell, ref_ratio)
        r = run_fatigue_fem(mesh, CycleLoad.from_peak(Control.LOAD, peak, -1.0,
                                                      max_cycles=max_cycles),
                            mat, model, split, fp).life
        return r.N_i, (r.N_f if r.N_f is not None else max_cycles)

    ell = pre.ell[model]
    for peak in peaks:
        res = {kt: life(rho, peak, ell) for kt, rho in NOTCH_RADII.items()}
        nf = [res[kt][1] for kt in (2, 3, 5)]
        gap = [res[kt][1] - (res[kt][0] or res[kt][1]) for kt in (2, 3, 5)]
        order = nf[0] > nf[1] > nf[2]
        grows = gap[0] < gap[1] < gap[2]
        ok &= order and grows
        data[peak] = res
        parts.append(f"{peak:g} MPa N_f {nf} gap {gap}")
    # length scale effect at the intermediate notch and lowest load
    base = data[peaks[0]][3][1]
    doubled = life(NOTCH_RADII[3], peaks[0], 2.0 * ell)[1]
    ok &= doubled < base
    parts.append(f"2 ell at Kt 3: N_f {doubled} vs {base}")
    return ok, "; ".join(parts), data


# ------------------------------------------------------------------ 9
@_timed(9, "tangent verification")
def check_tangents(seed: int = 0, tol: float = 1e-6, samples: int = 3):
    from .fem import AxisymmetricProblem, rectangle_mesh

    rng = np.random.default_rng(seed)
    mesh = rectangle_mesh(0.0, 1.0, 1.0, 3, 3)
    mesh.nodes[:, :] += 0.05 * rng.uniform(-1, 1, mesh.nodes.shape) * (mesh.nodes[:, :1] > 0)
    worst, asym = 0.0, 0.0
    for model in PfModel:
        for split in SplitKind:
            mat = MaterialParams(E=1.0, nu=0.3, Gc=1.0, ell=0.2)
            pb = AxisymmetricProblem(mesh, mat, model, split)
            m = mesh.n_elements
            for _ in range(samples):
                u = 0.05 * rng.normal(size=pb.n_u)
                phi = rng.uniform(0.0, 0.6, pb.n_phi)
                f_gp = rng.uniform(0.3, 1.0, (m, 4))
                H = rng.uniform(0.0, 0.1, (m, 4))
                ev = pb.evaluate(u, phi, H, f_gp)
                Ku, Kp = pb.tangent(ev, f_gp)
                worst = max(worst, _fd_error(pb, u, phi, H, f_gp, Ku, Kp, rng))
                asym = max(asym, _asym(Ku), _asym(Kp))
    ok = worst <= tol and asym <= 1e-14
    return ok, f"max FD rel. error {worst:.1e}, max asymmetry {asym:.1e}", {}


def _asym(K) -> float:
    K = K.toarray()
    return float(np.abs(K - K.T).max() / max(np.abs(K).max(), 1e-300))


def _fd_error(pb, u, phi, H, f_gp, Ku, Kp, rng, h=1e-6) -> float:
    du = rng.normal(size=pb.n_u)
    dp = rng.normal(size=pb.n_phi)

    def r_u(x):
        return pb.residual(pb.evaluate(x, phi, H, f_gp), f_gp)[0]

    def r_p(x):
        return pb.residual(pb.evaluate(u, x, H, f_gp), f_gp)[1]

    fd_u = (r_u(u + h * du) - r_u(u - h * du)) / (2 * h)
    fd_p = (r_p(phi + h * dp) - r_p(phi - h * dp)) / (2 * h)
    e_u = np.linalg.norm(Ku @ du - fd_u) / np.linalg.norm(fd_u)
    e_p = np.linalg.norm(Kp @ dp - fd_p) / np.linalg.norm(fd_p)
    return float(max(e_u, e_p))


# ------------------------------------------------------------------ 10
@_timed(10, "split consistency")
def check_splits(seed: int = 0, samples: int = 1000, tol: float = 1e-10):
    rng = np.random.default_rng(seed)
    mat = MaterialParams(E=210e3, nu=0.3, Gc=1.0, ell=1.0)
    A = rng.normal(size=(samples, 3, 3))
    eps = 0.5 * (A + A.transpose(0, 2, 1))
    psi0 = strain_energy(eps, mat)
    worst = 0.0
    for kind in (SplitKind.SPECTRAL, SplitKind.VOL_DEV):
        p, q = split_energy(eps, mat, kind)
        worst = max(worst, float(np.max(np.abs(p + q - psi0) / np.abs(psi0))))
    Q = np.linalg.qr(rng.normal(size=(samples, 3, 3)))[0]
    lam = rng.uniform(0.0, 1.0, (samples, 3))
    pos = np.einsum("nij,nj,nkj->nik", Q, lam, Q)
    p_neg, _ = split_energy(-pos, mat, SplitKind.NO_TENSION)
    _, m_pos = split_energy(pos, mat, SplitKind.NO_TENSION)
    nt = max(float(np.abs(p_neg).max()), float(np.abs(m_pos).max()))
    ok = worst <= tol and nt == 0.0
    return ok, (f"{samples} tensors: max partition error {worst:.1e}, NoTension "
                f"max leak {nt:.1e}"), {}


SUITES: dict[str, tuple[Callable[..., Check], ...]] = {
    "invariants": (check_critical_strength, check_appendix_a, check_appendix_b,
                   check_endurance, check_load_ratio, check_tangents, check_splits),
    "table1": (check_table1,),
    "oracle": (check_fem_oracle,),
}

ALL_CHECKS = (check_critical_strength, check_table1, check_appendix_a, check_appendix_b,
              check_endurance, check_load_ratio, check_fem_oracle, check_notched,
              check_tangents, check_splits)


def run_suite(name: str, threads: int = 1, seed: int = 0,
              report: Callable[[str], None] | None = print) -> list[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    out = []
    for chk in SUITES[name]:
        kwargs = {}
        if chk is check_table1:
            kwargs["threads"] = threads
        if chk in (check_tangents, check_splits):
            kwargs["seed"] = seed
        res = chk(**kwargs)
        if report is not None:
            report(res.line())
        out.append(res)
    return out
