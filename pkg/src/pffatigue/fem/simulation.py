"""
Cycle-by-cycle FEM fatigue
==========================

Each cycle solves the peak state under the representative load with the
fatigue toughness factor frozen, derives the valley state by proportional
scaling (the phase field is frozen within a cycle, so the response is
linear in the load), and accumulates the fatigue history at every
integration point once.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..fatigue import Accumulation, FatigueParams, fatigue_degradation
from ..homogeneous import PHI_FAIL, PHI_INIT, Control, CycleLoad, LifeResult
from ..material import MaterialParams, PfModel, SplitKind
from .assembly import AxisymmetricProblem
from .mesh import Mesh, element_adjacency, severed
from .solver import SolverOptions, bfgs_solve
from .vtk import write_vtk

log = logging.getLogger(__name__)


@dataclass
class FieldState:
    """Nodal fields plus integration-point history, (m, 4) arrays."""

    u: np.ndarray
    phi: np.ndarray
    H: np.ndarray
    alpha_bar: np.ndarray
    tracker: np.ndarray

    @classmethod
    def initial(cls, problem: AxisymmetricProblem) -> "FieldState":
        m = problem.mesh.n_elements
        return cls(np.zeros(problem.n_u), np.zeros(problem.n_phi),
                   np.zeros((m, 4)), np.zeros((m, 4)), np.zeros((m, 4)))

    def copy(self) -> "FieldState":
        return FieldState(self.u.copy(), self.phi.copy(), self.H.copy(),
                          self.alpha_bar.copy(), self.tracker.copy())


@dataclass
class FemResult:
    life: LifeResult
    state: FieldState
    history: dict = field(default_factory=dict, repr=False)
    snapshots: list = field(default_factory=list)
    solves: int = 0
    skipped_cycles: int = 0


def constraints(problem: AxisymmetricProblem, top_displacement: float | None = None):
    """Fixed dofs and values: axis u_r = 0, symmetry plane u_z = 0, optional top u_z."""
    sets = problem.mesh.node_sets
    dofs = [2 * sets.get("axis", np.empty(0, np.int64)), 2 * sets["symmetry"] + 1]
    vals = [np.zeros(len(dofs[0])), np.zeros(len(dofs[1]))]
    if top_displacement is not None:
        top = sets["top"]
        dofs.append(2 * top + 1)
        vals.append(np.full(len(top), top_displacement))
    dofs = np.concatenate(dofs)
    vals = np.concatenate(vals)
    order = np.argsort(dofs, kind="stable")
    dofs, vals = dofs[order], vals[order]
    keep = np.ones(len(dofs), bool)
    keep[1:] = dofs[1:] != dofs[:-1]
    return dofs[keep], vals[keep]


def _increments(fp: FatigueParams, R: float, amax, amin, psi_pos, psi_neg, g, sig1, tracker,
                substeps: int):
    """Vectorized per-point cycle increment; returns (d_alpha_bar, new_tracker)."""
    n, an = fp.n, fp.alpha_n
    mode = fp.accumulation
    if mode is Accumulation.GENERALIZED:
        w2 = (0.5 * (1.0 - R)) ** (2.0 * fp.kappa)
        active = (amax > 0.0) & (sig1 > 0.0)
        tr = np.where(active, np.maximum(tracker, amax * w2), tracker)
        d = np.where(active & (tr - fp.alpha_e > 0.0), (amax / an) ** n * w2**n, 0.0)
        return d, tr
    s = 0.0 if R == 0.0 else math.copysign(1.0, R)
    if mode is Accumulation.LEGACY_REFORMULATED:
        return (amax**n - s * amin**n) / an**n, tracker
    if mode is Accumulation.LEGACY_REPRESENTATIVE:
        return (amax / an) ** n * (1.0 - s * abs(R) ** (2.0 * n)), tracker
    # per-increment along mean -> max -> mean -> min -> mean with phi frozen
    mean, amp = 0.5 * (1.0 + R), 0.5 * (1.0 - R)

    def alpha_at(lam):
        return g * lam * lam * (psi_pos if lam >= 0.0 else psi_neg)

    prev = alpha_at(mean)
    d = np.zeros_like(amax)
    for j in range(1, substeps + 1):
        t = j / substeps
        tri = 4.0 * t if t <= 0.25 else (2.0 - 4.0 * t if t <= 0.75 else 4.0 * t - 4.0)
        cur = alpha_at(mean + amp * tri)
        d += np.maximum(cur - prev, 0.0)
        prev = cur
    return d / an, tracker


def run_fatigue_fem(mesh: Mesh, load: CycleLoad, mat: MaterialParams, model: PfModel,
                    split: SplitKind, fp: FatigueParams, options: SolverOptions = SolverOptions(),
                    *, phi_fail: float = PHI_FAIL, phi_init: float = PHI_INIT,
                    snapshot_dir: str | os.PathLike | None = None, snapshot_every: int = 0,
                    elastic_skip: bool = True, dense_until: int = 10_000,
                    per_decade: int = 200, problem: AxisymmetricProblem | None = None) -> FemResult:
    """
    Simulate constant-amplitude cycling of an axisymmetric specimen.

    Load control applies ``load.peak * mesh.traction_scale`` as axial traction
    on the ``top`` edges; displacement control prescribes ``load.peak * L``
    there, with L the modelled length.

    Failure is a non-converged peak solve, a severed net section (meshes with
    ``notch`` and ``axis`` sets) or, for other meshes, a nodal phase field
    reaching ``phi_fail``. With ``elastic_skip`` (AT1 only) cycles in which
    every point stays below the elastic threshold are advanced in one jump;
    they would reproduce the same elastic solution and the same increment.
    """
    problem = problem or AxisymmetricProblem(mesh, mat, model, split)
    st = FieldState.initial(problem)
    R = load.R
    if load.control is Control.LOAD:
        fixed, vals = constraints(problem)
        f_ext = problem.traction_vector("top", load.peak * mesh.traction_scale)
    else:
        fixed, vals = constraints(problem, load.peak * mesh.length)
        f_ext = np.zeros(problem.n_u)
    notched = "notch" in mesh.node_sets and "axis" in mesh.node_sets
    adjacency = element_adjacency(mesh) if notched else None
    hist = {k: [] for k in ("N", "phi_max", "alpha_bar_max", "H_max", "iterations")}
    snaps: list[str] = []
    if snapshot_dir is not None:
        os.makedirs(snapshot_dir, exist_ok=True)

    def snapshot(N):
        if snapshot_dir is None:
            return
        path = os.path.join(os.fspath(snapshot_dir), f"cycle_{N:09d}.vtk")
        write_vtk(path, mesh, {"u": st.u.reshape(-1, 2), "phi": st.phi},
                  {"alpha_bar": st.alpha_bar.mean(axis=1), "H": st.H.mean(axis=1)},
                  title=f"cycle {N}")
        snaps.append(path)

    next_log = float(max(dense_until, 1))
    step = 10.0 ** (1.0 / per_decade)

    def record(N, iters):
        nonlocal next_log
        if N <= dense_until or N >= next_log:
            hist["N"].append(N)
            hist["phi_max"].append(float(st.phi.max()))
            hist["alpha_bar_max"].append(float(st.alpha_bar.max()))
            hist["H_max"].append(float(st.H.max()))
            hist["iterations"].append(iters)
            while next_log <= N:
                next_log *= step

    N = 0
    N_i = None
    failed = False
    solves = skipped = 0
    d_last = None
    elastic_state = False
    while N < load.max_cycles:
        f_gp = fatigue_degradation(fp.fdeg, st.alpha_bar, fp.alpha0)
        f_gp = np.atleast_1d(f_gp).reshape(st.alpha_bar.shape)

        if (elastic_skip and model is PfModel.AT1 and elastic_state and d_last is not None):
            k = _elastic_cycles(st, d_last, fp, mat, load.max_cycles - N)
            if k > 0:
                st.alpha_bar = st.alpha_bar + k * d_last
                N += k
                skipped += k
                log.debug("skipped %d elastic cycles to N = %d", k, N)
                record(N, 0)
                continue

        N += 1
        res = bfgs_solve(problem, st.u, st.phi, st.H, f_gp, fixed, vals, f_ext, options)
        solves += 1
        if not res.converged:
            failed = True
            log.info("peak solve failed at cycle %d", N)
            record(N, res.iterations)
            break
        ev = res.ev
        st.u, st.phi = res.u, res.phi
        g = (1.0 - ev.phi) ** 2
        eps_p = ev.eps
        psi_pos = ev.psi_plus
        psi_neg = problem.active_energy(-eps_p)
        psi_valley = psi_neg * R * R if R < 0 else psi_pos * R * R
        amax = g * psi_pos
        amin = g * psi_valley
        sig1 = problem.max_principal_stress(eps_p)
        d, st.tracker = _increments(fp, R, amax, amin, psi_pos, psi_neg, g, sig1, st.tracker,
                                    load.substeps_per_cycle)
        d = np.maximum(d, 0.0)
        st.H = np.maximum(ev.H_raw, psi_valley)
        st.alpha_bar = st.alpha_bar + d
        d_last = d
        elastic_state = bool(st.phi.max() == 0.0)
        if N_i is None and st.phi.max() > phi_init:
            N_i = N
        record(N, res.iterations)
        log.debug("cycle %d: %d iterations, max phi %.4g, max abar %.4g", N, res.iterations,
                  st.phi.max(), st.alpha_bar.max())
        if snapshot_every and N % snapshot_every == 0:
            snapshot(N)
        if notched:
            if severed(mesh, st.phi, phi_fail, adjacency=adjacency):
                failed = True
                break
        elif st.phi.max() >= phi_fail:
            failed = True
            break
    snapshot(N)
    if failed and N_i is None:
        N_i = N
    life = LifeResult(
        N_i=N_i, N_f=N if failed else None, runout=not failed,
        cycles=N if failed else load.max_cycles,
        alpha_bar=float(st.alpha_bar.max()), phi=float(st.phi.max()), H=float(st.H.max()),
        peak_tracker=float(st.tracker.max()),
        trace={k: np.asarray(v) for k, v in hist.items()},
    )
    return FemResult(life, st, life.trace, snaps, solves, skipped)


def _elastic_cycles(st: FieldState, d: np.ndarray, fp: FatigueParams, mat: MaterialParams,
                    limit: int) -> int:
    """
    Number of upcoming cycles that stay strictly below the AT1 threshold at
    every point, so that their solution equals the current elastic one.
    """
    h = mat.h_min(1.0)

    def ok(j):
        f = fatigue_degradation(fp.fdeg, st.alpha_bar + j * d, fp.alpha0)
        return bool(np.all(st.H < h * np.asarray(f)))

    if limit <= 0 or not ok(0):
        return 0
    if ok(limit - 1):
        return limit
    lo, hi = 0, 1
    while ok(hi):
        lo, hi = hi, 2 * hi
    hi = min(hi, limit - 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo + 1
