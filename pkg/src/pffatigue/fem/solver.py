"""
Monolithic quasi-Newton solver
==============================

Solves the coupled displacement/phase field equations with BFGS. The
initial inverse operator is the factorized block-diagonal tangent at the
start of the step (sparse LU with a symmetric fill-reducing ordering); curvature
pairs from successive iterates update it with the two-loop recursion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import identity
from scipy.sparse.linalg import splu

from .assembly import AxisymmetricProblem, Evaluation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    """
    Attributes:
        tol_rel: residual tolerance relative to the internal force scale
        tol_abs: absolute residual tolerance
        max_iterations: iterations before the step is declared failed
        refresh_every: iterations between refactorizations of the operator
        max_backtracks: step halvings when a trial residual blows up
    """

    tol_rel: float = 1e-8
    tol_abs: float = 0.0
    max_iterations: int = 200
    refresh_every: int = 50
    max_backtracks: int = 6

    def __post_init__(self):
        if not self.tol_rel >= 0 or not self.tol_abs >= 0 or self.tol_rel + self.tol_abs <= 0:
            raise ValueError("need non-negative tolerances, not both zero")
        if self.max_iterations < 1 or self.refresh_every < 1:
            raise ValueError("iteration limits must be >= 1")


@dataclass
class StepResult:
    converged: bool
    iterations: int
    factorizations: int
    u: np.ndarray
    phi: np.ndarray
    ev: Evaluation
    residual: float


class _BlockInverse:
    """Factorized block-diagonal tangent restricted to the free dofs."""

    def __init__(self, problem: AxisymmetricProblem, ev: Evaluation, f_gp, free_u):
        Ku, Kp = problem.tangent(ev, f_gp)
        self.nu = len(free_u)
        self.lu_u = _factor(Ku[free_u][:, free_u])
        self.lu_p = _factor(Kp)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return np.concatenate([self.lu_u.solve(v[: self.nu]), self.lu_p.solve(v[self.nu:])])


def _factor(K):
    # symmetric minimum-degree ordering on K + K^T, diagonal pivots preferred
    opts = dict(permc_spec="MMD_AT_PLUS_A", options=dict(SymmetricMode=True))
    K = K.tocsc()
    try:
        return splu(K, **opts)
    except RuntimeError:
        # exactly singular rows (vanished toughness, no driving force): tiny shift
        d = abs(K.diagonal()).max() or 1.0
        K = K + 1e-12 * d * identity(K.shape[0], format="csc")
        return splu(K.tocsc(), **opts)


def bfgs_solve(problem: AxisymmetricProblem, u0: np.ndarray, phi0: np.ndarray,
               H_prev: np.ndarray, f_gp: np.ndarray, fixed: np.ndarray, values: np.ndarray,
               f_ext: np.ndarray, options: SolverOptions = SolverOptions()) -> StepResult:
    """
    Solve one load step from the converged state (u0, phi0).

    ``fixed``/``values`` prescribe displacement dofs; ``f_ext`` is the
    external force vector on the displacement dofs. After convergence the
    nodal phase field is clamped to [phi0, 1].
    """
    u = np.array(u0, dtype=float)
    u[fixed] = values
    phi = np.array(phi0, dtype=float)
    free = np.setdiff1d(np.arange(problem.n_u), fixed)
    nf = len(free)

    # diverging trial states are rejected below, so overflow there is expected
    @np.errstate(over="ignore", invalid="ignore")
    def evaluate(u, phi):
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(phi))):
            return None, None, False, np.inf
        ev = problem.evaluate(u, phi, H_prev, f_gp)
        ru, rp, su, sp_ = problem.residual(ev, f_gp)
        ru = ru - f_ext
        ref_u = max(float(su.max(initial=0.0)), float(np.abs(f_ext).max(initial=0.0)))
        ref_p = float(sp_.max(initial=0.0))
        r = np.concatenate([ru[free], rp])
        tol_u = options.tol_rel * ref_u + options.tol_abs
        tol_p = options.tol_rel * ref_p + options.tol_abs
        nu_ = float(np.abs(r[:nf]).max(initial=0.0))
        np_ = float(np.abs(r[nf:]).max(initial=0.0))
        ok = np.isfinite(nu_) and np.isfinite(np_) and nu_ <= tol_u and np_ <= tol_p
        # scaled norm for backtracking decisions
        scaled = max(nu_ / max(ref_u, 1e-300), np_ / max(ref_p, 1e-300))
        return r, ev, ok, scaled

    r, ev, ok, scaled = evaluate(u, phi)
    it = 0
    nfact = 0
    if not ok:
        H0 = _BlockInverse(problem, ev, f_gp, free)
        nfact = 1
        pairs: list[tuple[np.ndarray, np.ndarray, float]] = []
        since_refresh = 0
        while it < options.max_iterations:
            it += 1
            since_refresh += 1
            d = -_two_loop(r, pairs, H0)
            step = 1.0
            for _ in range(options.max_backtracks + 1):
                u_t, phi_t = u.copy(), phi + step * d[nf:]
                u_t[free] += step * d[:nf]
                r_t, ev_t, ok_t, scaled_t = evaluate(u_t, phi_t)
                if r_t is not None and np.all(np.isfinite(r_t)) and (scaled_t <= 2.0 * scaled or ok_t):
                    break
                step *= 0.5
            if r_t is None or not np.all(np.isfinite(r_t)):
                break
            s = step * d
            y = r_t - r
            with np.errstate(over="ignore", invalid="ignore"):
                sy = float(s @ y)
                curved = np.isfinite(sy) and sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y)
            if curved:
                pairs.append((s, y, 1.0 / sy))
            u, phi, r, ev, ok, scaled = u_t, phi_t, r_t, ev_t, ok_t, scaled_t
            if ok:
                break
            if since_refresh >= options.refresh_every:
                H0 = _BlockInverse(problem, ev, f_gp, free)
                nfact += 1
                pairs.clear()
                since_refresh = 0
    if not ok:
        log.debug("BFGS did not converge in %d iterations (scaled residual %.3e)", it, scaled)
        return StepResult(False, it, nfact, u, phi, ev, scaled)
    phi_c = np.clip(phi, phi0, 1.0)
    if not np.array_equal(phi_c, phi):
        ev = problem.evaluate(u, phi_c, H_prev, f_gp)
    return StepResult(True, it, nfact, u, phi_c, ev, scaled)


@np.errstate(over="ignore", invalid="ignore")
def _two_loop(r, pairs, H0):
    q = r.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
    z = H0(q)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ z)
        z += s * (a - b)
    return z
