"""Linear elastic post-processing: stress recovery and notch stress concentration."""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import spsolve

from ..material import MaterialParams, PfModel, SplitKind
from .assembly import AxisymmetricProblem
from .mesh import Mesh
from .simulation import constraints


def elastic_solution(mesh: Mesh, mat: MaterialParams, nominal_stress: float = 1.0,
                     problem: AxisymmetricProblem | None = None) -> tuple[AxisymmetricProblem, np.ndarray]:
    """Undamaged displacement field under a nominal net-section stress."""
    problem = problem or AxisymmetricProblem(mesh, mat, PfModel.AT2, SplitKind.NONE)
    m = mesh.n_elements
    ev = problem.evaluate(np.zeros(problem.n_u), np.zeros(problem.n_phi), np.zeros((m, 4)),
                          np.ones((m, 4)))
    Ku, _ = problem.tangent(ev, np.ones((m, 4)))
    fixed, _ = constraints(problem)
    free = np.setdiff1d(np.arange(problem.n_u), fixed)
    f = problem.traction_vector("top", nominal_stress * mesh.traction_scale)
    u = np.zeros(problem.n_u)
    u[free] = spsolve(Ku[free][:, free].tocsc(), f[free])
    return problem, u


def nodal_stress(problem: AxisymmetricProblem, u: np.ndarray) -> np.ndarray:
    """
    Undamaged stress [s_rr, s_zz, s_tt, s_rz] at nodes, extrapolated from the
    Gauss points of each element and averaged over neighbours.
    """
    eps = problem.strains(u)
    sig = np.einsum("ij,mgj->mgi", problem.D, eps)
    ext = problem.nodal_extrapolation(sig)  # (m, 4 nodes, 4 comps)
    el = problem.mesh.elements.ravel()
    n = problem.mesh.n_nodes
    out = np.zeros((n, 4))
    for c in range(4):
        out[:, c] = np.bincount(el, ext[..., c].ravel(), minlength=n)
    count = np.bincount(el, minlength=n)
    return out / count[:, None]


def elastic_scf(mesh: Mesh, mat: MaterialParams) -> float:
    """Peak axial stress at the notch root over the net-section nominal stress."""
    if "root" not in mesh.node_sets:
        raise KeyError("mesh has no 'root' node set")
    problem, u = elastic_solution(mesh, mat, 1.0)
    s = nodal_stress(problem, u)
    return float(s[mesh.node_sets["root"], 1].max())
