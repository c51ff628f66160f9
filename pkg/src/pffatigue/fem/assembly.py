"""
Element kernels and global assembly
===================================

Bilinear axisymmetric quadrilaterals with 2x2 Gauss integration. Each node
carries (u_r, u_z, phi). Element contributions are evaluated for all
elements at once and reduced into fixed CSR patterns with ``bincount``,
which sums in a fixed order and keeps assembly deterministic.

Strain vectors are ordered ``[e_rr, e_zz, e_tt, g_rz]`` (engineering shear).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..material import (
    MaterialParams,
    PfModel,
    SplitKind,
    axisymmetric_to_tensor,
    degrade_derivatives,
    split_energy,
)
from .mesh import Mesh

_G = 1.0 / math.sqrt(3.0)
GAUSS_POINTS = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])
_XI = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def shape_functions(xi: np.ndarray):
    """Bilinear shape functions and parent derivatives at points (p, 2)."""
    xi = np.atleast_2d(xi)
    a = 1.0 + xi[:, None, 0] * _XI[None, :, 0]
    b = 1.0 + xi[:, None, 1] * _XI[None, :, 1]
    N = 0.25 * a * b
    dN = np.stack([0.25 * _XI[None, :, 0] * b, 0.25 * _XI[None, :, 1] * a], axis=-1)
    return N, dN


@dataclass
class Geometry:
    """Integration-point data for every element; arrays are (m, 4, ...)."""

    N: np.ndarray       # (4, 4) shape values, gauss point x node
    dNdr: np.ndarray    # (m, 4, 4)
    dNdz: np.ndarray    # (m, 4, 4)
    r: np.ndarray       # (m, 4)
    z: np.ndarray       # (m, 4)
    dV: np.ndarray      # (m, 4) 2 pi r detJ w


def element_geometry(mesh: Mesh) -> Geometry:
    """Jacobians and physical derivatives; rejects non-positive Jacobians."""
    N, dN = shape_functions(GAUSS_POINTS)
    x = mesh.nodes[mesh.elements]  # (m, 4, 2)
    J = np.einsum("gai,maj->mgij", dN, x)  # d(r, z) / d(xi, eta)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(det <= 0):
        bad = np.unique(np.nonzero(det <= 0)[0])
        raise ValueError(f"non-positive Jacobian in elements {bad[:10].tolist()}")
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    # J[i, j] = dx_j/dxi_i, so dxi_i/dx_j = inv(J)[j, i]
    dNdx = np.einsum("gai,mgji->mgaj", dN, inv)
    r = np.einsum("ga,ma->mg", N, x[..., 0])
    z = np.einsum("ga,ma->mg", N, x[..., 1])
    return Geometry(N, dNdx[..., 0], dNdx[..., 1], r, z, 2.0 * np.pi * r * det)


def strain_matrix(geo: Geometry) -> np.ndarray:
    """B with shape (m, 4, 4, 8) mapping element u to the strain vector."""
    m = geo.r.shape[0]
    B = np.zeros((m, 4, 4, 8))
    B[..., 0, 0::2] = geo.dNdr
    B[..., 1, 1::2] = geo.dNdz
    B[..., 2, 0::2] = geo.N[None] / geo.r[..., None]
    B[..., 3, 0::2] = geo.dNdz
    B[..., 3, 1::2] = geo.dNdr
    return B


def elasticity_matrix(mat: MaterialParams) -> np.ndarray:
    lam, mu = mat.lam, mat.mu
    D = np.full((3, 3), lam) + 2.0 * mu * np.eye(3)
    out = np.zeros((4, 4))
    out[:3, :3] = D
    out[3, 3] = mu
    return out


def _csr_pattern(conn: np.ndarray, n: int):
    """CSR pattern of element blocks plus the COO -> CSR data map."""
    k = conn.shape[1]
    rows = np.repeat(conn, k, axis=1).ravel()
    cols = np.tile(conn, (1, k)).ravel()
    key = rows * n + cols
    uniq, inv = np.unique(key, return_inverse=True)
    ur, uc = np.divmod(uniq, n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, ur + 1, 1)
    return np.cumsum(indptr), uc, inv


@dataclass
class Evaluation:
    """Integration-point quantities of one state."""

    eps: np.ndarray        # (m, 4, 4)
    psi_plus: np.ndarray   # (m, 4)
    H: np.ndarray          # (m, 4) history including the AT1 floor
    H_raw: np.ndarray      # (m, 4) history without the floor
    phi: np.ndarray        # (m, 4)
    grad_phi: np.ndarray   # (m, 4, 2)


class AxisymmetricProblem:
    """
    Coupled displacement/phase field residuals and tangents on a mesh.

    Global ordering: ``[u_r0, u_z0, u_r1, u_z1, ..., phi_0, phi_1, ...]``.
    """

    def __init__(self, mesh: Mesh, mat: MaterialParams, model: PfModel, split: SplitKind):
        self.mesh, self.mat, self.model, self.split = mesh, mat, model, split
        self.geo = element_geometry(mesh)
        self.B = strain_matrix(self.geo)
        self.D = elasticity_matrix(mat)
        self.c_w = model.c_w
        n = mesh.n_nodes
        self.n_u, self.n_phi = 2 * n, n
        el = mesh.elements
        self.udofs = np.stack([2 * el, 2 * el + 1], axis=-1).reshape(-1, 8)
        self._pu = _csr_pattern(self.udofs, self.n_u)
        self._pp = _csr_pattern(el, n)
        # state-independent per-point blocks, weighted by every tangent
        m = mesh.n_elements
        DB = np.einsum("ij,mgjb->mgib", self.D, self.B)
        BDB = np.matmul(self.B.transpose(0, 1, 3, 2), DB) * self.geo.dV[..., None, None]
        self._BDB = (0.5 * (BDB + BDB.transpose(0, 1, 3, 2))).reshape(m, 4, 64)
        self._NN = np.einsum("ga,gb,mg->mgab", self.geo.N, self.geo.N,
                             self.geo.dV).reshape(m, 4, 16)
        GG = (self.geo.dNdr[..., :, None] * self.geo.dNdr[..., None, :]
              + self.geo.dNdz[..., :, None] * self.geo.dNdz[..., None, :])
        self._GG = (GG * self.geo.dV[..., None, None]).reshape(m, 4, 16)

    @property
    def n_dofs(self) -> int:
        return self.n_u + self.n_phi

    # ---------------------------------------------------------------- fields
    def strains(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("mgij,mj->mgi", self.B, u[self.udofs])

    def active_energy(self, eps: np.ndarray) -> np.ndarray:
        if self.split is SplitKind.NONE:
            e = eps
            tr = e[..., 0] + e[..., 1] + e[..., 2]
            return 0.5 * self.mat.lam * tr**2 + self.mat.mu * (
                e[..., 0] ** 2 + e[..., 1] ** 2 + e[..., 2] ** 2 + 0.5 * e[..., 3] ** 2)
        plus, _ = split_energy(axisymmetric_to_tensor(eps), self.mat, self.split)
        return np.asarray(plus)

    def max_principal_stress(self, eps: np.ndarray) -> np.ndarray:
        """Largest principal value of L0 : eps (undegraded)."""
        ev = np.linalg.eigvalsh(axisymmetric_to_tensor(eps))
        return self.mat.lam * ev.sum(axis=-1) + 2.0 * self.mat.mu * ev[..., -1]

    def floor(self, f_gp: np.ndarray) -> np.ndarray | float:
        """AT1 driving force floor 3 Gc f / (16 ell); zero for AT2."""
        if self.model is PfModel.AT1:
            return self.mat.h_min(1.0) * f_gp
        return 0.0

    def evaluate(self, u: np.ndarray, phi: np.ndarray, H_prev: np.ndarray,
                 f_gp: np.ndarray) -> Evaluation:
        eps = self.strains(u)
        psi = self.active_energy(eps)
        H_raw = np.maximum(H_prev, psi)
        H = np.maximum(H_raw, self.floor(f_gp))
        pe = phi[self.mesh.elements]
        phi_gp = pe @ self.geo.N.T
        grad = np.stack([np.einsum("mga,ma->mg", self.geo.dNdr, pe),
                         np.einsum("mga,ma->mg", self.geo.dNdz, pe)], axis=-1)
        return Evaluation(eps, psi, H, H_raw, phi_gp, grad)

    def _w_derivs(self, phi_gp):
        if self.model is PfModel.AT1:
            return np.ones_like(phi_gp), np.zeros_like(phi_gp)
        return 2.0 * phi_gp, np.full_like(phi_gp, 2.0)

    # ----------------------------------------------------------- residuals
    def residual(self, ev: Evaluation, f_gp: np.ndarray):
        """
        Internal residual blocks (r_u, r_phi, scale_u, scale_phi).

        ``scale_*`` are magnitudes used to judge convergence.
        """
        mat = self.mat
        g, dg, _ = degrade_derivatives(ev.phi)
        gk = g + mat.k_residual
        sig = np.einsum("ij,mgj->mgi", self.D, ev.eps)
        fe = np.einsum("mgia,mgi,mg->ma", self.B, sig, gk * self.geo.dV)
        r_u = np.bincount(self.udofs.ravel(), fe.ravel(), minlength=self.n_u)
        scale_u = np.bincount(self.udofs.ravel(), np.abs(fe).ravel(), minlength=self.n_u)

        dw, _ = self._w_derivs(ev.phi)
        c = mat.Gc / (4.0 * self.c_w)
        local = dg * ev.H + f_gp * c * dw / mat.ell
        fp = np.einsum("ga,mg->ma", self.geo.N, local * self.geo.dV)
        fp += np.einsum("mga,mg->ma", self.geo.dNdr, 2.0 * mat.ell * c * f_gp * ev.grad_phi[..., 0] * self.geo.dV)
        fp += np.einsum("mga,mg->ma", self.geo.dNdz, 2.0 * mat.ell * c * f_gp * ev.grad_phi[..., 1] * self.geo.dV)
        el = self.mesh.elements.ravel()
        r_phi = np.bincount(el, fp.ravel(), minlength=self.n_phi)
        mag = np.abs(dg) * ev.H + f_gp * c * (np.abs(dw) + 1.0) / mat.ell
        scale_phi = np.bincount(el, np.einsum("ga,mg->ma", self.geo.N, mag * self.geo.dV).ravel(),
                                minlength=self.n_phi)
        return r_u, r_phi, scale_u, scale_phi

    # ------------------------------------------------------------ tangents
    def tangent(self, ev: Evaluation, f_gp: np.ndarray):
        """Symmetric tangent blocks (K_u, K_phi) as CSR matrices."""
        mat = self.mat
        g, _, ddg = degrade_derivatives(ev.phi)
        gk = g + mat.k_residual
        ke = np.matmul(gk[:, None, :], self._BDB)
        Ku = self._to_csr(self._pu, ke, self.n_u)

        _, ddw = self._w_derivs(ev.phi)
        c = mat.Gc / (4.0 * self.c_w)
        coef = ddg * ev.H + f_gp * c * ddw / mat.ell
        # f is constant per point but may vary between points of one element
        kp = np.matmul(coef[:, None, :], self._NN) + np.matmul(
            (2.0 * mat.ell * c * f_gp)[:, None, :], self._GG)
        Kp = self._to_csr(self._pp, kp, self.n_phi)
        return Ku, Kp

    @staticmethod
    def _to_csr(pattern, blocks, n):
        indptr, indices, inv = pattern
        data = np.bincount(inv, blocks.ravel(), minlength=len(indices))
        return sp.csr_matrix((data, indices, indptr), shape=(n, n))

    # ------------------------------------------------------------- loading
    def traction_vector(self, edge_set: str, traction_z: float) -> np.ndarray:
        """Consistent nodal forces of a uniform axial traction on straight edges."""
        f = np.zeros(self.n_u)
        edges = self.mesh.edge_sets.get(edge_set)
        if edges is None or len(edges) == 0:
            raise KeyError(f"mesh has no edge set {edge_set!r}")
        xa, xb = self.mesh.nodes[edges[:, 0]], self.mesh.nodes[edges[:, 1]]
        L = np.linalg.norm(xb - xa, axis=1)
        ra, rb = xa[:, 0], xb[:, 0]
        fa = 2.0 * np.pi * traction_z * L * (ra / 3.0 + rb / 6.0)
        fb = 2.0 * np.pi * traction_z * L * (ra / 6.0 + rb / 3.0)
        np.add.at(f, 2 * edges[:, 0] + 1, fa)
        np.add.at(f, 2 * edges[:, 1] + 1, fb)
        return f

    def volume(self) -> float:
        return float(self.geo.dV.sum())

    def nodal_extrapolation(self, gp_values: np.ndarray) -> np.ndarray:
        """Extrapolate (m, 4, ...) Gauss point values to the element nodes."""
        E = np.linalg.inv(self.geo.N)
        return np.einsum("ag,mg...->ma...", E, gp_values)
