"""
Material models
===============

Isotropic linear elasticity, phase field degradation and crack geometric
functions, tension/compression energy splits and the history field.

Strain tensors are symmetric ``(..., 3, 3)`` arrays. Axisymmetric strains
``[e_rr, e_zz, e_tt, g_rz]`` (engineering shear) are promoted with
:func:`axisymmetric_to_tensor` so one split implementation serves 1D,
axisymmetric and 3D states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

#: Residual stiffness added to the degradation function.
K_RESIDUAL = 1e-7

_DOMAIN_TOL = 1e-12


class PfModel(enum.Enum):
    """Phase field variant, defined by the geometric crack function w(phi)."""

    AT1 = "AT1"
    AT2 = "AT2"

    @property
    def c_w(self) -> float:
        return 2.0 / 3.0 if self is PfModel.AT1 else 0.5


class SplitKind(enum.Enum):
    SPECTRAL = "Spectral"
    NO_TENSION = "NoTension"
    VOL_DEV = "VolDev"
    NONE = "None"


@dataclass(frozen=True)
class MaterialParams:
    """
    Elastic and fracture properties.

    Attributes:
        E: Young's modulus [MPa]
        nu: Poisson's ratio [-]
        Gc: critical energy release rate [N/mm = kJ/m^2]
        ell: phase field length scale [mm]
        k_residual: residual stiffness factor [-]
    """

    E: float
    nu: float
    Gc: float
    ell: float
    k_residual: float = K_RESIDUAL
    lam: float = field(init=False, repr=False)
    mu: float = field(init=False, repr=False)

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"E must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"nu must be in (-1, 0.5), got {self.nu}")
        if not self.Gc > 0:
            raise ValueError(f"Gc must be positive, got {self.Gc}")
        if not self.ell > 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if self.k_residual < 0:
            raise ValueError(f"k_residual must be non-negative, got {self.k_residual}")
        object.__setattr__(self, "lam", self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu)))
        object.__setattr__(self, "mu", self.E / (2 * (1 + self.nu)))

    @property
    def bulk(self) -> float:
        return self.lam + 2.0 * self.mu / 3.0

    def h_min(self, toughness_factor: float = 1.0) -> float:
        """AT1 elastic threshold 3 Gc f / (16 ell) of the driving force."""
        return 3.0 * self.Gc * toughness_factor / (16.0 * self.ell)


def _check_phi(phi):
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < -_DOMAIN_TOL) or np.any(phi > 1.0 + _DOMAIN_TOL):
        raise ValueError(f"phase field outside [0, 1]: {phi}")
    return phi


def degrade(phi):
    """Quadratic degradation g(phi) = (1 - phi)^2."""
    phi = _check_phi(phi)
    out = (1.0 - phi) ** 2
    return float(out) if out.ndim == 0 else out


def degrade_derivatives(phi):
    """Return (g, g', g'') at ``phi`` without domain checking."""
    phi = np.asarray(phi, dtype=float)
    return (1.0 - phi) ** 2, -2.0 * (1.0 - phi), np.full_like(phi, 2.0)


def geometric_crack(model: PfModel, phi):
    """Crack geometric function and derivatives ``(w, w', w'')``."""
    phi = _check_phi(phi)
    if model is PfModel.AT1:
        w, dw, ddw = phi, np.ones_like(phi), np.zeros_like(phi)
    else:
        w, dw, ddw = phi**2, 2.0 * phi, np.full_like(phi, 2.0)
    if phi.ndim == 0:
        return float(w), float(dw), float(ddw)
    return w, dw, ddw


def axisymmetric_to_tensor(eps4):
    """Promote ``[e_rr, e_zz, e_tt, g_rz]`` vectors to (..., 3, 3) tensors."""
    eps4 = np.asarray(eps4, dtype=float)
    out = np.zeros(eps4.shape[:-1] + (3, 3))
    out[..., 0, 0] = eps4[..., 0]
    out[..., 1, 1] = eps4[..., 1]
    out[..., 2, 2] = eps4[..., 2]
    out[..., 0, 1] = out[..., 1, 0] = 0.5 * eps4[..., 3]
    return out


def strain_energy(eps, mat: MaterialParams):
    """Undamaged strain energy density 0.5 eps : L0 : eps."""
    eps = np.asarray(eps, dtype=float)
    tr = np.trace(eps, axis1=-2, axis2=-1)
    return 0.5 * mat.lam * tr**2 + mat.mu * np.einsum("...ij,...ij->...", eps, eps)


def _macaulay(x):
    return 0.5 * (x + np.abs(x)), 0.5 * (x - np.abs(x))


def split_energy(eps, mat: MaterialParams, kind: SplitKind):
    """
    Split the undamaged strain energy into active and inactive parts.

    Args:
        eps: strain tensor(s), shape (3, 3) or (..., 3, 3)
        mat: material parameters
        kind: energy split

    Returns:
        (psi_plus, psi_minus) with the leading shape of ``eps``.
    """
    eps = np.asarray(eps, dtype=float)
    if eps.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3) strain tensors, got shape {eps.shape}")
    if not np.all(np.isfinite(eps)):
        raise ValueError("non-finite strain tensor")
    eps = 0.5 * (eps + np.swapaxes(eps, -1, -2))
    lam, mu = mat.lam, mat.mu

    if kind is SplitKind.NONE:
        plus = strain_energy(eps, mat)
        minus = np.zeros_like(plus)
    elif kind is SplitKind.VOL_DEV:
        tr = np.trace(eps, axis1=-2, axis2=-1)
        dev = eps - tr[..., None, None] / 3.0 * np.eye(3)
        tp, tm = _macaulay(tr)
        plus = 0.5 * mat.bulk * tp**2 + mu * np.einsum("...ij,...ij->...", dev, dev)
        minus = 0.5 * mat.bulk * tm**2
    else:
        ev = np.linalg.eigvalsh(eps)
        scale = np.max(np.abs(ev), axis=-1, keepdims=True)
        # eigenvalues below the degeneracy tolerance count as zero
        ev = np.where(np.abs(ev) <= 1e-12 * scale, 0.0, ev)
        ep, em = _macaulay(ev)
        if kind is SplitKind.SPECTRAL:
            trp, trm = _macaulay(ev.sum(axis=-1))
        else:
            trp, trm = ep.sum(axis=-1), em.sum(axis=-1)
        plus = 0.5 * lam * trp**2 + mu * (ep**2).sum(axis=-1)
        minus = 0.5 * lam * trm**2 + mu * (em**2).sum(axis=-1)

    if np.ndim(plus) == 0:
        return float(plus), float(minus)
    return plus, minus


def elasticity_tensor(mat: MaterialParams) -> np.ndarray:
    """Isotropic stiffness L0 as a (3, 3, 3, 3) array."""
    I = np.eye(3)
    return (mat.lam * np.einsum("ij,kl->ijkl", I, I)
            + mat.mu * (np.einsum("ik,jl->ijkl", I, I) + np.einsum("il,jk->ijkl", I, I)))


def stress(eps, phi, mat: MaterialParams):
    """Hybrid Cauchy stress [g(phi) + k] L0 : eps (full stiffness degraded)."""
    eps = np.asarray(eps, dtype=float)
    gk = degrade(phi) + mat.k_residual
    tr = np.trace(eps, axis1=-2, axis2=-1)
    sig0 = mat.lam * tr[..., None, None] * np.eye(3) + 2.0 * mat.mu * eps
    return np.asarray(gk)[..., None, None] * sig0


def update_history(H_prev, psi_plus, model: PfModel, mat: MaterialParams,
                   toughness_factor=1.0):
    """
    History field update H = max(H_prev, psi_plus), floored for AT1.

    The AT1 floor is ``3 Gc f / (16 ell)`` where ``f`` is the fatigue
    toughness factor; with the default ``f = 1`` this is the undamaged
    elastic threshold.
    """
    H = np.maximum(H_prev, psi_plus)
    if model is PfModel.AT1:
        H = np.maximum(H, mat.h_min(toughness_factor))
    return float(H) if np.ndim(H) == 0 else H


def phi_balance(model: PfModel, H, f, Gc: float, ell: float):
    """
    Root of the gradient-free phase field balance for driving force ``H``
    and toughness factor ``f``, before irreversibility clamping.

    AT1 returns values below zero under the elastic threshold; callers clamp.
    """
    H = np.asarray(H, dtype=float)
    f = np.asarray(f, dtype=float)
    if model is PfModel.AT1:
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.where(H > 0, 1.0 - 3.0 * Gc * f / (16.0 * ell * np.where(H > 0, H, 1.0)), -np.inf)
    else:
        denom = Gc * f + 2.0 * ell * H
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.where(denom > 0, 2.0 * ell * H / np.where(denom > 0, denom, 1.0), 1.0)
    phi = np.where(f <= 0, np.where(H > 0, 1.0, 0.0), phi)
    return float(phi) if phi.ndim == 0 else phi


def homogeneous_stress(eps, model: PfModel, mat: MaterialParams, f: float = 1.0):
    """Uniaxial homogeneous response g(phi(eps)) E eps with psi+ = E eps^2 / 2."""
    eps = np.asarray(eps, dtype=float)
    phi = np.clip(phi_balance(model, 0.5 * mat.E * eps**2, f, mat.Gc, mat.ell), 0.0, 1.0)
    return (1.0 - phi) ** 2 * mat.E * eps


def critical_strength_closed_form(model: PfModel, mat: MaterialParams):
    """Closed-form (sigma_c, eps_c); the AT2 prefactor is 9/16."""
    E, Gc, ell = mat.E, mat.Gc, mat.ell
    if model is PfModel.AT1:
        return math.sqrt(3 * E * Gc / (8 * ell)), math.sqrt(3 * Gc / (8 * ell * E))
    return 9.0 / 16.0 * math.sqrt(E * Gc / (3 * ell)), math.sqrt(Gc / (3 * ell * E))


def golden_max(fun, lo: float, hi: float, iters: int = 200):
    """Golden-section maximization of a unimodal scalar function on [lo, hi]."""
    r = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if b - a <= 4e-16 * max(abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = fun(d)
    x = c if fc >= fd else d
    return float(max(fc, fd)), float(x)


def maximize_homogeneous_stress(model: PfModel, mat: MaterialParams, f: float = 1.0):
    """Numerically locate the peak of the homogeneous uniaxial response."""
    if f <= 0:
        return 0.0, 0.0
    _, eps_guess = critical_strength_closed_form(model, mat)
    return golden_max(lambda e: float(homogeneous_stress(e, model, mat, f)), 0.0, 10.0 * eps_guess)


def critical_point(model: PfModel, mat: MaterialParams):
    """
    Critical strength and strain of the homogeneous 1D solution.

    AT1 uses the closed form; AT2 maximizes the homogeneous response
    (which reproduces the 9/16 prefactor) and reports the closed-form strain.
    """
    if model is PfModel.AT1:
        return critical_strength_closed_form(model, mat)
    sigma_c, _ = maximize_homogeneous_stress(model, mat)
    return sigma_c, critical_strength_closed_form(model, mat)[1]


def uniaxial_split_coefficients(mat: MaterialParams, kind: SplitKind):
    """
    Quadratic coefficients of the split energies along a uniaxial stress path.

    Returns ``(plus_t, minus_t, plus_c, minus_c)`` so that for axial strain
    ``e`` the active energy is ``plus_t * e**2`` when ``e >= 0`` and
    ``plus_c * e**2`` otherwise. NoTension is taken in its 1D form
    (active energy in tension, inactive in compression); the other splits
    use the 3D tensor ``diag(e, -nu e, -nu e)``.
    """
    if kind is SplitKind.NO_TENSION:
        half_e = 0.5 * mat.E
        return half_e, 0.0, 0.0, half_e
    t = np.diag([1.0, -mat.nu, -mat.nu])
    pt, mt = split_energy(t, mat, kind)
    pc, mc = split_energy(-t, mat, kind)
    return pt, mt, pc, mc
