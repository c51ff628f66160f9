"""
Independent reference implementations used by the tests.

Nothing here imports the package: every quantity is rebuilt from the
governing formulas with plain Python/NumPy/SciPy so that agreement is a
real cross-check rather than a tautology.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

C_W = {"AT1": 2.0 / 3.0, "AT2": 0.5}


def lame(E, nu):
    return E * nu / ((1 + nu) * (1 - 2 * nu)), E / (2 * (1 + nu))


def psi0(eps, E, nu):
    lam, mu = lame(E, nu)
    tr = np.trace(eps)
    return 0.5 * lam * tr**2 + mu * np.sum(eps * eps)


def spectral_split(eps, E, nu):
    """Miehe split from an explicit eigen-decomposition (one tensor)."""
    lam, mu = lame(E, nu)
    w = np.linalg.eigvalsh(eps)
    tr = w.sum()
    plus = 0.5 * lam * max(tr, 0.0) ** 2 + mu * sum(max(x, 0.0) ** 2 for x in w)
    minus = 0.5 * lam * min(tr, 0.0) ** 2 + mu * sum(min(x, 0.0) ** 2 for x in w)
    return plus, minus


def voldev_split(eps, E, nu):
    """Amor split written with the bulk modulus."""
    lam, mu = lame(E, nu)
    K = lam + 2 * mu / 3
    tr = np.trace(eps)
    dev = eps - tr / 3 * np.eye(3)
    return (0.5 * K * max(tr, 0.0) ** 2 + mu * np.sum(dev * dev),
            0.5 * K * min(tr, 0.0) ** 2)


def balance_residual(model, phi, H, f, Gc, ell):
    """d/dphi of the local energy: g'(phi) H + f Gc/(4 c_w ell) w'(phi)."""
    dw = 1.0 if model == "AT1" else 2.0 * phi
    return -2.0 * (1.0 - phi) * H + f * Gc / (4.0 * C_W[model] * ell) * dw


def phi_root(model, H, f, Gc, ell, phi_prev=0.0):
    """Bracketed root of the homogeneous balance, clamped to [phi_prev, 1]."""
    r = lambda p: balance_residual(model, p, H, f, Gc, ell)  # noqa: E731
    if r(0.0) >= 0.0:
        phi = 0.0
    elif r(1.0) <= 0.0:
        phi = 1.0
    else:
        phi = brentq(r, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    return min(1.0, max(phi_prev, phi))


def fdeg(kind, a, a0):
    if kind == "F0":
        return 1.0 if a <= a0 else (1.0 - (a - a0) / (a + a0)) ** 2
    if kind == "F1":
        return (1.0 - a / (a + a0)) ** 2
    return (1.0 - a / a0) ** 2 if a <= a0 else 0.0


def homogeneous_life_load_control(model, sigma_a, E, Gc, ell, alpha0, n, kappa, alpha_e,
                                  alpha_n, fd="F2", R=-1.0, max_cycles=10**6, tie=1e-7):
    """
    Cycle-by-cycle load-controlled homogeneous bar (NoTension, 1D energies).

    Each cycle the peak strain is the crossing of the applied peak stress on
    the rising branch of the current response, bracketed by the response
    maximum. Failure is the first cycle whose response cannot carry the peak;
    a peak equal to the response maximum is still carried (``tie`` covers the
    sqrt(machine epsilon) accuracy of the bounded maximizer at the AT1 kink).
    Returns (N_f or None, trace of (abar, phi, eps)).
    """
    peak = 2.0 * sigma_a / (1.0 - R)
    abar = tracker = H = phi = 0.0
    w2 = ((1.0 - R) / 2.0) ** (2.0 * kappa)
    top = 6.0 * math.sqrt(Gc / (ell * E))
    trace = []
    for N in range(1, max_cycles + 1):
        f = fdeg(fd, abar, alpha0)

        def response(eps, H=H, f=f, phi=phi):
            h = max(H, 0.5 * E * eps**2)
            return (1.0 - phi_root(model, h, f, Gc, ell, phi)) ** 2 * E * eps

        best = minimize_scalar(lambda e: -response(e), bounds=(0.0, top), method="bounded",
                               options={"xatol": 1e-12 * top})
        if -best.fun < peak * (1.0 - tie):
            return N, trace
        if -best.fun <= peak:
            eps = best.x
        else:
            eps = brentq(lambda e: response(e) - peak, 0.0, best.x, xtol=1e-15)
        H = max(H, 0.5 * E * eps**2)
        phi = phi_root(model, H, f, Gc, ell, phi)
        amax = (1.0 - phi) ** 2 * 0.5 * E * eps**2
        tracker = max(tracker, amax * w2)
        if tracker > alpha_e:
            abar += (amax / alpha_n) ** n * w2**n
        trace.append((abar, phi, eps))
    return None, trace


def axisymmetric_patch_displacement(nodes, a, b, c):
    """Affine field u_r = a r, u_z = b z + c r (exact for bilinear elements)."""
    r, z = nodes[:, 0], nodes[:, 1]
    u = np.zeros(2 * len(nodes))
    u[0::2] = a * r
    u[1::2] = b * z + c * r
    return u


def revolved_volume(radius_of_z, z0, z1, samples=20001):
    """Volume of a solid of revolution by composite Simpson integration."""
    z = np.linspace(z0, z1, samples)
    y = np.pi * radius_of_z(z) ** 2
    h = (z1 - z0) / (samples - 1)
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
