"""Compiled per-cycle recursion for the homogeneous bar."""

import math

import numpy as np
from numba import njit

LOAD, DISP = 0, 1
GEN, PER_INC, REFORM, REPR = 0, 1, 2, 3

# termination codes
RUNNING, FAILED, RUNOUT = 0, 1, 2


@njit(cache=True)
def fdeg_value(code, abar, a0):
    if code == 0:
        if abar <= a0:
            return 1.0
        return (1.0 - (abar - a0) / (abar + a0)) ** 2
    if code == 1:
        return (1.0 - abar / (abar + a0)) ** 2
    if abar >= a0:
        return 0.0
    return (1.0 - abar / a0) ** 2


@njit(cache=True)
def phi_hom(at1, H, f, Gc, ell):
    """Gradient-free balance root clamped to [0, 1]."""
    if f <= 0.0:
        return 1.0 if H > 0.0 else 0.0
    if at1:
        if H <= 0.0:
            return 0.0
        p = 1.0 - 3.0 * Gc * f / (16.0 * ell * H)
    else:
        p = 2.0 * ell * H / (Gc * f + 2.0 * ell * H)
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return p


@njit(cache=True)
def psi_plus(eps, cpt, cpc):
    if eps >= 0.0:
        return cpt * eps * eps
    return cpc * eps * eps


@njit(cache=True)
def _stress_at(eps, at1, H, phi_prev, f, E, Gc, ell, cpt):
    Hn = max(H, cpt * eps * eps)
    p = max(phi_prev, phi_hom(at1, Hn, f, Gc, ell))
    return (1.0 - p) ** 2 * E * eps


@njit(cache=True)
def solve_peak_strain(sig, at1, H, phi_prev, f, E, Gc, ell, cpt):
    """
    Smallest positive strain carrying stress ``sig`` on the rising branch.

    Returns -1.0 when the stress exceeds the peak of the current response.
    """
    if f <= 0.0:
        return -1.0
    eps_h = math.sqrt(H / cpt) if H > 0.0 else 0.0
    if at1:
        eps_env = math.sqrt(3.0 * Gc * f / (16.0 * ell) / cpt)
    else:
        eps_env = math.sqrt(Gc * f / (3.0 * 2.0 * ell * cpt))
    eps_star = max(eps_h, eps_env)
    sig_star = _stress_at(eps_star, at1, H, phi_prev, f, E, Gc, ell, cpt)
    if sig > sig_star * (1.0 + 1e-14):
        return -1.0
    ph = max(phi_prev, phi_hom(at1, H, f, Gc, ell))
    gh = (1.0 - ph) ** 2
    if gh <= 0.0:
        return -1.0
    if sig <= gh * E * eps_h:
        return sig / (gh * E)
    if at1:
        # between eps_h and the threshold the point is intact
        return min(sig / E, eps_star)
    # AT2 envelope, increasing on [eps_h, eps_star]
    lo, hi = eps_h, eps_star
    x = min(max(sig / E, lo), hi)
    for _ in range(200):
        fx = _stress_at(x, at1, H, phi_prev, f, E, Gc, ell, cpt) - sig
        if fx > 0.0:
            hi = x
        else:
            lo = x
        # analytic derivative of E x (a / (a + b x^2))^2
        a = Gc * f
        b = 2.0 * ell * cpt
        q = a + b * x * x
        d = E * a * a * (q - 4.0 * b * x * x) / (q * q * q)
        xn = x - fx / d if d > 0.0 else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * x or hi - lo <= 1e-15 * hi:
            return xn
        x = xn
    return x


@njit(cache=True)
def _cycle_increment(mode, amax, amin, R, n, kappa, alpha_n, alpha_e, tracker,
                     eps_peak, g, cpt, cpc, substeps):
    """Return (delta_abar, new_tracker)."""
    if mode == GEN:
        if amax <= 0.0:
            return 0.0, tracker
        w2 = (0.5 * (1.0 - R)) ** (2.0 * kappa)
        tr = max(tracker, amax * w2)
        if tr - alpha_e > 0.0:
            return (amax / alpha_n) ** n * w2**n, tr
        return 0.0, tr
    if mode == REFORM:
        s = 0.0 if R == 0.0 else (1.0 if R > 0.0 else -1.0)
        return (amax**n - s * amin**n) / alpha_n**n, tracker
    if mode == REPR:
        s = 0.0 if R == 0.0 else (1.0 if R > 0.0 else -1.0)
        return (amax / alpha_n) ** n * (1.0 - s * abs(R) ** (2.0 * n)), tracker
    # per-increment: triangular path mean -> max -> mean -> min -> mean
    mean = 0.5 * (1.0 + R) * eps_peak
    amp = 0.5 * (1.0 - R) * eps_peak
    prev = g * psi_plus(mean, cpt, cpc)
    d = 0.0
    for j in range(1, substeps + 1):
        t = j / substeps
        if t <= 0.25:
            tri = 4.0 * t
        elif t <= 0.75:
            tri = 2.0 - 4.0 * t
        else:
            tri = 4.0 * t - 4.0
        cur = g * psi_plus(mean + amp * tri, cpt, cpc)
        if cur > prev:
            d += cur - prev
        prev = cur
    return d / alpha_n, tracker


@njit(cache=True)
def run_kernel(control, peak, R, max_cycles, substeps, mode, at1,
               E, Gc, ell, cpt, cpc, fcode, alpha0, n, kappa, alpha_e, alpha_n,
               phi_fail, phi_init, abar0, tracker0, H0, phi0,
               tr_n, tr_abar, tr_phi, tr_sig, tr_eps, dense_until, per_decade):
    """
    Cycle-by-cycle recursion. Returns
    (status, N_i, N_f_or_last, abar, tracker, H, phi, n_trace).
    """
    abar, tracker, H, phi = abar0, tracker0, H0, phi0
    N_i = -1
    ntr = 0
    next_log = float(max(dense_until, 1))
    step = 10.0 ** (1.0 / per_decade)
    cap = tr_n.shape[0]
    N = 0
    status = RUNNING
    while N < max_cycles:
        N += 1
        f = fdeg_value(fcode, abar, alpha0)
        if control == LOAD:
            eps_p = solve_peak_strain(peak, at1, H, phi, f, E, Gc, ell, cpt)
            if eps_p < 0.0:
                status = FAILED
                if ntr < cap:
                    tr_n[ntr] = N
                    tr_abar[ntr] = abar
                    tr_phi[ntr] = 1.0
                    tr_sig[ntr] = 0.0
                    tr_eps[ntr] = math.nan
                    ntr += 1
                phi = 1.0
                break
        else:
            eps_p = peak
        Hn = max(H, psi_plus(eps_p, cpt, cpc))
        phin = max(phi, phi_hom(at1, Hn, f, Gc, ell))
        g = (1.0 - phin) ** 2
        eps_v = R * eps_p
        amax = g * psi_plus(eps_p, cpt, cpc)
        amin = g * psi_plus(eps_v, cpt, cpc)
        Hn = max(Hn, psi_plus(eps_v, cpt, cpc))
        d, tracker_n = _cycle_increment(mode, amax, amin, R, n, kappa, alpha_n, alpha_e,
                                        tracker, eps_p, g, cpt, cpc, substeps)
        if d < 0.0:
            d = 0.0
        stationary = d == 0.0 and phin == phi and Hn == H and tracker_n == tracker
        abar += d
        H, phi, tracker = Hn, phin, tracker_n
        if N_i < 0 and phi > phi_init:
            N_i = N
        if N <= dense_until or N >= next_log or N == max_cycles:
            if ntr < cap:
                tr_n[ntr] = N
                tr_abar[ntr] = abar
                tr_phi[ntr] = phi
                tr_sig[ntr] = g * E * eps_p
                tr_eps[ntr] = eps_p
                ntr += 1
            while next_log <= N:
                next_log *= step
        if control == DISP and phi >= phi_fail:
            status = FAILED
            break
        if stationary:
            # fixed point: every further cycle repeats this one
            status = RUNOUT
            break
    if status == RUNNING:
        status = RUNOUT
    return status, N_i, N, abar, tracker, H, phi, ntr
