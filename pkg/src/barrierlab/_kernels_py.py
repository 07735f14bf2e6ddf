"""Pure-Python/NumPy fallback for the compiled kernels.

Same contracts as the Cython module `_kernels`; selected at import time
by `_native` when the extension is unavailable.  The finite-volume
stepper is vectorized over the active window, the ODE integrator is a
scalar loop (inherently sequential), so expect roughly an order of
magnitude slowdown versus the compiled versions.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# finite-volume advance statuses
OK = 0
NEGATIVE = 1
SUPPORT_HIT = 2
MAX_STEPS = 3


def fv_advance(U, wf, wc, dr, m, p, cfl, eps_reg, t, t_target,
               max_steps, hi, neg_tol, dt_fixed=0.0):
    """Advance the explicit finite-volume scheme in place until t_target.

    U: cell values (modified); wf: face weights r^(N-1) f(r), len n+1;
    wc: cell weights, len n.  hi is the active-window size (first index
    from which U vanishes identically); it grows by at most one cell per
    step.  Returns (t, steps, status, hi).
    """
    n = U.shape[0]
    drp = dr ** p
    inv_dr_wc = 1.0 / (dr * wc)
    em = m - 1.0
    ep = p - 2.0
    steps = 0
    while t < t_target:
        if steps >= max_steps:
            return t, steps, MAX_STEPS, hi
        k = hi
        if k > 0:
            du = U[1:k + 1] - U[:k]                  # faces 1..k, undivided
            uf = 0.5 * (U[1:k + 1] + U[:k])
            adu = np.abs(du)
            D = np.zeros_like(du)
            act = (adu > 0.0) & (uf > 0.0)
            if act.any():
                if p == 2.0:
                    D[act] = uf[act] ** em
                else:
                    D[act] = uf[act] ** em * (adu[act] / dr) ** ep
            flux = wf[1:k + 1] * D * (du / dr)

            if dt_fixed > 0.0:
                dt = dt_fixed
            else:
                if p == 2.0:
                    den = float(np.max(m * U[:k] ** em, initial=0.0))
                else:
                    umax = np.maximum(U[1:k + 1], U[:k])
                    vals = np.zeros_like(du)
                    sel = adu > 0.0
                    vals[sel] = m * umax[sel] ** em * adu[sel] ** ep
                    den = float(np.max(vals, initial=0.0))
                dt = cfl * drp / (den + eps_reg)
        else:
            flux = None
            dt = dt_fixed if dt_fixed > 0.0 else cfl * drp / eps_reg

        last = dt >= t_target - t
        if last:
            dt = t_target - t

        if k > 0:
            F = np.zeros(k + 2)
            F[1:k + 1] = flux                        # F[0] = F[k+1] = 0
            U[:k + 1] += dt * (F[1:] - F[:-1]) * inv_dr_wc[:k + 1]
        steps += 1
        t = t_target if last else t + dt

        if k > 0:
            if np.any(U[:k + 1] < -neg_tol):
                return t, steps, NEGATIVE, hi
            if hi < n and U[hi] > 0.0:
                hi += 1
                if hi == n:
                    return t, steps, SUPPORT_HIT, hi
    return t, steps, OK, hi


def rk4_blowup(kind, wa, wb, wcc, Ndim, p, r_star, z_pts,
               step_abs=1e-6, step_rel=1e-3):
    """Integrate dr/dz = F(r) = (f(r) r^(N-1))^(1/(p-1)) from r(0) = r_star.

    z_pts must be sorted ascending; values below 0 are reached by
    integrating backward, values above 0 forward, landing exactly on
    each checkpoint.  Step size keeps the r-increment below
    min(step_abs*(1+r), step_rel*r); a step that no longer moves z is a
    hard failure (blow-up reached within float resolution).
    """
    inv_pm1 = 1.0 / (p - 1.0)
    nm1 = Ndim - 1.0

    if kind == 0:
        def F(r):
            return math.exp((r ** wa + nm1 * math.log(r)) * inv_pm1)
    else:
        def F(r):
            g = r ** wa * math.log(r + wcc) ** wb
            return math.exp((g + nm1 * math.log(r)) * inv_pm1)

    z_pts = np.asarray(z_pts, dtype=float)
    out = np.empty_like(z_pts)

    def run(direction, indices):
        z, r = 0.0, r_star
        for idx in indices:
            zc = z_pts[idx]
            while z != zc:
                f0 = F(r)
                h = min(step_abs * (1.0 + r), step_rel * r) / f0
                togo = zc - z
                if direction > 0:
                    hit = h >= togo
                    h = togo if hit else h
                else:
                    hit = -h <= togo
                    h = togo if hit else -h
                if z + h == z:
                    raise RuntimeError(
                        "ODE step underflow near blow-up (z stagnated)")
                k1 = f0
                k2 = F(r + 0.5 * h * k1)
                k3 = F(r + 0.5 * h * k2)
                k4 = F(r + h * k3)
                r += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
                z = zc if hit else z + h
            out[idx] = r

    run(+1, [i for i in range(len(z_pts)) if z_pts[i] >= 0.0])
    run(-1, [i for i in range(len(z_pts) - 1, -1, -1) if z_pts[i] < 0.0])
    return out
