# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: the explicit finite-volume stepper and the
blow-up ODE integrator.  Contracts match `_kernels_py` exactly; that
module is the authoritative reference implementation."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, pow

BACKEND = "cython"

OK = 0
NEGATIVE = 1
SUPPORT_HIT = 2
MAX_STEPS = 3


def fv_advance(double[::1] U, double[::1] wf, double[::1] wc,
               double dr, double m, double p, double cfl, double eps_reg,
               double t, double t_target, long max_steps, long hi,
               double neg_tol, double dt_fixed=0.0):
    """See _kernels_py.fv_advance."""
    cdef long n = U.shape[0]
    cdef long steps = 0, k, j, i
    cdef double drp = pow(dr, p)
    cdef double em = m - 1.0, ep = p - 2.0
    cdef double du, uf, adu, D, den, v, dt, umax
    cdef bint last, p2 = (p == 2.0)
    cdef cnp.ndarray[double, ndim=1] Fbuf = np.zeros(n + 1)
    cdef double[::1] F = Fbuf

    while t < t_target:
        if steps >= max_steps:
            return t, steps, MAX_STEPS, hi
        k = hi
        den = 0.0
        if k > 0:
            for j in range(1, k + 1):
                du = U[j] - U[j - 1]
                uf = 0.5 * (U[j] + U[j - 1])
                if du != 0.0 and uf > 0.0:
                    if p2:
                        D = pow(uf, em)
                    else:
                        D = pow(uf, em) * pow(fabs(du) / dr, ep)
                    F[j] = wf[j] * D * (du / dr)
                else:
                    F[j] = 0.0
                if dt_fixed <= 0.0 and not p2:
                    adu = fabs(du)
                    if adu > 0.0:
                        umax = U[j] if U[j] > U[j - 1] else U[j - 1]
                        v = m * pow(umax, em) * pow(adu, ep)
                        if v > den:
                            den = v
            if dt_fixed <= 0.0 and p2:
                for i in range(k):
                    v = m * pow(U[i], em)
                    if v > den:
                        den = v
        if dt_fixed > 0.0:
            dt = dt_fixed
        else:
            dt = cfl * drp / (den + eps_reg)

        last = dt >= t_target - t
        if last:
            dt = t_target - t

        if k > 0:
            F[0] = 0.0
            F[k + 1] = 0.0
            for i in range(k + 1):
                U[i] = U[i] + dt * (F[i + 1] - F[i]) / (dr * wc[i])
        steps += 1
        t = t_target if last else t + dt

        if k > 0:
            for i in range(k + 1):
                if U[i] < -neg_tol:
                    return t, steps, NEGATIVE, hi
            if hi < n and U[hi] > 0.0:
                hi += 1
                if hi == n:
                    return t, steps, SUPPORT_HIT, hi
    return t, steps, OK, hi


cdef inline double _speed(int kind, double wa, double wb, double wcc,
                          double nm1, double inv_pm1, double r) nogil:
    cdef double g
    if kind == 0:
        g = pow(r, wa)
    else:
        g = pow(r, wa) * pow(log(r + wcc), wb)
    return exp((g + nm1 * log(r)) * inv_pm1)


def rk4_blowup(int kind, double wa, double wb, double wcc,
               double Ndim, double p, double r_star, double[::1] z_pts,
               double step_abs=1e-6, double step_rel=1e-3):
    """See _kernels_py.rk4_blowup."""
    cdef double inv_pm1 = 1.0 / (p - 1.0)
    cdef double nm1 = Ndim - 1.0
    cdef long npts = z_pts.shape[0], idx, start_fwd
    cdef cnp.ndarray[double, ndim=1] outbuf = np.empty(npts)
    cdef double[::1] out = outbuf
    cdef double z, r, zc, f0, h, togo, k1, k2, k3, k4, hcap
    cdef bint hit

    start_fwd = 0
    while start_fwd < npts and z_pts[start_fwd] < 0.0:
        start_fwd += 1

    # forward sweep over z >= 0
    z = 0.0
    r = r_star
    for idx in range(start_fwd, npts):
        zc = z_pts[idx]
        while z != zc:
            f0 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r)
            hcap = step_abs * (1.0 + r)
            if step_rel * r < hcap:
                hcap = step_rel * r
            h = hcap / f0
            togo = zc - z
            hit = h >= togo
            if hit:
                h = togo
            if z + h == z:
                raise RuntimeError("ODE step underflow near blow-up (z stagnated)")
            k1 = f0
            k2 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r + 0.5 * h * k1)
            k3 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r + 0.5 * h * k2)
            k4 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r + h * k3)
            r = r + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            z = zc if hit else z + h
        out[idx] = r

    # backward sweep over z < 0, nearest checkpoint first
    z = 0.0
    r = r_star
    for idx in range(start_fwd - 1, -1, -1):
        zc = z_pts[idx]
        while z != zc:
            f0 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r)
            hcap = step_abs * (1.0 + r)
            if step_rel * r < hcap:
                hcap = step_rel * r
            h = hcap / f0
            togo = zc - z
            hit = (-h <= togo)
            h = togo if hit else -h
            if z + h == z:
                raise RuntimeError("ODE step underflow near blow-up (z stagnated)")
            k1 = f0
            k2 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r + 0.5 * h * k1)
            k3 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r + 0.5 * h * k2)
            k4 = _speed(kind, wa, wb, wcc, nm1, inv_pm1, r + h * k3)
            r = r + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            z = zc if hit else z + h
        out[idx] = r

    return outbuf
