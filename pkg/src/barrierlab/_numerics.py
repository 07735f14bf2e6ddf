"""Small numerical helpers: bracketed bisection for monotone functions
and fixed Gauss-Legendre panel quadrature.

Bisection is deliberately preferred over faster root finders: every
inversion in this package targets a strictly increasing function, so a
bracket can always be expanded geometrically and bisection cannot fail.
"""
from __future__ import annotations

import numpy as np

BISECT_ITERS = 80
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


class NumericsError(RuntimeError):
    """A root or quadrature routine failed to converge."""


def invert_increasing(fn, y, seed, iters=BISECT_ITERS, max_expand=400):
    """Solve fn(x) = y for a strictly increasing fn on (0, inf), vectorized.

    ``seed`` is a positive initial guess (scalar or array shaped like y).
    The bracket is expanded by factors of 2 from the seed, then bisected
    a fixed number of iterations (the bracket midpoint is exact to float
    precision long before 80 halvings).
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    lo = np.atleast_1d(np.asarray(seed, dtype=float) * np.ones_like(y))
    hi = lo.copy()

    f_lo = np.atleast_1d(fn(lo))
    for _ in range(max_expand):
        need = f_lo > y
        if not need.any():
            break
        lo[need] *= 0.5
        f_lo[need] = np.atleast_1d(fn(lo[need]))
    else:
        raise NumericsError("bisection bracket: lower end did not bound the target")

    f_hi = np.atleast_1d(fn(hi))
    for _ in range(max_expand):
        need = f_hi < y
        if not need.any():
            break
        hi[need] *= 2.0
        f_hi[need] = np.atleast_1d(fn(hi[need]))
    else:
        raise NumericsError("bisection bracket: upper end did not bound the target")

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = np.atleast_1d(fn(mid))
        less = f_mid < y
        lo = np.where(less, mid, lo)
        hi = np.where(less, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


def solve_increasing_scalar(fn, target, lo, hi, expand=10.0, max_expand=200,
                            iters=BISECT_ITERS):
    """Smallest x with fn(x) >= target, fn increasing; expands hi as needed."""
    if fn(lo) >= target:
        return lo
    for _ in range(max_expand):
        if fn(hi) >= target:
            break
        hi *= expand
    else:
        raise NumericsError("monotone solve: upper bracket expansion failed")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def gauss_legendre_panel(fn, a, b):
    """Integrate fn over [a, b] with a fixed 64-point Gauss-Legendre rule.

    fn must accept an ndarray of nodes; if it returns a 2-d array (points
    in the last axis) the panel is integrated along that axis.
    """
    half = 0.5 * (b - a)
    u = half * _GL_NODES + 0.5 * (a + b)
    vals = fn(u)
    return half * np.sum(vals * _GL_WEIGHTS, axis=-1)
