"""Derived calculus on top of a weight exponent g.

For a problem with exponent g this module provides

    G(r)   = int_0^r g(s)/s ds          (primitive of g(s)/s)
    J(r)   = r^p / G(r)
    E(tau) = J(G^(-1)(tau)) = G^(-1)(tau)^p / tau
    I(r)   = nu0 (r^p/G(r0))^(1/(p-1)) + (1-nu0) J(r0)^(1/(p-1))

together with the two-sided sandwich bounds that make the barrier
constructions work: G against g, G' and G'' against G, J' and J''
against J, and the scaling law of G^(-1).  The sandwich constants
(eta1, eta2 for G'', c1, c2 for J'') come from explicit case tables on
(alpha1, alpha2, p); no sign of c1/c2 is assumed anywhere.

G is exact for power weights.  For Zygmund weights the defining integral
is computed with the substitution s = r e^(-u), which turns the s^(alpha1-1)
endpoint behaviour into an exponentially decaying integrand on (0, inf),
integrated with a fixed 64-point Gauss-Legendre rule per dyadic panel.
"""
from __future__ import annotations

import math

import numpy as np

from ._numerics import gauss_legendre_panel, invert_increasing
from .reports import LemmaReport, make_check
from .weights import DomainError, ProblemSpec, eval_g, eval_g_prime

__all__ = ["EnvelopeCalculus", "second_derivative_constants", "ratio_second_constants"]

_CHUNK = 8192


def second_derivative_constants(alpha1, alpha2):
    """(eta1, eta2) with eta1*G <= r^2 G'' <= eta2*G, per the case table."""
    eta1 = (alpha1 - 1.0) * (alpha2 if alpha1 < 1 else alpha1)
    eta2 = (alpha2 - 1.0) * (alpha1 if alpha2 < 1 else alpha2)
    return eta1, eta2


def ratio_second_constants(p, alpha1, alpha2):
    """(c1, c2) with c1*J/r^2 <= J'' <= c2*J/r^2, per the case table."""
    if alpha2 >= 1:
        c1 = p * (p - 1 - 2 * alpha2) + 2 * alpha1 ** 2 - alpha2 * (alpha2 - 1)
    else:
        c1 = p * (p - 1 - 2 * alpha2) + 2 * alpha1 ** 2 - alpha1 * (alpha2 - 1)
    if alpha1 >= 1:
        c2 = p * (p - 1 - 2 * alpha1) + 2 * alpha2 ** 2 - alpha1 * (alpha1 - 1)
    else:
        c2 = p * (p - 1 - 2 * alpha1) + 2 * alpha2 ** 2 - alpha2 * (alpha1 - 1)
    return c1, c2


class EnvelopeCalculus:
    """Immutable bundle of G, G^(-1), J, E, I for one problem.

    All caches are built eagerly in the constructor; every query method
    is pure, so instances are safe to share between threads.
    """

    def __init__(self, problem: ProblemSpec, cache_decades=(-9.0, 9.0),
                 cache_per_decade=64):
        self.problem = problem
        self.weight = problem.weight
        w = self.weight
        self.eta1, self.eta2 = second_derivative_constants(w.alpha1, w.alpha2)
        self.c1, self.c2 = ratio_second_constants(problem.p, w.alpha1, w.alpha2)

        if w.kind == "zygmund":
            # dyadic panels [0,1],[1,2],[2,4],... reaching far enough that the
            # quadrature tail  g(r) e^(-alpha1 U)/alpha1  is below 1e-18 G(r)
            u_need = (42.0 + math.log(w.alpha2 / w.alpha1)) / w.alpha1
            edges = [0.0, 1.0]
            while edges[-1] < u_need:
                edges.append(edges[-1] * 2.0)
            self._panels = list(zip(edges[:-1], edges[1:]))
            lo, hi = cache_decades
            n = int((hi - lo) * cache_per_decade) + 1
            rs = np.logspace(lo, hi, n)
            self._cache_log_r = np.log(rs)
            self._cache_log_G = np.log(self._G_quad(rs))
        else:
            self._panels = None
            self._cache_log_r = None
            self._cache_log_G = None

    # -- raw weight shortcuts ------------------------------------------------

    def g(self, r):
        return eval_g(self.weight, r)

    def g_prime(self, r):
        return eval_g_prime(self.weight, r)

    def f(self, r):
        """The weight itself, f = exp(g)."""
        return np.exp(eval_g(self.weight, r))

    # -- G and its inverse ---------------------------------------------------

    def _G_quad(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for start in range(0, len(r), _CHUNK):
            block = r[start:start + _CHUNK, None]
            acc = 0.0
            for a, b in self._panels:
                acc = acc + gauss_legendre_panel(
                    lambda u: eval_g(self.weight, block * np.exp(-u)), a, b)
            out[start:start + _CHUNK] = acc
        return out

    def big_G(self, r):
        """G(r) = int_0^r g(s)/s ds, r > 0."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("big_G requires r > 0")
        if self.weight.kind == "power":
            out = arr ** self.weight.alpha / self.weight.alpha
        else:
            out = self._G_quad(arr)
            if arr.ndim == 0:
                return float(out[0])
        return out if arr.ndim else float(out)

    def big_G_inverse(self, tau):
        """r with G(r) = tau, tau > 0; bracketing bisection off a power seed."""
        arr = np.asarray(tau, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("big_G_inverse requires tau > 0")
        w = self.weight
        if w.kind == "power":
            out = (w.alpha * arr) ** (1.0 / w.alpha)
            return out if arr.ndim else float(out)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr)
        seed = (w.alpha1 * flat) ** (1.0 / w.alpha1)
        if self._cache_log_G is not None:
            inside = (np.log(flat) > self._cache_log_G[0]) & \
                     (np.log(flat) < self._cache_log_G[-1])
            cached = np.exp(np.interp(np.log(flat), self._cache_log_G,
                                      self._cache_log_r))
            seed = np.where(inside, cached, seed)
        out = invert_increasing(lambda s: self._G_quad(s), flat, seed)
        return float(out[0]) if scalar else out

    def G_prime(self, r):
        """G'(r) = g(r)/r exactly."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("G_prime requires r > 0")
        return eval_g(self.weight, arr) / arr

    def G_second(self, r):
        """G''(r) = (g'(r) r - g(r)) / r^2, analytic."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("G_second requires r > 0")
        return (eval_g_prime(self.weight, arr) * arr - eval_g(self.weight, arr)) / arr ** 2

    # -- J, E, I ---------------------------------------------------------------

    def big_J(self, r):
        """J(r) = r^p / G(r), r > 0."""
        arr = np.asarray(r, dtype=float)
        return arr ** self.problem.p / self.big_G(arr)

    def big_J_prime(self, r):
        """J'(r) = (J/r) [p - r G'/G];  positive whenever alpha2 < p."""
        arr = np.asarray(r, dtype=float)
        G = self.big_G(arr)
        return self.big_J(arr) / arr * (self.problem.p - eval_g(self.weight, arr) / G)

    def big_J_second(self, r):
        """J'' from the ratio expansion in terms of G, G', G''."""
        arr = np.asarray(r, dtype=float)
        p = self.problem.p
        G = self.big_G(arr)
        g = eval_g(self.weight, arr)
        gp = eval_g_prime(self.weight, arr)
        # r G'/G = g/G,  r^2 G''/G = (g' r - g)/G,  r^2 (G'/G)^2 = (g/G)^2
        q = g / G
        bracket = p * (p - 1) - 2 * p * q - (gp * arr - g) / G + 2 * q ** 2
        return self.big_J(arr) / arr ** 2 * bracket

    def big_E(self, tau):
        """E(tau) = G^(-1)(tau)^p / tau = J(G^(-1)(tau)); increasing."""
        arr = np.asarray(tau, dtype=float)
        return self.big_G_inverse(arr) ** self.problem.p / arr

    def E_root(self, tau):
        """E(tau)^(1/(p-1)), the combination the barriers are built from."""
        return self.big_E(tau) ** (1.0 / (self.problem.p - 1.0))

    def cap_I(self, r, r0, nu0):
        """Inner profile I(r); I(r0) = J(r0)^(1/(p-1)) for any nu0 in (0,1)."""
        if not r0 > 0:
            raise DomainError("cap_I requires r0 > 0")
        if not 0 < nu0 < 1:
            raise DomainError("cap_I requires nu0 in (0,1)")
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise DomainError("cap_I requires r >= 0")
        e = 1.0 / (self.problem.p - 1.0)
        Gr0 = self.big_G(r0)
        return nu0 * (arr ** self.problem.p / Gr0) ** e + \
            (1.0 - nu0) * self.big_J(r0) ** e

    # -- certification ----------------------------------------------------------

    def phi_monotone_radius(self, delta1, delta2):
        """Radius past which J^(1/(p-1)) (delta1 + delta2/G) is increasing.

        Returns G^(-1)( (delta2/delta1) p (alpha2-1)_+ / (p-alpha2) ), which
        degenerates to 0 when alpha2 <= 1.
        """
        if not (delta1 > 0 and delta2 > 0):
            raise DomainError("phi_monotone_radius requires positive deltas")
        p = self.problem.p
        a2 = self.weight.alpha2
        target = (delta2 / delta1) * p * max(a2 - 1.0, 0.0) / (p - a2)
        if target == 0.0:
            return 0.0
        return self.big_G_inverse(target)

    def lemma_suite(self, grid=None, tol_rel=1e-8) -> LemmaReport:
        """Scan every sandwich inequality over a log grid.

        Families covered: G against g, G' against G, the G'' sandwich with
        (eta1, eta2), the J' sandwich, the J'' sandwich with (c1, c2), and
        the scaling law of G^(-1) (checked through pairs (r_i, r_j) via the
        identity G^(-1)(G(r)) = r, so no inversions are involved).
        """
        from .weights import default_grid
        if grid is None:
            grid = default_grid()
        grid = np.asarray(grid, dtype=float)
        if grid[-1] / grid[0] < 10 ** 5.999:
            raise DomainError("lemma_suite grid must span >= 6 decades")
        p = self.problem.p
        a1, a2 = self.weight.alpha1, self.weight.alpha2

        g = eval_g(self.weight, grid)
        G = self.big_G(grid)
        Gp = self.G_prime(grid)
        Gs = self.G_second(grid)
        J = self.big_J(grid)
        Jp = self.big_J_prime(grid)
        Js = self.big_J_second(grid)

        def rel(lhs, rhs, scale):
            # scale is the sandwich's intrinsic magnitude (G, J/r, ...);
            # normalizing by the sides themselves would turn the float
            # residue of a tight equality (0 <= 0) into a spurious O(1).
            return (lhs - rhs) / np.maximum(scale, 1e-300)

        s_G = G
        s_Gp = G / grid * max(1.0, a2)
        s_Gs = G * max(1.0, abs(self.eta1), abs(self.eta2))
        s_Jp = J / grid * max(1.0, p)
        s_Js = J / grid ** 2 * max(1.0, abs(self.c1), abs(self.c2))
        checks = [
            make_check("G_vs_g_lower", rel(g / a2, G, s_G), grid, tol_rel),
            make_check("G_vs_g_upper", rel(G, g / a1, s_G), grid, tol_rel),
            make_check("Gprime_lower", rel(a1 * G / grid, Gp, s_Gp), grid, tol_rel),
            make_check("Gprime_upper", rel(Gp, a2 * G / grid, s_Gp), grid, tol_rel),
            make_check("Gsecond_lower", rel(self.eta1 * G, grid ** 2 * Gs, s_Gs), grid, tol_rel),
            make_check("Gsecond_upper", rel(grid ** 2 * Gs, self.eta2 * G, s_Gs), grid, tol_rel),
            make_check("Jprime_lower", rel((p - a2) * J / grid, Jp, s_Jp), grid, tol_rel),
            make_check("Jprime_upper", rel(Jp, (p - a1) * J / grid, s_Jp), grid, tol_rel),
            make_check("Jsecond_lower", rel(self.c1 * J / grid ** 2, Js, s_Js), grid, tol_rel),
            make_check("Jsecond_upper", rel(Js, self.c2 * J / grid ** 2, s_Js), grid, tol_rel),
        ]

        # G^(-1) scaling over pairs: with tau_i = G(r_i), lam = tau_j/tau_i >= 1,
        # the claim lam^(1/a2) G^(-1)(tau_i) <= G^(-1)(tau_j) <= lam^(1/a1) G^(-1)(tau_i)
        # reads lam^(1/a2) r_i <= r_j <= lam^(1/a1) r_i.
        iu = np.triu_indices(len(grid))
        lam = (G[iu[1]] / G[iu[0]])
        lo = lam ** (1.0 / a2) * grid[iu[0]]
        hi = lam ** (1.0 / a1) * grid[iu[0]]
        rj = grid[iu[1]]
        pair_args = (grid[iu[0]], grid[iu[1]])
        checks.append(make_check("Ginv_scaling_lower", rel(lo, rj, rj), pair_args, tol_rel))
        checks.append(make_check("Ginv_scaling_upper", rel(rj, hi, hi), pair_args, tol_rel))

        return LemmaReport(checks=tuple(checks), tol_rel=tol_rel)
