"""Change of radial variable linking the weighted equation to the
inhomogeneous-density equation rho(|x|) v_t = div(v^(m-1)|grad v|^(p-2) grad v).

The map r = rhat(s) solves

    rhat_s = ( f(rhat) rhat^(N-1) / s^(N-1) )^(1/(p-1)),    rhat(1) = r*,

and the density it induces is rho(s) = rhat_s(s)^p.  Substituting
z = (1 - s^(-beta))/beta, beta = (N-p)/(p-1) > 0, turns this into the
autonomous problem r~' = F(r~), F(r) = (f(r) r^(N-1))^(1/(p-1)), whose
solution from r~(0) = r* blows up at z1(r*) = integral_r*^inf dr/F(r).
The shooting step picks r* so that z1 = 1/beta, which makes rhat live
on all of (0, inf) with rhat_s(0+) = 1.  The autonomous form is the one
integrated numerically: the s-form is stiff near s = 0 while the z-form
only blows up at z = 1/beta, which finite s never reaches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._native import kernels
from ._numerics import NumericsError
from .envelope import EnvelopeCalculus
from .weights import DomainError, ProblemSpec, eval_g, invert_g

__all__ = [
    "TransformResult", "AsymptoticsReport", "RangeTooShortError",
    "speed", "phi_quad", "phi_tilde",
    "blowup_time", "shoot_r_star", "build_transform", "asymptotics_report",
]


class RangeTooShortError(RuntimeError):
    """Sampled s-range does not reach the asymptotic window."""


def _beta(problem):
    b = (problem.N - problem.p) / (problem.p - 1.0)
    if not b > 0:
        raise DomainError("transform requires p < N (beta > 0)")
    return b


def speed(problem: ProblemSpec, r):
    """F(r) = (f(r) r^(N-1))^(1/(p-1))."""
    r = np.asarray(r, dtype=float)
    out = np.exp((eval_g(problem.weight, r) +
                  (problem.N - 1.0) * np.log(r)) / (problem.p - 1.0))
    return out if out.ndim else float(out)


def phi_quad(problem: ProblemSpec, r_lo: float, tail_tol: float = 1e-14) -> float:
    """phi(r) = integral_r^inf dz/F(z) by adaptive quadrature.

    The integrand decays faster than any power (g grows at least like a
    positive power), so the integral is truncated at R with the rigorous
    tail bound  (p-1) R w(R) / (alpha1 g(R))  below tail_tol relative.
    """
    if not r_lo > 0:
        raise DomainError("phi_quad requires r > 0")
    p = problem.p
    a1 = problem.weight.alpha1

    def w(z):
        return float(np.exp(-(eval_g(problem.weight, z) +
                              (problem.N - 1.0) * math.log(z)) / (p - 1.0)))

    R = max(2.0 * r_lo, 1.0)
    val = None
    for _ in range(200):
        val, err = quad(w, r_lo, R, limit=200, epsabs=0.0, epsrel=1e-12)
        tail = (p - 1.0) * R * w(R) / (a1 * float(eval_g(problem.weight, R)))
        if tail <= tail_tol * val:
            return val
        R *= 2.0
    raise NumericsError("phi_quad: tail truncation did not converge")


def blowup_time(problem: ProblemSpec, r_star: float) -> float:
    """z1(r*) = integral_r*^inf dr/F(r): blow-up time of r~' = F(r~) from r*.

    Finite by superlinearity of F; decreasing and continuous in r*.
    """
    if not r_star > 0:
        raise DomainError("blowup_time requires r_star > 0")
    return phi_quad(problem, r_star)


def shoot_r_star(problem: ProblemSpec, tol_rel: float = 1e-10) -> float:
    """r* with z1(r*) = 1/beta, by bisection on log r*.

    z1 is strictly decreasing (positive integrand, shrinking domain), so
    a geometric bracket around any seed always exists.
    """
    beta = _beta(problem)
    target = 1.0 / beta
    lo = hi = 1.0
    for _ in range(200):
        if blowup_time(problem, lo) >= target:
            break
        lo *= 0.5
    else:
        raise NumericsError("shoot_r_star: no lower bracket")
    for _ in range(200):
        if blowup_time(problem, hi) <= target:
            break
        hi *= 2.0
    else:
        raise NumericsError("shoot_r_star: no upper bracket")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        z1 = blowup_time(problem, mid)
        if abs(z1 - target) <= tol_rel * target:
            return mid
        if z1 > target:
            lo = mid
        else:
            hi = mid
    raise NumericsError("shoot_r_star: bisection did not converge")


@dataclass(frozen=True)
class TransformResult:
    problem: ProblemSpec
    r_star: float
    beta: float
    s: np.ndarray
    r_hat: np.ndarray
    r_hat_s: np.ndarray
    rho: np.ndarray
    rho0: float              # rho evaluated at the small-s probe
    rho0_probe_s: float

    def to_dict(self):
        return {"r_star": self.r_star, "beta": self.beta,
                "rho0": self.rho0, "rho0_probe_s": self.rho0_probe_s,
                "s_min": float(self.s[0]), "s_max": float(self.s[-1]),
                "n_samples": int(len(self.s))}


def build_transform(problem: ProblemSpec, s_min: float = 1e-4,
                    s_max: float = 1e8, per_decade: int = 256,
                    rho0_probe: float = 1e-6,
                    r_star: float | None = None) -> TransformResult:
    """Integrate the autonomous blow-up ODE and sample the transform.

    Samples rhat on a log grid of s (with s = 1 inserted as the anchor
    rhat(1) = r*), takes rhat_s from the ODE right-hand side, and
    rho = rhat_s^p.  rho(0+) = 1 is probed at ``rho0_probe``: the
    leading deviation is of order s log(1/s), so the probe must sit well
    below 1e-4 for the limit to show at the 1e-3 level.
    """
    beta = _beta(problem)
    if r_star is None:
        r_star = shoot_r_star(problem)
    if not (0 < s_min < 1 < s_max):
        raise DomainError("need s_min < 1 < s_max")

    decades = math.log10(s_max / s_min)
    n = int(round(decades * per_decade)) + 1
    s = np.geomspace(s_min, s_max, n)
    s = np.union1d(s, [1.0, rho0_probe])
    z = (1.0 - s ** (-beta)) / beta

    w = problem.weight
    kind = 0 if w.kind == "power" else 1
    r_hat = kernels.rk4_blowup(kind, w.alpha, w.beta, w.c,
                               float(problem.N), problem.p, r_star,
                               np.ascontiguousarray(z))
    r_hat_s = speed(problem, r_hat) * s ** (-(problem.N - 1.0) / (problem.p - 1.0))
    rho = r_hat_s ** problem.p

    k_probe = int(np.searchsorted(s, rho0_probe))
    rho0 = float(rho[k_probe])
    keep = s >= s_min * (1 - 1e-12)
    return TransformResult(problem=problem, r_star=r_star, beta=beta,
                           s=s[keep], r_hat=r_hat[keep],
                           r_hat_s=r_hat_s[keep], rho=rho[keep],
                           rho0=rho0, rho0_probe_s=rho0_probe)


def phi_tilde(problem: ProblemSpec, r):
    """Comparison function [ g(r)/r * (f(r) r^(N-1))^(1/(p-1)) ]^(-1)."""
    r = np.asarray(r, dtype=float)
    out = 1.0 / (eval_g(problem.weight, r) / r * speed(problem, r))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class AsymptoticsReport:
    bands: dict                   # name -> (min, max)
    bound_factor: float
    s_window: tuple

    @property
    def passed(self):
        return all(hi / lo <= self.bound_factor for lo, hi in self.bands.values())

    def to_dict(self):
        return {"bound_factor": self.bound_factor,
                "s_window": list(self.s_window),
                "pass": self.passed,
                "bands": {k: {"min": lo, "max": hi, "ratio": hi / lo}
                          for k, (lo, hi) in self.bands.items()}}


def asymptotics_report(result: TransformResult, calc: EnvelopeCalculus,
                       s_lo: float = 1e3, s_hi: float | None = None,
                       bound_factor: float = 10.0) -> AsymptoticsReport:
    """Measured two-sided bands for the large-s equivalences.

    Three ratio series over [s_lo, s_hi]: rhat against g^(-1)(log s),
    rho against g^(-1)(log s)^p/((log s)^p s^p), and the comparison
    function phi~(rhat(s)) against s^(-beta).  Each passes if its
    max/min stays within ``bound_factor`` (the equivalences promise
    two-sided constants but not their size; a wrong exponent diverges).
    """
    problem = result.problem
    s_hi = s_hi or float(result.s[-1])
    if result.s[-1] < 0.999 * min(s_hi, 1e6):
        raise RangeTooShortError("samples do not reach the asymptotic window")
    sel = (result.s >= s_lo) & (result.s <= s_hi)
    if sel.sum() < 16:
        raise RangeTooShortError("too few samples in the asymptotic window")
    s = result.s[sel]
    logs = np.log(s)
    ginv = invert_g(problem.weight, logs)

    r1 = result.r_hat[sel] / ginv
    r2 = result.rho[sel] * s ** problem.p * logs ** problem.p / ginv ** problem.p
    r3 = phi_tilde(problem, result.r_hat[sel]) * s ** result.beta

    bands = {name: (float(v.min()), float(v.max()))
             for name, v in (("r_hat_vs_ginv_log", r1),
                             ("rho_vs_envelope", r2),
                             ("phi_tilde_decay", r3))}
    return AsymptoticsReport(bands=bands, bound_factor=bound_factor,
                             s_window=(s_lo, s_hi))
