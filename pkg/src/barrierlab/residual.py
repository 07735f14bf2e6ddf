"""Pointwise certification that a barrier satisfies its differential
inequality for the radial equation

    U_t = d/dr[U^(m-1)|U_r|^(p-2) U_r] + ((N-1)/r + g') U^(m-1)|U_r|^(p-2) U_r .

All derivatives are analytic (chain rule on the barrier's closed form,
with J', J'' from the envelope); finite differences appear only in the
test suite as cross-checks.  A supersolution must have residual

    u~_t - d/dr(flux) - ((N-1)/r + g') flux  >=  0

on its positivity set, a subsolution <= 0.  The matching radius r0 and
the support edge are excluded by thin bands: the barrier is only C^1
there, and the weak formulation does not require a pointwise inequality
on those measure-zero sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .barriers import BarrierParams, barrier_support_radius
from .envelope import EnvelopeCalculus
from .weights import DomainError

__all__ = [
    "ResidualGridSpec", "ResidualReport", "ResidualConfigError",
    "analytic_flux_outer", "analytic_flux_inner", "time_derivative",
    "outer_quantities", "inner_quantities", "verify",
]


class ResidualConfigError(ValueError):
    """Verification grid is inconsistent (e.g. bands swallow the support)."""


@dataclass(frozen=True)
class ResidualGridSpec:
    """Sampling plan for the certification scan."""

    n_r_inner: int = 400
    n_r_outer: int = 400
    n_t: int = 40
    t_span_factor: float = 1e6
    band_delta: float = 1e-3     # half-width, relative, at r0 and at the edge
    inner_floor: float = 1e-4    # inner zone starts at r0 * inner_floor
    times: tuple | None = None   # explicit override

    def time_grid(self, t0):
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        geo = np.geomspace(1e-4 * t0, self.t_span_factor * t0, self.n_t - 1)
        return np.concatenate([[0.0], geo])


@dataclass(frozen=True)
class ResidualReport:
    kind: str
    n_points: int
    worst_value: float           # signed, normalized; >= 0 expected
    worst_location: tuple        # (r, t)
    excluded_bands: tuple
    tol_residual: float
    samples: tuple = field(repr=False, default=())  # (r, t, normalized residual)

    @property
    def passed(self) -> bool:
        return self.worst_value >= -self.tol_residual

    def to_dict(self):
        return {
            "kind": self.kind,
            "n_points": self.n_points,
            "worst_value": self.worst_value,
            "worst_location": list(self.worst_location),
            "excluded_bands": [list(b) for b in self.excluded_bands],
            "tol_residual": self.tol_residual,
            "pass": self.passed,
        }


def _powers(problem):
    p, m = problem.p, problem.m
    pm3 = p + m - 3.0
    return p, pm3, (p - 1.0) / pm3, (p + m - 2.0) / pm3


def dE_root_dt(params: BarrierParams, calc: EnvelopeCalculus, t):
    """d/dt of E(tau)^(1/(p-1)) along tau = Gamma log(t+t0); positive."""
    p = calc.problem.p
    s = t + params.t0
    tau = params.Gamma * np.log(s)
    y = calc.big_G_inverse(tau)
    E = y ** p / tau
    gy = calc.g(y)
    # G(y) = tau and G'(y) = g(y)/y exactly
    core = y ** (p - 1.0) / tau ** 2 * (p * tau * y / gy - y)
    return params.Gamma / s / (p - 1.0) * E ** ((2.0 - p) / (p - 1.0)) * core


def time_derivative(params: BarrierParams, calc: EnvelopeCalculus, r, t):
    """du~/dt via the two-term analytic formula.

    Also enforces the sandwich
    (p-a2)/(a2(p-1)) Gamma/((t+t0)tau) E^(1/(p-1)) <= dE^(1/(p-1))/dt <= (a1 form),
    which pins down the time-derivative's growth rate.
    """
    problem = calc.problem
    p, pm3, kappa, q = _powers(problem)
    a1, a2 = problem.weight.alpha1, problem.weight.alpha2
    s = t + params.t0
    tau = params.Gamma * math.log(s)
    Ep = calc.E_root(tau)
    dEp = float(dE_root_dt(params, calc, t))

    base = params.Gamma / (s * tau) * Ep / (p - 1.0)
    lo, hi = (p - a2) / a2 * base, (p - a1) / a1 * base
    if not (lo * (1 - 1e-9) - 1e-300 <= dEp <= hi * (1 + 1e-9) + 1e-300):
        raise AssertionError(
            f"dE^(1/(p-1))/dt sandwich violated: {lo} <= {dEp} <= {hi}")

    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    profile = np.where(r_arr < params.r0,
                       calc.cap_I(np.maximum(r_arr, 0.0), params.r0, params.nu0),
                       0.0)
    outer = r_arr >= params.r0
    if outer.any():
        profile[outer] = calc.big_J(r_arr[outer]) ** (1.0 / (p - 1.0))
    A = Ep - profile
    if np.any(A <= 0):
        raise DomainError("time_derivative is defined inside the support only")
    C = params.C_star
    out = -C / pm3 * A ** kappa * s ** (-q) + \
        (p - 1.0) / pm3 * C * A ** (kappa - 1.0) * s ** (-1.0 / pm3) * dEp
    return float(out[0]) if out.size == 1 else out


def outer_quantities(params: BarrierParams, calc: EnvelopeCalculus, r, t):
    """All analytic pieces of the outer-zone (r >= r0) residual at time t.

    Returns a dict holding the flux I1, its radial derivative, the time
    derivative, the geometric term, the raw residual, and the
    dimensionless reduction (K0, K1, K2, A) with its common factor CF;
    raw == CF * (K0 - A - K1 - K2) identically.
    """
    problem = calc.problem
    N, m = problem.N, problem.m
    p, pm3, kappa, q = _powers(problem)
    C = params.C_star
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s = t + params.t0
    tau = params.Gamma * math.log(s)
    Ep = calc.E_root(tau)
    e = 1.0 / (p - 1.0)

    J = calc.big_J(r)
    Jp = calc.big_J_prime(r)
    Jpp = calc.big_J_second(r)
    A = np.maximum(Ep - J ** e, 0.0)
    inside = A > 0

    gp = calc.g_prime(r)
    geom = (N - 1.0) / r + gp

    pref = C ** (p + m - 2.0) / pm3 ** (p - 1.0) * s ** (-q)
    I1 = np.where(inside, -pref * A ** kappa * J ** (2.0 - p) * Jp ** (p - 1.0), 0.0)
    I3 = -J ** (-p * (p - 2.0) / (p - 1.0)) * Jp ** p / pm3 + \
        A * ((2.0 - p) * J ** (1.0 - p) * Jp ** p +
             (p - 1.0) * J ** (2.0 - p) * Jp ** (p - 2.0) * Jpp)
    dEp = float(dE_root_dt(params, calc, t))
    with np.errstate(divide="ignore", invalid="ignore"):
        dI1 = np.where(inside, -pref * A ** (kappa - 1.0) * I3, 0.0)
        ut = np.where(inside,
                      -C / pm3 * A ** kappa * s ** (-q) +
                      (p - 1.0) / pm3 * C * A ** (kappa - 1.0) * s ** (-1.0 / pm3) * dEp,
                      0.0)
    low = geom * I1
    raw = ut - dI1 - low

    K0 = (p - 1.0) * s * dEp
    K1 = -C ** pm3 * A / pm3 ** (p - 2.0) * J ** (2.0 - p) * Jp ** (p - 1.0) * geom
    K2 = -C ** pm3 * I3 / pm3 ** (p - 2.0)
    CF = C * A ** (kappa - 1.0) / (pm3 * s ** q)
    return {"A": A, "J": J, "Jp": Jp, "Jpp": Jpp, "I1": I1, "dI1": dI1,
            "ut": ut, "low": low, "raw": raw,
            "K0": K0, "K1": K1, "K2": K2, "CF": CF, "inside": inside}


def inner_quantities(params: BarrierParams, calc: EnvelopeCalculus, r, t):
    """Analytic pieces of the inner-zone (r < r0) residual at time t.

    The geometric term is assembled as (N-1 + r g') * (L1/r) so nothing
    blows up at the origin (L1 carries a factor r).
    """
    problem = calc.problem
    N, p, m = problem.N, problem.p, problem.m
    _, pm3, kappa, q = _powers(problem)
    C = params.C_star
    nu0, r0 = params.nu0, params.r0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s = t + params.t0
    tau = params.Gamma * math.log(s)
    Ep = calc.E_root(tau)
    e = 1.0 / (p - 1.0)
    Gr0 = float(calc.big_G(r0))

    B = Ep - calc.cap_I(r, r0, nu0)
    if np.any(B <= 0):
        raise DomainError("inner zone sampled outside the positivity set")

    c2 = C ** (p + m - 2.0) * (nu0 * p) ** (p - 1.0) / pm3 ** (p - 1.0)
    L1_over_r = -c2 * B ** kappa * s ** (-q) / Gr0
    L1 = L1_over_r * r
    dL1 = c2 * B ** (kappa - 1.0) * s ** (-q) / Gr0 * (
        p * nu0 / pm3 * r ** (p / (p - 1.0)) / Gr0 ** e - B)

    rgp = np.zeros_like(r)
    pos = r > 0
    rgp[pos] = r[pos] * calc.g_prime(r[pos])
    low = (N - 1.0 + rgp) * L1_over_r

    dEp = float(dE_root_dt(params, calc, t))
    ut = -C / pm3 * B ** kappa * s ** (-q) + \
        (p - 1.0) / pm3 * C * B ** (kappa - 1.0) * s ** (-1.0 / pm3) * dEp
    raw = ut - dL1 - low

    K0 = (p - 1.0) * s * dEp
    cc = C ** pm3 * (nu0 * p) ** (p - 1.0) / pm3 ** (p - 2.0)
    K3 = B + cc / Gr0 * (p * nu0 / pm3 * r ** (p / (p - 1.0)) / Gr0 ** e - B) \
        - (N - 1.0 + rgp) * cc * B / Gr0
    CF = C * B ** (kappa - 1.0) / (pm3 * s ** q)
    return {"B": B, "L1": L1, "dL1": dL1, "ut": ut, "low": low, "raw": raw,
            "K0": K0, "K3": K3, "CF": CF}


def analytic_flux_outer(params, calc, r, t):
    """Flux U^(m-1)|U_r|^(p-2) U_r of the barrier for r >= r0 (<= 0)."""
    out = outer_quantities(params, calc, r, t)["I1"]
    return float(out[0]) if out.size == 1 else out


def analytic_flux_inner(params, calc, r, t):
    """Flux of the barrier for r < r0; matches the outer flux at r0."""
    out = inner_quantities(params, calc, r, t)["L1"]
    return float(out[0]) if out.size == 1 else out


def verify(params: BarrierParams, calc: EnvelopeCalculus,
           grid: ResidualGridSpec | None = None,
           tol_residual: float = 1e-8, keep_samples: bool = False,
           max_workers: int | None = None) -> ResidualReport:
    """Scan the signed residual over the (r, t) grid.

    The residual at each point is normalized by the largest of the three
    term magnitudes there (the terms range over many orders of
    magnitude); the pass criterion is worst normalized violation within
    ``tol_residual``.  Time slices are independent and evaluated in a
    thread pool capped by ``max_workers`` (or the TOOL_THREADS variable).
    """
    import os
    from concurrent.futures import ThreadPoolExecutor

    grid = grid or ResidualGridSpec()
    sign = 1.0 if params.kind == "super" else -1.0
    delta = grid.band_delta
    times = grid.time_grid(params.t0)

    r_in = np.geomspace(params.r0 * grid.inner_floor,
                        params.r0 * (1.0 - delta), grid.n_r_inner)

    def slice_worst(t):
        edge = float(barrier_support_radius(params, calc, t))
        lo, hi = params.r0 * (1.0 + delta), edge * (1.0 - delta)
        if hi <= lo:
            raise ResidualConfigError(
                f"exclusion bands cover the outer zone at t={t}: "
                f"r0(1+d)={lo} >= edge(1-d)={hi}")
        r_out = np.geomspace(lo, hi, grid.n_r_outer)
        qo = outer_quantities(params, calc, r_out, t)
        qi = inner_quantities(params, calc, r_in, t)
        rows = []
        for r_axis, qq, names in ((r_out, qo, ("ut", "dI1", "low")),
                                  (r_in, qi, ("ut", "dL1", "low"))):
            scale = np.maximum.reduce([np.abs(qq[n]) for n in names])
            scale = np.maximum(scale, 1e-300)
            rows.append((r_axis, sign * qq["raw"] / scale))
        return t, rows

    if max_workers is None:
        env = os.environ.get("TOOL_THREADS")
        max_workers = int(env) if env else min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as ex:
        results = list(ex.map(slice_worst, times))

    worst = math.inf
    worst_loc = (math.nan, math.nan)
    n_pts = 0
    samples = []
    for t, rows in results:
        for r_axis, rho in rows:
            n_pts += rho.size
            k = int(np.argmin(rho))
            if rho[k] < worst:
                worst = float(rho[k])
                worst_loc = (float(r_axis[k]), float(t))
            if keep_samples:
                samples.append((r_axis, np.full_like(r_axis, t), rho))

    bands = ((params.r0 * (1.0 - delta), params.r0 * (1.0 + delta)),
             ("support_edge", delta))
    packed = ()
    if keep_samples:
        packed = tuple(np.concatenate([s[i] for s in samples]) for i in range(3))
    return ResidualReport(kind=params.kind, n_points=n_pts,
                          worst_value=worst, worst_location=worst_loc,
                          excluded_bands=bands, tol_residual=tol_residual,
                          samples=packed)
