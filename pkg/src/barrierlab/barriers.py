"""Selection of certified barrier constants and barrier evaluation.

A barrier has the self-similar form

    u~(x,t) = C* (t+t0)^(-1/(p+m-3)) [E(tau)^(1/(p-1)) - J(r)^(1/(p-1))]_+^((p-1)/(p+m-3))

for r >= r0, with J replaced by the C^1-matched inner profile I(r) for
r < r0, and tau = Gamma log(t+t0).  This module implements the recipes
that pick (C*, Gamma, t0, r0, nu0) so the result is a supersolution or a
subsolution, the mu-constants those recipes are built from, and the
fitting helpers that place a supersolution above given data or a
subsolution below it.

Every "large enough"/"small enough" selection multiplies its threshold
by a safety slack (1.05 up, 0.95 down) so floating point never sits on a
constraint boundary; the slack factors are recorded in the parameter set
and in its JSON form, which makes runs bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._numerics import solve_increasing_scalar
from .envelope import EnvelopeCalculus, ratio_second_constants
from .weights import DomainError, ProblemSpec

__all__ = [
    "BarrierParams", "ConstructionError",
    "super_mu_constants", "sub_mu_constants",
    "select_super", "select_sub", "nu0_matching",
    "eval_barrier", "barrier_support_radius",
    "fit_super_above", "fit_sub_below", "validate_barrier_params",
]

SLACK_UP = 1.05
SLACK_DOWN = 0.95


class ConstructionError(RuntimeError):
    """A constant-selection sweep failed; points at a violated hypothesis."""


@dataclass(frozen=True)
class BarrierParams:
    """A complete certified constant set for one barrier."""

    kind: str                 # "super" | "sub"
    C_star: float
    Gamma: float
    t0: float
    r0: float
    nu0: float
    mus: dict
    lam: float | None = None  # sub only: the free scale lambda
    slack_up: float = SLACK_UP
    slack_down: float = SLACK_DOWN

    def __post_init__(self):
        if self.kind not in ("super", "sub"):
            raise ValueError(f"unknown barrier kind {self.kind!r}")
        if not (self.C_star > 0 and self.Gamma > 0 and self.t0 > 1
                and self.r0 > 0 and 0 < self.nu0 < 1):
            raise ValueError("barrier constants out of range")

    def to_dict(self):
        d = {
            "kind": self.kind,
            "C_star": self.C_star,
            "Gamma": self.Gamma,
            "t0": self.t0,
            "log_t0": math.log(self.t0),
            "r0": self.r0,
            "nu0": self.nu0,
            "mus": dict(sorted(self.mus.items())),
            "slack_up": self.slack_up,
            "slack_down": self.slack_down,
        }
        if self.lam is not None:
            d["lambda"] = self.lam
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], C_star=float(d["C_star"]),
                   Gamma=float(d["Gamma"]), t0=float(d["t0"]),
                   r0=float(d["r0"]), nu0=float(d["nu0"]),
                   mus={k: float(v) for k, v in d["mus"].items()},
                   lam=float(d["lambda"]) if "lambda" in d else None,
                   slack_up=float(d.get("slack_up", SLACK_UP)),
                   slack_down=float(d.get("slack_down", SLACK_DOWN)))


def nu0_matching(calc: EnvelopeCalculus, r0: float) -> float:
    """nu0 = 1 - r0 G'(r0) / (p G(r0)); lands in [1-a2/p, 1-a1/p]."""
    p = calc.problem.p
    return 1.0 - calc.g(r0) / (p * calc.big_G(r0))


def _pm3(problem):
    return problem.p + problem.m - 3.0


def super_mu_constants(problem: ProblemSpec) -> dict:
    """mu1, mu2, mu3 and the J''-compensation d for the supersolution."""
    p, m = problem.p, problem.m
    a1, a2 = problem.weight.alpha1, problem.weight.alpha2
    pm3 = _pm3(problem)
    c1, _ = ratio_second_constants(p, a1, a2)
    mu1 = (p - a2) ** (p - 1) / pm3 ** (p - 2)
    mu2 = (p - a1) ** p / pm3 ** (p - 1)
    ai = a1 if p >= 2 else a2
    d = max(-c1, 0.0) * (p - 1) * (p - ai) ** (p - 2)
    mu3 = (max(p - 2, 0.0) * (p - a1) ** p + d) / pm3 ** (p - 2)
    return {"mu1": mu1, "mu2": mu2, "mu3": mu3, "d": d}


def sub_mu_constants(problem: ProblemSpec) -> dict:
    """Tilde-mu constants for the subsolution, including mu4t."""
    p, m = problem.p, problem.m
    a1, a2 = problem.weight.alpha1, problem.weight.alpha2
    pm3 = _pm3(problem)
    _, c2 = ratio_second_constants(p, a1, a2)
    mu1t = (p - a1) ** (p - 1) / pm3 ** (p - 2)
    mu2t = (p - a2) ** p / pm3 ** (p - 1)
    ai = a1 if p >= 2 else a2
    dt = max(c2, 0.0) * (p - 1) * (p - ai) ** (p - 2)
    mu3t = (max(2 - p, 0.0) * (p - a1) ** p + dt) / pm3 ** (p - 2)
    mu4t = 2.0 ** (-a2 * (p - 1) / (p - a2)) * mu2t * a1 / (p - a1)
    return {"mu1t": mu1t, "mu2t": mu2t, "mu3t": mu3t, "mu4t": mu4t, "dt": dt}


def _super_t0_threshold(calc, r0, nu0):
    """Left side of the t0 condition: the inner profile must fit under E."""
    p = calc.problem.p
    pm3 = _pm3(calc.problem)
    e = 1.0 / (p - 1.0)
    return p * nu0 / pm3 * (r0 ** p / calc.big_G(r0)) ** e + \
        float(calc.cap_I(r0, r0, nu0))


def select_super(problem: ProblemSpec, calc: EnvelopeCalculus | None = None,
                 r0_min: float = 0.0) -> BarrierParams:
    """Pick (r0, nu0, C*, Gamma, t0) so the barrier is a supersolution.

    Follows the recipe order: r0 from the G(r0) thresholds (canonical
    fallback G(r0) = 1 when both vanish), C* minimal against its ceiling,
    Gamma against its floor, then t0 as the smallest time shift for which
    the inner profile fits under E(log t0)^(1/(p-1)).  ``r0_min`` lets the
    fitting lemma force a larger matching radius.
    """
    calc = calc or EnvelopeCalculus(problem)
    p = problem.p
    a1, a2 = problem.weight.alpha1, problem.weight.alpha2
    pm3 = _pm3(problem)
    mus = super_mu_constants(problem)
    mu1, mu2, mu3 = mus["mu1"], mus["mu2"], mus["mu3"]

    thr = max(4.0 * mu3 / (mu1 * a1 ** 2),
              2.0 * mu2 * p * max(a2 - 1.0, 0.0) / (mu1 * a1 ** 2 * (p - a2)))
    G_r0 = SLACK_UP * thr if thr > 0 else 1.0
    r0 = calc.big_G_inverse(G_r0)
    if r0 < r0_min:
        r0 = r0_min
        G_r0 = calc.big_G(r0)
    nu0 = nu0_matching(calc, r0)

    C_ceiling = min(mu1 * a1 ** 2 / 4.0, mu1 * (problem.N - 1) / G_r0)
    C_star = (SLACK_DOWN * C_ceiling) ** (-1.0 / pm3)

    Gamma = SLACK_UP * max(mu2 * a2 * C_star ** pm3 / (p - a2), 1.0)

    lhs = _super_t0_threshold(calc, r0, nu0)
    log_t0 = solve_increasing_scalar(lambda x: calc.E_root(x), lhs,
                                     G_r0 + 1e-6, max(2.0 * G_r0, 10.0))
    log_t0 *= SLACK_UP
    params = BarrierParams(kind="super", C_star=C_star, Gamma=Gamma,
                           t0=math.exp(log_t0), r0=float(r0), nu0=float(nu0),
                           mus=mus)
    bad = validate_barrier_params(params, calc)
    if bad:
        raise ConstructionError(f"supersolution selection failed checks: {bad}")
    return params


def select_sub(problem: ProblemSpec, lam: float = 1.0,
               calc: EnvelopeCalculus | None = None) -> BarrierParams:
    """Pick the subsolution constants for a given free scale lambda.

    t0 comes first from its 4-term floor (with the worst-case bound
    nu0 p <= p - alpha1, since r0 and hence the exact nu0 are not known
    yet), then the coupled (r0, C*) pair: G(r0) starts at 0.95 min{1,
    lambda^(p+m-3)} and is halved until the third entry of the r0 bound,
    which references C*(r0), is satisfied.  The t0 floor guarantees this
    sweep terminates.  Gamma is then fixed exactly.
    """
    if not lam > 0:
        raise DomainError("select_sub requires lambda > 0")
    calc = calc or EnvelopeCalculus(problem)
    p, N = problem.p, problem.N
    a1, a2 = problem.weight.alpha1, problem.weight.alpha2
    pm3 = _pm3(problem)
    mus = sub_mu_constants(problem)
    mu1t, mu2t, mu3t, mu4t = mus["mu1t"], mus["mu2t"], mus["mu3t"], mus["mu4t"]

    nu0p_max = p - a1  # worst case of nu0 p over admissible r0
    log_t0 = SLACK_UP * max(
        4.0 * (p - a1) / a1,
        1.0 / mu4t,
        (2.0 * mu1t * (N - 1) + mu3t + 2.0 * mu1t * a2 ** 2) / mu4t,
        2.0 * nu0p_max ** (p - 1) / (mu4t * pm3 ** (p - 2)) * (N + a2 ** 2),
    )
    t0 = math.exp(log_t0)

    G_r0 = SLACK_DOWN * min(1.0, lam ** pm3)
    for _ in range(2000):
        r0 = calc.big_G_inverse(G_r0)
        nu0 = nu0_matching(calc, r0)
        C_inv = max(
            lam ** (-pm3),
            2.0 * (mu1t * (N - 1) + mu3t) / G_r0 + 2.0 * mu1t * a2 ** 2,
            2.0 * (nu0 * p) ** (p - 1) / pm3 ** (p - 2) * (N + a2 ** 2 * G_r0) / G_r0,
        )
        C_star = C_inv ** (-1.0 / pm3)
        if G_r0 < mu4t * C_star ** pm3 * log_t0:
            break
        G_r0 *= 0.5
    else:
        raise ConstructionError("subsolution r0/C* sweep did not terminate")

    Gamma = 2.0 ** (a2 * (p - 1) / (p - a2)) * G_r0 / log_t0
    params = BarrierParams(kind="sub", C_star=C_star, Gamma=Gamma, t0=t0,
                           r0=float(r0), nu0=float(nu0), mus=mus, lam=lam)
    bad = validate_barrier_params(params, calc)
    if bad:
        raise ConstructionError(f"subsolution selection failed checks: {bad}")
    return params


def eval_barrier(params: BarrierParams, calc: EnvelopeCalculus, r, t):
    """Barrier value at radius r (scalar or array) and time t >= 0.

    Continuous in (r, t); the choice of nu0 also makes the radial
    derivative continuous across r = r0.
    """
    if np.any(np.asarray(t) < 0):
        raise DomainError("eval_barrier requires t >= 0")
    p = calc.problem.p
    pm3 = _pm3(calc.problem)
    e = 1.0 / (p - 1.0)
    r_arr = np.asarray(r, dtype=float)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    tau = params.Gamma * math.log(t + params.t0)
    Ep = calc.E_root(tau)

    profile = np.empty_like(r_arr)
    inner = r_arr < params.r0
    if inner.any():
        profile[inner] = calc.cap_I(r_arr[inner], params.r0, params.nu0)
    if (~inner).any():
        profile[~inner] = calc.big_J(r_arr[~inner]) ** e
    bracket = np.maximum(Ep - profile, 0.0)
    val = params.C_star * (t + params.t0) ** (-1.0 / pm3) * bracket ** ((p - 1.0) / pm3)
    return float(val[0]) if scalar else val


def barrier_support_radius(params: BarrierParams, calc: EnvelopeCalculus, t):
    """Support edge radius G^(-1)(Gamma log(t+t0))."""
    tau = params.Gamma * np.log(np.asarray(t, dtype=float) + params.t0)
    return calc.big_G_inverse(tau)


def fit_super_above(problem: ProblemSpec, M: float, L: float,
                    calc: EnvelopeCalculus | None = None) -> BarrierParams:
    """Supersolution that additionally dominates M on the ball |x| <= L.

    r0 is pushed up to at least L, then Gamma is enlarged until the
    barrier's value at r0 and t = 0 (its minimum over the ball) clears M;
    the Gamma floor of the plain selection is preserved, so the result is
    still a certified supersolution.
    """
    if not (M > 0 and L > 0):
        raise DomainError("fit_super_above requires M, L > 0")
    calc = calc or EnvelopeCalculus(problem)
    p = problem.p
    pm3 = _pm3(problem)
    e = 1.0 / (p - 1.0)
    params = select_super(problem, calc, r0_min=L)

    log_t0 = math.log(params.t0)
    need = calc.big_J(params.r0) ** e + \
        (M * params.t0 ** (1.0 / pm3) / params.C_star) ** (pm3 / (p - 1.0))
    sigma = solve_increasing_scalar(lambda x: calc.E_root(x), need,
                                    1e-12, max(10.0, 2.0 * log_t0))
    Gamma_fit = SLACK_UP * sigma / log_t0
    if Gamma_fit > params.Gamma:
        params = replace(params, Gamma=Gamma_fit)
    assert eval_barrier(params, calc, L, 0.0) >= M * (1.0 - 1e-12)
    return params


def fit_sub_below(problem: ProblemSpec, eps: float, ell: float,
                  calc: EnvelopeCalculus | None = None) -> BarrierParams:
    """Subsolution with initial support inside |x| <= ell and peak <= eps.

    The free scale lambda is halved until both targets hold; both the
    initial support radius and the initial peak tend to 0 with lambda, so
    the sweep terminates unless lambda underflows.
    """
    if not (eps > 0 and ell > 0):
        raise DomainError("fit_sub_below requires eps, ell > 0")
    calc = calc or EnvelopeCalculus(problem)
    lam = 1.0
    while lam > 1e-300:
        params = select_sub(problem, lam, calc)
        r1 = float(barrier_support_radius(params, calc, 0.0))
        peak = float(eval_barrier(params, calc, 0.0, 0.0))
        if r1 <= ell and peak <= eps:
            return params
        lam *= 0.5
    raise ConstructionError("fit_sub_below: lambda underflow before targets met")


def validate_barrier_params(params: BarrierParams, calc: EnvelopeCalculus) -> list:
    """Re-check every defining inequality of a parameter set.

    Written independently of the selection routines (plain inequality
    transcriptions, no shared thresholds) so a selector bug cannot
    validate itself.  Returns the list of violated constraint names.
    """
    problem = calc.problem
    p, N = problem.p, problem.N
    a1, a2 = problem.weight.alpha1, problem.weight.alpha2
    pm3 = _pm3(problem)
    bad = []
    G_r0 = float(calc.big_G(params.r0))
    log_t0 = math.log(params.t0)
    nu_lo, nu_hi = 1.0 - a2 / p, 1.0 - a1 / p
    if not (nu_lo - 1e-12 <= params.nu0 <= nu_hi + 1e-12):
        bad.append("nu0_bracket")
    if abs(params.nu0 - (1.0 - calc.g(params.r0) / (p * G_r0))) > 1e-9:
        bad.append("nu0_matching")

    if params.kind == "super":
        mu1 = (p - a2) ** (p - 1) / pm3 ** (p - 2)
        mu2 = (p - a1) ** p / pm3 ** (p - 1)
        mu3 = params.mus["mu3"]
        if G_r0 < 4.0 * mu3 / (mu1 * a1 ** 2) - 1e-12:
            bad.append("r0_mu3_threshold")
        if G_r0 < 2.0 * mu2 * p * max(a2 - 1.0, 0.0) / (mu1 * a1 ** 2 * (p - a2)) - 1e-12:
            bad.append("r0_monotone_threshold")
        Cinv = params.C_star ** (-pm3)
        if Cinv > mu1 * a1 ** 2 / 4.0 + 1e-12:
            bad.append("C_star_quarter_ceiling")
        if Cinv > mu1 * (N - 1) / G_r0 + 1e-12:
            bad.append("C_star_geometry_ceiling")
        if params.Gamma < max(mu2 * a2 * params.C_star ** pm3 / (p - a2), 1.0) * (1 - 1e-12):
            bad.append("Gamma_floor")
        if not G_r0 < log_t0:
            bad.append("t0_support")
        if _super_t0_threshold(calc, params.r0, params.nu0) > \
                calc.E_root(log_t0) * (1 + 1e-12):
            bad.append("t0_inner_profile")
    else:
        mu1t = (p - a1) ** (p - 1) / pm3 ** (p - 2)
        mu2t = (p - a2) ** p / pm3 ** (p - 1)
        mu3t = params.mus["mu3t"]
        mu4t = 2.0 ** (-a2 * (p - 1) / (p - a2)) * mu2t * a1 / (p - a1)
        lam = params.lam
        if lam is None:
            bad.append("lambda_missing")
            return bad
        floor = max(4.0 * (p - a1) / a1, 1.0 / mu4t,
                    (2.0 * mu1t * (N - 1) + mu3t + 2.0 * mu1t * a2 ** 2) / mu4t,
                    2.0 * (params.nu0 * p) ** (p - 1) / (mu4t * pm3 ** (p - 2)) * (N + a2 ** 2))
        if log_t0 < floor * (1 - 1e-12):
            bad.append("t0_floor")
        if not G_r0 < min(1.0, lam ** pm3, mu4t * params.C_star ** pm3 * log_t0):
            bad.append("r0_ceiling")
        Cinv_req = max(
            lam ** (-pm3),
            2.0 * (mu1t * (N - 1) + mu3t) / G_r0 + 2.0 * mu1t * a2 ** 2,
            2.0 * (params.nu0 * p) ** (p - 1) / pm3 ** (p - 2) * (N + a2 ** 2 * G_r0) / G_r0,
        )
        if abs(params.C_star ** (-pm3) / Cinv_req - 1.0) > 1e-9:
            bad.append("C_star_equality")
        if abs(params.Gamma - 2.0 ** (a2 * (p - 1) / (p - a2)) * G_r0 / log_t0) > \
                1e-9 * params.Gamma:
            bad.append("Gamma_equality")
        if not G_r0 * params.C_star ** (-pm3) < mu4t * log_t0:
            bad.append("compatibility")
    return bad
