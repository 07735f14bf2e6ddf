"""Admissible weight exponents and the doubling condition.

The equation carries the weight f(x) = exp(g(|x|)).  The exponent g must
vanish at 0, be positive and C^1 away from 0, and obey the two-sided
doubling bound

    alpha1 * g(s)/s  <=  g'(s)  <=  alpha2 * g(s)/s,    s > 0,

for some 0 < alpha1 <= alpha2.  Two closed-form families are supported:

* ``power``:    g(s) = s**alpha                   alpha1 = alpha2 = alpha
* ``zygmund``:  g(s) = s**alpha * log(s+c)**beta  (c > 1),
                alpha1 = alpha, alpha2 = alpha + beta

Derivatives are analytic per kind; finite differences are reserved for
cross-checks in the test suite.  Tabulated exponents are out of scope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import invert_increasing
from .reports import CheckRecord, ValidationReport, make_check

__all__ = [
    "DomainError", "SpecError", "WeightSpec", "ProblemSpec",
    "eval_g", "eval_g_prime", "invert_g", "validate_doubling",
    "default_grid",
]


class DomainError(ValueError):
    """Argument outside an operation's domain."""


class SpecError(ValueError):
    """Invalid weight or problem specification."""


@dataclass(frozen=True)
class WeightSpec:
    """One admissible exponent g with its doubling exponents.

    ``alpha1``/``alpha2`` normally follow from the kind; passing explicit
    values constructs a (possibly deliberately wrong) claim that
    :func:`validate_doubling` will test, which is how negative-control
    configurations are expressed.
    """

    kind: str
    alpha: float
    beta: float = 0.0
    c: float = 0.0
    alpha1: float = 0.0
    alpha2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("power", "zygmund"):
            raise SpecError(f"unknown weight kind {self.kind!r}")
        if not self.alpha > 0:
            raise SpecError("alpha must be positive")
        if self.kind == "zygmund":
            if not self.beta > 0:
                raise SpecError("zygmund weight needs beta > 0")
            if not self.c > 1:
                raise SpecError("zygmund weight needs c > 1 so that g(0) = 0")
        a1, a2 = self.alpha1, self.alpha2
        if a1 == 0.0 and a2 == 0.0:
            a1 = self.alpha
            a2 = self.alpha if self.kind == "power" else self.alpha + self.beta
            object.__setattr__(self, "alpha1", a1)
            object.__setattr__(self, "alpha2", a2)
        if not (0 < self.alpha1 <= self.alpha2):
            raise SpecError("need 0 < alpha1 <= alpha2")

    @classmethod
    def power(cls, alpha):
        return cls(kind="power", alpha=alpha)

    @classmethod
    def zygmund(cls, alpha, beta, c):
        return cls(kind="zygmund", alpha=alpha, beta=beta, c=c)

    def to_dict(self):
        if self.kind == "power":
            d = {"kind": "power", "alpha": self.alpha}
        else:
            d = {"kind": "zygmund", "alpha": self.alpha, "beta": self.beta,
                 "c": self.c}
        derived1 = self.alpha
        derived2 = self.alpha if self.kind == "power" else self.alpha + self.beta
        if (self.alpha1, self.alpha2) != (derived1, derived2):
            d["alpha1"] = self.alpha1
            d["alpha2"] = self.alpha2
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            kind = d["kind"]
            if kind == "power":
                spec = dict(kind="power", alpha=float(d["alpha"]))
            elif kind == "zygmund":
                spec = dict(kind="zygmund", alpha=float(d["alpha"]),
                            beta=float(d["beta"]), c=float(d["c"]))
            else:
                raise SpecError(f"unknown weight kind {kind!r}")
        except KeyError as e:
            raise SpecError(f"weight spec missing field {e.args[0]!r}") from None
        if "alpha1" in d or "alpha2" in d:
            spec["alpha1"] = float(d.get("alpha1", d["alpha"]))
            spec["alpha2"] = float(d["alpha2"]) if "alpha2" in d else spec["alpha1"]
        return cls(**spec)


@dataclass(frozen=True)
class ProblemSpec:
    """Dimension, nonlinearity exponents and weight of one problem."""

    N: int
    p: float
    m: float
    weight: WeightSpec

    def __post_init__(self):
        if not (1 < self.p < self.N):
            raise SpecError(f"need 1 < p < N, got p={self.p}, N={self.N}")
        if not self.p + self.m - 3 > 0:
            raise SpecError(f"need p + m - 3 > 0, got {self.p + self.m - 3}")
        if not self.weight.alpha2 < self.p:
            raise SpecError(
                f"need alpha2 < p, got alpha2={self.weight.alpha2}, p={self.p}")

    def to_dict(self):
        return {"N": self.N, "p": self.p, "m": self.m,
                "weight": self.weight.to_dict()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(N=int(d["N"]), p=float(d["p"]), m=float(d["m"]),
                       weight=WeightSpec.from_dict(d["weight"]))
        except KeyError as e:
            raise SpecError(f"problem spec missing field {e.args[0]!r}") from None


def _as_array(s, allow_zero, what):
    arr = np.asarray(s, dtype=float)
    bad = (arr < 0) if allow_zero else (arr <= 0)
    if np.any(bad):
        raise DomainError(f"{what} requires s {'>= 0' if allow_zero else '> 0'}")
    return arr


def eval_g(spec: WeightSpec, s):
    """g(s); vectorized, s >= 0."""
    arr = _as_array(s, True, "eval_g")
    if spec.kind == "power":
        out = arr ** spec.alpha
    else:
        out = arr ** spec.alpha * np.log(arr + spec.c) ** spec.beta
    return out if out.ndim else float(out)


def eval_g_prime(spec: WeightSpec, s):
    """Analytic g'(s); vectorized, s > 0."""
    arr = _as_array(s, False, "eval_g_prime")
    if spec.kind == "power":
        out = spec.alpha * arr ** (spec.alpha - 1.0)
    else:
        # g' = s^(a-1) L^(b-1) (a L + b s/(s+c)),  L = log(s+c)
        L = np.log(arr + spec.c)
        out = arr ** (spec.alpha - 1.0) * L ** (spec.beta - 1.0) * (
            spec.alpha * L + spec.beta * arr / (arr + spec.c))
    return out if out.ndim else float(out)


def invert_g(spec: WeightSpec, y):
    """g^(-1)(y); vectorized, y >= 0, monotone in y."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0):
        raise DomainError("invert_g requires y >= 0")
    if spec.kind == "power":
        out = arr ** (1.0 / spec.alpha)
        return out if out.ndim else float(out)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    pos = arr > 0
    if pos.any():
        seed = arr[pos] ** (1.0 / spec.alpha1)
        out[pos] = invert_increasing(lambda s: eval_g(spec, s), arr[pos], seed)
    return float(out[0]) if scalar else out


def default_grid(decades=6, per_decade=64):
    """Log-spaced sample grid spanning ``decades`` decades centred at 1."""
    half = decades / 2.0
    n = int(decades * per_decade) + 1
    return np.logspace(-half, half, n)


def validate_doubling(spec: WeightSpec, grid=None, tol_rel=1e-10) -> ValidationReport:
    """Check the claimed doubling exponents against g on a sample grid.

    Scans the derivative bound alpha1 g/s <= g' <= alpha2 g/s on the grid
    and the scaling bounds lam^alpha1 g(r) <= g(lam r) <= lam^alpha2 g(r)
    (lam >= 1, with the mirrored form for lam <= 1) over grid x grid
    pairs.  Violations are relative; the report carries the worst one per
    family and passes iff all stay below ``tol_rel``.
    """
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    if grid[-1] / grid[0] < 10 ** 5.999:
        raise DomainError("validate_doubling grid must span >= 6 decades")

    g = eval_g(spec, grid)
    gp = eval_g_prime(spec, grid)
    ratio = gp * grid / g
    checks = [
        make_check("powerlike_lower", (spec.alpha1 - ratio) / spec.alpha1,
                   grid, tol_rel),
        make_check("powerlike_upper", (ratio - spec.alpha2) / spec.alpha2,
                   grid, tol_rel),
    ]

    # pair scaling: rows r_i, cols r_j = lam * r_i with lam >= 1
    gi = g[:, None]
    gj = g[None, :]
    lam = grid[None, :] / grid[:, None]
    iu = np.triu_indices(len(grid))
    lam_u = lam[iu]
    lo = lam_u ** spec.alpha1 * gi[iu[0], 0]
    hi = lam_u ** spec.alpha2 * gi[iu[0], 0]
    gval = gj[0, iu[1]]
    pair_args = (grid[iu[0]], grid[iu[1]])
    checks.append(make_check("scaling_ge1_lower", (lo - gval) / np.maximum(gval, lo),
                             pair_args, tol_rel))
    checks.append(make_check("scaling_ge1_upper", (gval - hi) / np.maximum(gval, hi),
                             pair_args, tol_rel))

    # lam <= 1 form on the mirrored pairs
    lam_d = 1.0 / lam_u
    lo_d = lam_d ** spec.alpha2 * gval
    hi_d = lam_d ** spec.alpha1 * gval
    gsmall = g[iu[0]]
    checks.append(make_check("scaling_le1_lower", (lo_d - gsmall) / np.maximum(gsmall, lo_d),
                             pair_args, tol_rel))
    checks.append(make_check("scaling_le1_upper", (gsmall - hi_d) / np.maximum(gsmall, hi_d),
                             pair_args, tol_rel))

    return ValidationReport(checks=tuple(checks), tol_rel=tol_rel)
