"""Explicit finite-volume solver for the radial weighted equation

    r^(N-1) f(r) U_t = d/dr [ r^(N-1) f(r) U^(m-1) |U_r|^(p-2) U_r ]

with zero flux at r = 0 (symmetry) and at r = r_max, plus the decay,
support and barrier-comparison measurements taken on trajectories.

The scheme is deliberately the simplest monotone one: cell-centered
uniform grid, face flux

    F_(i+1/2) = r^(N-1) f(r) |_(face) * D * (U_(i+1)-U_i)/dr,
    D = ((U_i+U_(i+1))/2)^(m-1) |(U_(i+1)-U_i)/dr|^(p-2),

explicit Euler with the p-dependent step bound
dt = cfl dr^p / max_i(m U_i^(m-1) |dU_i|^(p-2) + eps_reg) on undivided
differences dU.  Monotonicity gives a discrete comparison principle,
which is exactly the property the barrier experiments test.  The weight
is evaluated at faces so the divergence form is geometrically exact,
and the flux vanishes identically where U = 0, preserving compact
support (the regularization lives only in the step-size denominator).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._native import kernels
from .barriers import BarrierParams, barrier_support_radius, eval_barrier
from .envelope import EnvelopeCalculus
from .weights import DomainError, ProblemSpec, invert_g

__all__ = [
    "RadialGrid", "RadialSolution", "SolverError", "InstabilityError",
    "GridTooSmallError", "HorizonError", "simulate", "plan_grid",
    "measure_decay", "measure_support", "compare_to_barrier",
    "fit_decay_exponent", "DecayReport", "SupportReport", "ComparisonReport",
    "parabolic_cap",
]

EPS_REG = 1e-30
THETA_SUPP_FRAC = 1e-12   # support threshold, relative to sup u0


class SolverError(RuntimeError):
    pass


class InstabilityError(SolverError):
    """U dropped below -1e-12: the explicit step went unstable."""


class GridTooSmallError(SolverError):
    """The support expanded into the last cell."""


class HorizonError(SolverError):
    """Trajectory too short for the requested measurement."""


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    n_cells: int

    def __post_init__(self):
        if not (self.r_max > 0 and self.n_cells >= 4):
            raise DomainError("RadialGrid needs r_max > 0 and n_cells >= 4")

    @property
    def dr(self):
        return self.r_max / self.n_cells

    def centers(self):
        return (np.arange(self.n_cells) + 0.5) * self.dr

    def faces(self):
        return np.arange(self.n_cells + 1) * self.dr


def plan_grid(problem: ProblemSpec, calc: EnvelopeCalculus,
              params: BarrierParams, t_end: float, n_cells: int,
              safety: float = 1.1) -> RadialGrid:
    """Grid whose r_max strictly exceeds the barrier support at the horizon."""
    edge = float(barrier_support_radius(params, calc, t_end))
    return RadialGrid(r_max=safety * edge, n_cells=n_cells)


@dataclass
class RadialSolution:
    problem: ProblemSpec
    grid: RadialGrid
    times: np.ndarray
    fields: np.ndarray            # (n_times, n_cells)
    supnorm_history: np.ndarray
    support_history: np.ndarray   # face radius of the last cell above theta
    mass_history: np.ndarray      # discrete weighted mass sum U w_c dr
    theta_supp: float
    steps_total: int
    backend: str


def parabolic_cap(amplitude=1.0, radius=1.0):
    """Initial profile A (1 - (r/R)^2)_+ ."""
    def u0(r):
        return amplitude * np.maximum(1.0 - (r / radius) ** 2, 0.0)
    return u0


def _support_radius(U, faces, theta):
    idx = np.nonzero(U > theta)[0]
    if idx.size == 0:
        return 0.0
    return float(faces[idx[-1] + 1])


def simulate(problem: ProblemSpec, u0, grid: RadialGrid, t_end: float,
             cfl: float = 0.4, snapshot_times=None, dt_fixed: float = 0.0,
             max_steps: int = 2_000_000_000) -> RadialSolution:
    """Run the explicit scheme from data u0 up to t_end.

    u0 is a callable of radius or an array of cell values; it must be
    nonnegative, bounded, and supported strictly inside the grid.
    Snapshots default to t=0 plus ~60 geometric times up to t_end.
    ``dt_fixed`` overrides the adaptive step (used by the discrete
    comparison tests, which need two runs on one time grid).
    """
    if not t_end > 0:
        raise DomainError("simulate requires t_end > 0")
    centers = grid.centers()
    faces = grid.faces()
    U = np.array(u0(centers) if callable(u0) else u0, dtype=float)
    if U.shape != centers.shape:
        raise DomainError("u0 has the wrong number of cells")
    if np.any(U < 0) or not np.all(np.isfinite(U)):
        raise DomainError("u0 must be nonnegative and finite")

    w = problem.weight
    from .weights import eval_g
    wf = faces ** (problem.N - 1) * np.exp(eval_g(w, faces))
    wc = centers ** (problem.N - 1) * np.exp(eval_g(w, centers))

    sup0 = float(U.max())
    theta = THETA_SUPP_FRAC * sup0 if sup0 > 0 else 0.0
    nz = np.nonzero(U > 0)[0]
    hi = int(nz[-1]) + 1 if nz.size else 0

    if snapshot_times is None:
        lo = max(t_end * 1e-6, 1e-12)
        snapshot_times = np.concatenate([[0.0], np.geomspace(lo, t_end, 60)])
    snapshot_times = np.asarray(snapshot_times, dtype=float)
    if snapshot_times[0] != 0.0 or np.any(np.diff(snapshot_times) <= 0) \
            or not math.isclose(snapshot_times[-1], t_end):
        raise DomainError("snapshot times must start at 0, increase, end at t_end")

    n_snap = len(snapshot_times)
    field_rows = np.empty((n_snap, grid.n_cells))
    sup_hist = np.empty(n_snap)
    supp_hist = np.empty(n_snap)
    mass_hist = np.empty(n_snap)

    def record(k):
        field_rows[k] = U
        sup_hist[k] = U.max()
        supp_hist[k] = _support_radius(U, faces, theta)
        mass_hist[k] = float(np.sum(U * wc) * grid.dr)

    record(0)
    t = 0.0
    steps_total = 0
    for k in range(1, n_snap):
        t, steps, status, hi = kernels.fv_advance(
            U, wf, wc, grid.dr, problem.m, problem.p, cfl, EPS_REG,
            t, snapshot_times[k], max_steps - steps_total, hi, 1e-12, dt_fixed)
        steps_total += steps
        if status == kernels.NEGATIVE:
            raise InstabilityError(
                f"negative value at t={t:.6g} (min U = {U.min():.3e}); "
                f"reduce cfl or refine")
        if status == kernels.SUPPORT_HIT:
            raise GridTooSmallError(f"support reached r_max at t={t:.6g}")
        if status == kernels.MAX_STEPS:
            raise SolverError(f"step budget exhausted at t={t:.6g}")
        record(k)

    return RadialSolution(problem=problem, grid=grid, times=snapshot_times,
                          fields=field_rows, supnorm_history=sup_hist,
                          support_history=supp_hist, mass_history=mass_hist,
                          theta_supp=theta, steps_total=steps_total,
                          backend=kernels.BACKEND)


# -- measurements -------------------------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    times: np.ndarray
    ratios: np.ndarray            # ||U||_inf / envelope(t)
    band_min: float
    band_max: float

    @property
    def band_ratio(self):
        return self.band_max / self.band_min if self.band_min > 0 else math.inf

    def to_dict(self):
        return {"band_min": self.band_min, "band_max": self.band_max,
                "band_ratio": self.band_ratio,
                "times": list(map(float, self.times)),
                "ratios": list(map(float, self.ratios))}


@dataclass(frozen=True)
class SupportReport:
    times: np.ndarray
    ratios: np.ndarray            # R(t) / g^(-1)(log t)
    band_min: float
    band_max: float
    monotone: bool

    @property
    def band_ratio(self):
        return self.band_max / self.band_min if self.band_min > 0 else math.inf

    def to_dict(self):
        return {"band_min": self.band_min, "band_max": self.band_max,
                "band_ratio": self.band_ratio, "monotone": self.monotone,
                "times": list(map(float, self.times)),
                "ratios": list(map(float, self.ratios))}


@dataclass(frozen=True)
class ComparisonReport:
    kind: str
    worst_violation: float        # (U - barrier)/scale, sign per kind
    worst_location: tuple
    tol_cmp: float                # normalized tolerance C sqrt(dr)
    n_points: int

    @property
    def passed(self):
        return self.worst_violation <= self.tol_cmp

    def to_dict(self):
        return {"kind": self.kind, "worst_violation": self.worst_violation,
                "worst_location": list(self.worst_location),
                "tol_cmp": self.tol_cmp, "n_points": self.n_points,
                "pass": self.passed}


def _decay_envelope(problem, t):
    """[g^(-1)(log t)^p / (t log t)]^(1/(p+m-3)) for t > 1."""
    logt = np.log(t)
    ginv = invert_g(problem.weight, logt)
    return (ginv ** problem.p / (t * logt)) ** (1.0 / (problem.p + problem.m - 3.0))


def _late_window(times, decades=3.0):
    usable = times > 1.0
    if not usable.any() or times[-1] < 10.0 ** decades:
        raise HorizonError(
            f"need >= {decades} decades of t beyond O(1); have t_end={times[-1]:.3g}")
    return usable


def measure_decay(sol: RadialSolution, calc: EnvelopeCalculus) -> DecayReport:
    """Sup-norm ratios against the sharp decay envelope.

    Band min/max are taken over the final two decades of the run; the
    sharpness claim is that this band stays within a bounded factor,
    away from zero.
    """
    problem = sol.problem
    usable = _late_window(sol.times)
    t = sol.times[usable]
    sup = sol.supnorm_history[usable]
    ratios = sup / _decay_envelope(problem, t)
    last2 = t >= t[-1] / 100.0
    return DecayReport(times=t, ratios=ratios,
                       band_min=float(ratios[last2].min()),
                       band_max=float(ratios[last2].max()))


def measure_support(sol: RadialSolution, calc: EnvelopeCalculus) -> SupportReport:
    """Support-radius ratios against g^(-1)(log t) over the late window."""
    problem = sol.problem
    usable = _late_window(sol.times)
    t = sol.times[usable]
    R = sol.support_history[usable]
    ratios = R / invert_g(problem.weight, np.log(t))
    last2 = t >= t[-1] / 100.0
    mono = bool(np.all(np.diff(sol.support_history) >= -sol.grid.dr * 0.5))
    return SupportReport(times=t, ratios=ratios,
                         band_min=float(ratios[last2].min()),
                         band_max=float(ratios[last2].max()),
                         monotone=mono)


def fit_decay_exponent(sol: RadialSolution, decades: float = 1.0) -> float:
    """Least-squares slope of log ||U||_inf vs log t over the last decade(s)."""
    sel = (sol.times >= sol.times[-1] / 10.0 ** decades) & (sol.supnorm_history > 0)
    if sel.sum() < 3:
        raise HorizonError("not enough late snapshots to fit an exponent")
    return float(np.polyfit(np.log(sol.times[sel]),
                            np.log(sol.supnorm_history[sel]), 1)[0])


def compare_to_barrier(sol: RadialSolution, params: BarrierParams,
                       calc: EnvelopeCalculus, c_tol: float = 1.0) -> ComparisonReport:
    """Nodewise ordering of the trajectory against a barrier.

    Super: U <= barrier everywhere; sub: U >= barrier.  Violations are
    normalized by the larger of the two sup norms at each snapshot time,
    and tolerated up to the discretization scale c_tol * sqrt(dr).
    """
    centers = sol.grid.centers()
    worst = -math.inf
    worst_loc = (math.nan, math.nan)
    n = 0
    sign = 1.0 if params.kind == "super" else -1.0
    for k, t in enumerate(sol.times):
        ub = eval_barrier(params, calc, centers, float(t))
        U = sol.fields[k]
        scale = max(float(ub.max()), float(U.max()), 1e-300)
        v = sign * (U - ub) / scale
        n += v.size
        j = int(np.argmax(v))
        if v[j] > worst:
            worst = float(v[j])
            worst_loc = (float(centers[j]), float(t))
    return ComparisonReport(kind=params.kind, worst_violation=worst,
                            worst_location=worst_loc,
                            tol_cmp=c_tol * math.sqrt(sol.grid.dr), n_points=n)
