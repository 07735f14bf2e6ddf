"""Acceptance suite: one test per criterion, each at its stated
tolerance, printing one PASS/FAIL line (run with `pytest -s` to see the
lines as they complete).

1. Sandwich/doubling inequalities for the three stock weights, <= 1e-6
   over six decades, under 5 s.
2. Barrier certification for N=3, p=2, m=2, power(1): residual signs at
   tol 1e-8 on the standard grid, hand-derived constants recovered up to
   the recorded slack factors, under 30 s.
3. Desk-scale comparison: the fitted supersolution dominates the
   4000-cell trajectory and the fitted subsolution is dominated by it,
   nodewise to t = 1e4 * t0, within the discretization tolerance,
   under 10 min.
4. Sup-norm ratio against the sharp decay envelope within a factor-10
   band over the final two decades.
5. Support-radius ratio against g^(-1)(log t) within a factor-5 band.
6. Transform: shooting consistency to 1e-8, rho(0)=1 to 1e-3, density
   envelope band <= 10 on [1e3, 1e8], plug-back residual <= 1e-6,
   under 10 s.
7. Negative controls: corrupting C* flips the certification; alpha2 >= p
   is rejected at config load.
"""
import dataclasses
import json
import math
import time

import numpy as np
import pytest

from barrierlab import barriers as B
from barrierlab import residual as R
from barrierlab import solver as S
from barrierlab import transform as T
from barrierlab.cli import main as cli_main
from barrierlab.envelope import EnvelopeCalculus
from barrierlab.weights import ProblemSpec, SpecError, WeightSpec, validate_doubling


def report(num, name, ok, extra=""):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} {extra}")
    assert ok, f"criterion {num} ({name}) failed: {extra}"


STOCK_WEIGHTS = [
    ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.0)),
    ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.5)),
    ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.zygmund(0.5, 0.5, 2.0)),
]


def test_criterion_1_lemma_suite():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for prob in STOCK_WEIGHTS:
        doubling = validate_doubling(prob.weight, tol_rel=1e-6)
        lemmas = EnvelopeCalculus(prob).lemma_suite(tol_rel=1e-6)
        ok &= doubling.passed and lemmas.passed
        worst = max(worst, doubling.worst.max_violation,
                    lemmas.worst.max_violation)
    wall = time.perf_counter() - t0
    ok &= wall < 5.0
    report(1, "lemma suite", ok, f"worst={worst:.2e} wall={wall:.2f}s")


@pytest.fixture(scope="module")
def stock():
    prob = ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.0))
    return prob, EnvelopeCalculus(prob)


def test_criterion_2_barrier_certification(stock):
    prob, calc = stock
    t0 = time.perf_counter()
    sup = B.select_super(prob, calc)
    sub = B.select_sub(prob, 1.0, calc)

    up, dn = B.SLACK_UP, B.SLACK_DOWN
    hand = (
        abs(sup.r0 - 1.0) <= 1e-9,
        abs(sup.nu0 - 0.5) <= 1e-12,
        abs(sup.C_star - 4.0 / dn) <= 1e-9,                   # C* = 4 x slack
        abs(sup.Gamma - up * sup.C_star) <= 1e-9,             # Gamma = 4 x slack
        abs(math.log(sub.t0) - 16.0 * up) <= 1e-9,            # log t0 = 16 x slack
        abs(sub.mus["mu4t"] - 0.5) <= 1e-15,
    )
    rep_sup = R.verify(sup, calc, tol_residual=1e-8)
    rep_sub = R.verify(sub, calc, tol_residual=1e-8)
    wall = time.perf_counter() - t0
    ok = all(hand) and rep_sup.passed and rep_sub.passed and wall < 30.0
    report(2, "barrier certification", ok,
           f"hand={all(hand)} super_worst={rep_sup.worst_value:.2e} "
           f"sub_worst={rep_sub.worst_value:.2e} wall={wall:.1f}s")


@pytest.fixture(scope="module")
def desk_run(stock):
    """The shared desk-scale experiment behind criteria 3-5."""
    prob, calc = stock
    sup = B.fit_super_above(prob, M=1.0, L=1.0, calc=calc)
    sub = B.fit_sub_below(prob, eps=0.75, ell=0.5, calc=calc)
    t_end = 1e4 * sup.t0
    grid = S.plan_grid(prob, calc, sup, t_end, 4000)
    snaps = np.concatenate([[0.0], np.geomspace(t_end * 1e-6, t_end, 80)])
    t0 = time.perf_counter()
    sol = S.simulate(prob, S.parabolic_cap(1.0, 1.0), grid, t_end,
                     snapshot_times=snaps)
    wall = time.perf_counter() - t0
    return sol, sup, sub, wall


def test_criterion_3_comparison(stock, desk_run):
    prob, calc = stock
    sol, sup, sub, wall = desk_run
    rs = S.compare_to_barrier(sol, sup, calc)
    rb = S.compare_to_barrier(sol, sub, calc)
    ok = rs.passed and rb.passed and wall < 600.0
    report(3, "desk-scale comparison", ok,
           f"super_worst={rs.worst_violation:.2e} sub_worst={rb.worst_violation:.2e} "
           f"tol={rs.tol_cmp:.2e} sim_wall={wall:.1f}s")


def test_criterion_4_decay_rate(stock, desk_run):
    prob, calc = stock
    sol = desk_run[0]
    rep = S.measure_decay(sol, calc)
    ok = rep.band_min > 0 and rep.band_ratio <= 10.0
    report(4, "sharp decay rate", ok,
           f"band=[{rep.band_min:.3f},{rep.band_max:.3f}] ratio={rep.band_ratio:.2f}")


def test_criterion_5_support_rate(stock, desk_run):
    prob, calc = stock
    sol = desk_run[0]
    rep = S.measure_support(sol, calc)
    ok = rep.band_ratio <= 5.0
    report(5, "support rate", ok,
           f"band=[{rep.band_min:.3f},{rep.band_max:.3f}] ratio={rep.band_ratio:.2f}")


def test_criterion_6_transform(stock):
    prob, calc = stock
    t0 = time.perf_counter()
    res = T.build_transform(prob)
    beta = res.beta
    shoot_err = abs(T.blowup_time(prob, res.r_star) - 1.0 / beta)
    rho0_err = abs(res.rho0 - 1.0)
    rep = T.asymptotics_report(res, calc, s_lo=1e3, s_hi=1e8, bound_factor=10.0)
    lo, hi = rep.bands["rho_vs_envelope"]

    # plug-back: numerical d r_hat/ds versus the ODE right-hand side
    u = np.log(res.s)
    du = u[2] - u[1]
    r = res.r_hat
    drdu = (r[:-4] - 8 * r[1:-3] + 8 * r[3:-1] - r[4:]) / (12 * du)
    resid = np.abs(drdu / res.s[2:-2] - res.r_hat_s[2:-2]) / res.r_hat_s[2:-2]
    wall = time.perf_counter() - t0

    ok = (shoot_err <= 1e-8 and rho0_err <= 1e-3 and hi / lo <= 10.0
          and resid.max() <= 1e-6 and wall < 10.0)
    report(6, "density transform", ok,
           f"|z1(r*)-1/beta|={shoot_err:.1e} |rho0-1|={rho0_err:.1e} "
           f"band={hi / lo:.2f} plugback={resid.max():.1e} wall={wall:.1f}s")


def test_criterion_7_negative_controls(stock, tmp_path):
    prob, calc = stock
    sup = B.select_super(prob, calc)
    bad = dataclasses.replace(sup, C_star=sup.C_star * 1e-2)
    flipped = not R.verify(bad, calc,
                           R.ResidualGridSpec(n_r_inner=60, n_r_outer=60,
                                              n_t=10)).passed

    rejected = False
    try:
        ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(2.5))
    except SpecError:
        rejected = True

    # and the same through the CLI config loader
    from click.testing import CliRunner
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"problem": {"N": 3, "p": 2.0, "m": 2.0,
                                           "weight": {"kind": "power",
                                                      "alpha": 2.5}}}))
    code = CliRunner().invoke(cli_main, ["verify-lemmas", "--config",
                                         str(cfg)]).exit_code
    ok = flipped and rejected and code == 2
    report(7, "negative controls", ok,
           f"corrupt_C*_flips={flipped} alpha2>=p_rejected={rejected} cli_exit={code}")
