import math

import numpy as np
import pytest

from barrierlab import barriers as B
from barrierlab import solver as S
from barrierlab.weights import ProblemSpec, WeightSpec


def snaps(t_end, n=25):
    return np.concatenate([[0.0], np.geomspace(t_end * 1e-4, t_end, n)])


class TestSimulateBasics:
    def test_zero_data_stays_zero(self, stock_problem):
        grid = S.RadialGrid(4.0, 50)
        sol = S.simulate(stock_problem, lambda r: np.zeros_like(r), grid, 5.0)
        assert np.all(sol.fields == 0.0)
        assert np.all(sol.support_history == 0.0)
        assert sol.steps_total <= len(sol.times)

    def test_constant_data_stays_constant(self, stock_problem):
        grid = S.RadialGrid(4.0, 50)
        sol = S.simulate(stock_problem, lambda r: np.full_like(r, 0.7), grid, 2.0)
        assert np.allclose(sol.fields, 0.7, rtol=0, atol=1e-14)

    def test_mass_conservation(self, stock_problem):
        grid = S.RadialGrid(8.0, 400)
        sol = S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid, 10.0,
                         snapshot_times=snaps(10.0))
        drift = np.abs(sol.mass_history / sol.mass_history[0] - 1.0)
        assert drift.max() <= 1e-6

    def test_nonnegativity(self, stock_problem):
        grid = S.RadialGrid(8.0, 300)
        sol = S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid, 20.0)
        assert sol.fields.min() >= 0.0

    def test_initial_support_recorded(self, stock_problem):
        grid = S.RadialGrid(8.0, 400)
        sol = S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid, 1.0)
        assert sol.support_history[0] == pytest.approx(1.0, abs=2 * grid.dr)

    def test_grid_too_small(self, stock_problem):
        grid = S.RadialGrid(1.6, 80)
        with pytest.raises(S.GridTooSmallError):
            S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid, 200.0)

    def test_unstable_cfl_aborts(self, stock_problem):
        grid = S.RadialGrid(4.0, 100)
        with pytest.raises(S.InstabilityError):
            S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid, 5.0,
                       cfl=20.0)

    def test_bad_u0_rejected(self, stock_problem):
        grid = S.RadialGrid(4.0, 50)
        with pytest.raises(Exception):
            S.simulate(stock_problem, lambda r: -np.ones_like(r), grid, 1.0)


class TestSchemeProperties:
    def test_discrete_comparison(self, stock_problem):
        """Monotone scheme: ordered data stay ordered (same fixed dt)."""
        grid = S.RadialGrid(6.0, 150)
        dt = 0.2 * grid.dr ** 2 / (2.0 * 1.5)  # stable for sup u0 <= 1.5
        pairs = [
            (S.parabolic_cap(0.5, 1.0), S.parabolic_cap(1.0, 1.0)),
            (S.parabolic_cap(1.0, 0.8), S.parabolic_cap(1.0, 1.2)),
            (S.parabolic_cap(0.7, 0.9), S.parabolic_cap(1.5, 1.3)),
        ]
        for ua, ub in pairs:
            sa = S.simulate(stock_problem, ua, grid, 2.0, dt_fixed=dt,
                            snapshot_times=snaps(2.0, 10))
            sb = S.simulate(stock_problem, ub, grid, 2.0, dt_fixed=dt,
                            snapshot_times=snaps(2.0, 10))
            assert np.all(sa.fields <= sb.fields + 1e-13)

    def test_refinement_cauchy(self, stock_problem):
        """Coarse-fine sup distance at t=1 shrinks when dr halves."""
        diffs = []
        sols = {}
        for n in (100, 200, 400):
            grid = S.RadialGrid(4.0, n)
            sols[n] = S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0),
                                 grid, 1.0)
        for n in (100, 200):
            coarse = sols[n].fields[-1]
            fine = sols[2 * n].fields[-1]
            fine_avg = 0.5 * (fine[0::2] + fine[1::2])
            diffs.append(np.abs(coarse - fine_avg).max())
        assert diffs[1] < diffs[0]

    def test_backend_parity(self, stock_problem):
        from barrierlab import _kernels_py
        from barrierlab._native import kernels
        if kernels.BACKEND == "python":
            pytest.skip("compiled backend not built")
        grid = S.RadialGrid(4.0, 120)
        centers = grid.centers()
        faces = grid.faces()
        wf = faces ** 2 * np.exp(faces)
        wc = centers ** 2 * np.exp(centers)
        Ua = S.parabolic_cap(1.0, 1.0)(centers)
        Ub = Ua.copy()
        args = (grid.dr, 2.0, 2.0, 0.4, 1e-30, 0.0, 0.5, 10 ** 9)
        hi = int(np.nonzero(Ua > 0)[0][-1]) + 1
        ra = kernels.fv_advance(Ua, wf, wc, *args, hi, 1e-12)
        rb = _kernels_py.fv_advance(Ub, wf, wc, *args, hi, 1e-12)
        assert ra[1:] == rb[1:]            # steps, status, hi
        assert ra[0] == pytest.approx(rb[0], rel=1e-15)
        assert np.allclose(Ua, Ub, rtol=1e-12, atol=1e-300)


class TestMeasurements:
    @pytest.fixture(scope="class")
    def medium_sol(self, stock_problem):
        grid = S.RadialGrid(16.0, 600)
        return S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid,
                          2000.0, snapshot_times=snaps(2000.0, 50))

    def test_decay_band(self, medium_sol, stock_calc):
        rep = S.measure_decay(medium_sol, stock_calc)
        assert rep.band_min > 0
        assert rep.band_ratio <= 10.0

    def test_support_band(self, medium_sol, stock_calc):
        rep = S.measure_support(medium_sol, stock_calc)
        assert rep.band_ratio <= 5.0
        assert rep.monotone

    def test_decay_zero_data(self, stock_problem, stock_calc):
        grid = S.RadialGrid(4.0, 50)
        sol = S.simulate(stock_problem, lambda r: np.zeros_like(r), grid,
                         2000.0, snapshot_times=snaps(2000.0, 20))
        ratios = sol.supnorm_history
        assert np.all(ratios == 0.0)

    def test_horizon_too_short(self, stock_problem, stock_calc):
        grid = S.RadialGrid(6.0, 100)
        sol = S.simulate(stock_problem, S.parabolic_cap(1.0, 1.0), grid, 5.0)
        with pytest.raises(S.HorizonError):
            S.measure_decay(sol, stock_calc)

    def test_doubled_data_same_exponent(self, stock_problem, medium_sol):
        grid = S.RadialGrid(16.0, 600)
        sol2 = S.simulate(stock_problem, S.parabolic_cap(2.0, 1.0), grid,
                          2000.0, snapshot_times=snaps(2000.0, 50))
        e1 = S.fit_decay_exponent(medium_sol)
        e2 = S.fit_decay_exponent(sol2)
        assert abs(e1 - e2) <= 0.05

    def test_comparison_ordering(self, medium_sol, stock_problem, stock_calc):
        sup = B.fit_super_above(stock_problem, M=1.0, L=1.0, calc=stock_calc)
        sub = B.fit_sub_below(stock_problem, eps=0.75, ell=0.5, calc=stock_calc)
        rs = S.compare_to_barrier(medium_sol, sup, stock_calc)
        rb = S.compare_to_barrier(medium_sol, sub, stock_calc)
        assert rs.passed and rb.passed
        # ordering is strict here, not merely within tolerance
        assert rs.worst_violation <= 0.0
        assert rb.worst_violation <= 0.0

    def test_plan_grid_exceeds_support(self, stock_problem, stock_calc):
        sup = B.select_super(stock_problem, stock_calc)
        grid = S.plan_grid(stock_problem, stock_calc, sup, 1e4, 500)
        edge = float(B.barrier_support_radius(sup, stock_calc, 1e4))
        assert grid.r_max > edge
