import math

import numpy as np
import pytest

from barrierlab.envelope import (
    EnvelopeCalculus, ratio_second_constants, second_derivative_constants,
)
from barrierlab.weights import DomainError, ProblemSpec, WeightSpec

# frozen oracles
ZYG_E_G1 = 1.1647952402514237       # (1+e)log(1+e) - (1+e) + e  (closed form)
ZYG_HALF_G1 = 1.8275556907582235    # 30-digit quadrature of sqrt(log(s+2))/sqrt(s)


@pytest.fixture(scope="module")
def calc_e():
    prob = ProblemSpec(N=3, p=2.0, m=2.0,
                       weight=WeightSpec.zygmund(1.0, 1.0, float(np.e)))
    return EnvelopeCalculus(prob)


class TestBigG:
    def test_power_closed_forms(self, stock_calc):
        assert stock_calc.big_G(2.0) == pytest.approx(2.0, rel=1e-15)
        calc2 = EnvelopeCalculus(
            ProblemSpec(N=4, p=2.5, m=2.0, weight=WeightSpec.power(2.0)))
        assert calc2.big_G(3.0) == pytest.approx(4.5, rel=1e-15)

    def test_zygmund_against_frozen_quadrature(self, calc_e, zygmund_calc):
        assert calc_e.big_G(1.0) == pytest.approx(ZYG_E_G1, rel=1e-12)
        assert zygmund_calc.big_G(1.0) == pytest.approx(ZYG_HALF_G1, rel=1e-12)

    def test_zygmund_against_trapezoid_oracle(self, calc_e):
        # brute-force oracle: 1e6-point trapezoid of g(s)/s = log(s+e) on [0,1]
        s = np.linspace(0.0, 1.0, 1_000_001)
        oracle = np.trapezoid(np.log(s + np.e), s)
        assert calc_e.big_G(1.0) == pytest.approx(oracle, rel=1e-8)

    def test_domain(self, stock_calc):
        with pytest.raises(DomainError):
            stock_calc.big_G(0.0)


class TestBigGInverse:
    def test_power(self, stock_calc):
        assert stock_calc.big_G_inverse(5.0) == pytest.approx(5.0, rel=1e-14)
        calc2 = EnvelopeCalculus(
            ProblemSpec(N=4, p=2.5, m=2.0, weight=WeightSpec.power(2.0)))
        assert calc2.big_G_inverse(2.0) == pytest.approx(2.0, rel=1e-14)

    def test_zygmund_round_trip(self, zygmund_calc):
        tau = np.logspace(-6, 6, 25)
        r = zygmund_calc.big_G_inverse(tau)
        assert np.allclose(zygmund_calc.big_G(r), tau, rtol=1e-8)

    def test_inverse_derivative_sandwich(self, zygmund_calc):
        # finite-difference (G^-1)' against the scaling exponents
        a1, a2 = 0.5, 1.0
        tau = np.logspace(-2, 3, 15)
        h = 1e-6 * tau
        d = (zygmund_calc.big_G_inverse(tau + h)
             - zygmund_calc.big_G_inverse(tau - h)) / (2 * h)
        ginv = zygmund_calc.big_G_inverse(tau)
        assert np.all(d >= ginv / (tau * a2) * (1 - 1e-4))
        assert np.all(d <= ginv / (tau * a1) * (1 + 1e-4))


class TestJ:
    def test_power_one(self, stock_calc):
        r = np.array([0.5, 1.0, 2.0, 7.0])
        assert np.allclose(stock_calc.big_J(r), r, rtol=1e-14)
        assert np.allclose(stock_calc.big_J_prime(r), 1.0, rtol=1e-13)
        assert np.allclose(stock_calc.big_J_second(r), 0.0, atol=1e-13)

    def test_power_general(self):
        # J = alpha r^(p-alpha)
        calc = EnvelopeCalculus(
            ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.5)))
        r = np.logspace(-2, 2, 21)
        assert np.allclose(calc.big_J(r), 1.5 * r ** 0.5, rtol=1e-13)
        assert np.allclose(calc.big_J_prime(r), 0.75 * r ** -0.5, rtol=1e-12)

    def test_zygmund_prime_vs_finite_difference(self, calc_e):
        r = np.logspace(-1, 2, 13)
        h = 1e-6 * r
        fd = (calc_e.big_J(r + h) - calc_e.big_J(r - h)) / (2 * h)
        assert np.allclose(calc_e.big_J_prime(r), fd, rtol=1e-5)

    def test_zygmund_second_vs_finite_difference(self, calc_e):
        r = np.logspace(-1, 2, 13)
        h = 1e-4 * r
        fd = (calc_e.big_J(r + h) - 2 * calc_e.big_J(r) + calc_e.big_J(r - h)) / h ** 2
        assert np.allclose(calc_e.big_J_second(r), fd, rtol=1e-4, atol=1e-12)

    def test_G_second_vs_finite_difference(self, zygmund_calc):
        r = np.logspace(-1, 1, 9)
        h = 1e-4 * r
        fd = (zygmund_calc.G_prime(r + h) - zygmund_calc.G_prime(r - h)) / (2 * h)
        assert np.allclose(zygmund_calc.G_second(r), fd, rtol=1e-4)


class TestE:
    def test_power_one_identity(self, stock_calc):
        assert stock_calc.big_E(7.0) == pytest.approx(7.0, rel=1e-14)

    def test_composition_identity(self):
        # E(tau) = J(G^-1(tau)) for a non-trivial power
        calc = EnvelopeCalculus(
            ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.5)))
        tau = np.logspace(-3, 3, 31)
        lhs = calc.big_E(tau)
        rhs = calc.big_J(calc.big_G_inverse(tau))
        assert np.allclose(lhs, rhs, rtol=1e-8)
        assert np.allclose(lhs, (1.5 * tau) ** (4.0 / 3.0) / tau, rtol=1e-12)

    def test_composition_identity_zygmund(self, zygmund_calc):
        tau = np.logspace(-2, 4, 25)
        assert np.allclose(zygmund_calc.big_E(tau),
                           zygmund_calc.big_J(zygmund_calc.big_G_inverse(tau)),
                           rtol=1e-8)

    def test_monotone(self, zygmund_calc):
        tau = np.logspace(-3, 5, 1000)
        assert np.all(np.diff(zygmund_calc.big_E(tau)) > 0)


class TestCapI:
    def test_matching_value(self, stock_calc):
        for nu0 in (0.25, 0.5, 0.9):
            assert stock_calc.cap_I(1.0, 1.0, nu0) == pytest.approx(
                stock_calc.big_J(1.0), rel=1e-14)

    def test_stock_closed_form(self, stock_calc):
        r = np.linspace(0.0, 1.0, 11)
        assert np.allclose(stock_calc.cap_I(r, 1.0, 0.5), 0.5 * r ** 2 + 0.5,
                           rtol=1e-14)

    def test_matched_derivative(self, stock_calc):
        # with nu0 from the matching formula, I'(r0) = d/dr J^(1/(p-1)) at r0
        from barrierlab.barriers import nu0_matching
        r0 = 1.0
        nu0 = nu0_matching(stock_calc, r0)
        h = 1e-6
        dI = (stock_calc.cap_I(r0, r0, nu0) - stock_calc.cap_I(r0 - h, r0, nu0)) / h
        dJ = (stock_calc.big_J(r0 + h) - stock_calc.big_J(r0)) / h
        assert dI == pytest.approx(dJ, rel=1e-5)


class TestConstants:
    def test_eta_cases(self):
        assert second_derivative_constants(1.0, 1.0) == (0.0, 0.0)
        assert second_derivative_constants(0.5, 0.5) == (-0.25, -0.25)
        eta1, eta2 = second_derivative_constants(0.5, 1.5)
        assert eta1 == (0.5 - 1) * 1.5 and eta2 == (1.5 - 1) * 1.5

    def test_c_cases(self):
        assert ratio_second_constants(2.0, 1.0, 1.0) == (0.0, 0.0)
        c1, c2 = ratio_second_constants(2.0, 1.5, 1.5)
        assert c1 == pytest.approx(-0.25) and c2 == pytest.approx(-0.25)

    def test_ordering(self):
        for p, a1, a2 in ((2.0, 0.5, 1.5), (1.5, 0.2, 1.2), (3.0, 1.1, 2.5)):
            eta1, eta2 = second_derivative_constants(a1, a2)
            c1, c2 = ratio_second_constants(p, a1, a2)
            assert eta1 <= eta2 and c1 <= c2


class TestLemmaSuite:
    def test_stock_tight_equalities(self, stock_calc):
        rep = stock_calc.lemma_suite()
        assert rep.passed
        assert rep.worst.max_violation <= 1e-12
        assert stock_calc.eta1 == stock_calc.eta2 == 0.0
        assert stock_calc.c1 == stock_calc.c2 == 0.0

    def test_power_half_exact_second_derivative(self):
        calc = EnvelopeCalculus(
            ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(0.5)))
        assert calc.eta1 == calc.eta2 == -0.25
        r = np.logspace(-2, 2, 9)
        assert np.allclose(r ** 2 * calc.G_second(r), -0.25 * calc.big_G(r),
                           rtol=1e-13)
        assert calc.lemma_suite().passed

    def test_zygmund_passes(self, zygmund_calc):
        rep = zygmund_calc.lemma_suite()
        assert rep.passed
        assert rep.worst.max_violation <= 1e-8

    def test_report_serialization(self, stock_calc):
        d = stock_calc.lemma_suite().to_dict()
        assert d["pass"] is True
        assert {c["name"] for c in d["checks"]} >= {
            "G_vs_g_lower", "Gsecond_upper", "Jsecond_lower", "Ginv_scaling_upper"}


class TestPhiMonotone:
    def test_zero_when_alpha2_below_one(self, stock_calc, zygmund_calc):
        assert stock_calc.phi_monotone_radius(1.0, 1.0) == 0.0
        assert zygmund_calc.phi_monotone_radius(2.0, 3.0) == 0.0

    def test_power_value(self):
        calc = EnvelopeCalculus(
            ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.5)))
        r1 = calc.phi_monotone_radius(1.0, 1.0)
        # G(r1) = 2*0.5/0.5 = 2  ->  r1 = (1.5*2)^(2/3)
        assert r1 == pytest.approx(3.0 ** (2.0 / 3.0), rel=1e-12)

    def test_monotone_beyond_radius(self):
        calc = EnvelopeCalculus(
            ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.5)))
        d1, d2 = 0.7, 1.3
        r1 = calc.phi_monotone_radius(d1, d2)
        r = np.geomspace(r1 * 1.0001, r1 * 1e3, 1000)
        e = 1.0 / (calc.problem.p - 1.0)
        phi = calc.big_J(r) ** e * (d1 + d2 / calc.big_G(r))
        assert np.all(np.diff(phi) >= -1e-12 * phi[:-1])
