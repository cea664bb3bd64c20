import cmath
import math

import numpy as np
import pytest

from angiodelay import (
    CharFunction,
    DiracKernel,
    ErlangKernel,
    ModelParams,
    Polynomial,
    TentKernel,
    aux_function_erlang,
    aux_function_tent,
    derived_rates,
    erlang_reduced_poly,
    erlang_shifted_char,
    hodograph_points,
    tent_char_parts,
    tent_g1,
)


def params_for(beta, gamma, r=None):
    """Parameters realising given (beta, gamma) with alpha = 0 (so beta = r)."""
    r = beta if r is None else r
    b_minus_mu = 1.5 * gamma / r
    return ModelParams(r=r, b=b_minus_mu + 0.25, a_H=1.0, mu=0.25, alpha=0.0)


# full parameter set with a nontrivial alpha*b split: beta=2, gamma=0.5
FULL = ModelParams(r=0.5, b=1.5, a_H=1.0, mu=0.0, alpha=1.0)


class TestPolynomial:
    def test_trim_and_degree(self):
        p = Polynomial([1.0, 2.0, 0.0, 0.0])
        assert p.degree == 1

    def test_eval_and_derivative(self):
        p = Polynomial([1.0, -3.0, 2.0])  # 1 - 3x + 2x^2
        assert p(2.0) == pytest.approx(3.0)
        assert p.derivative()(2.0) == pytest.approx(5.0)

    def test_roots_companion(self):
        p = Polynomial([-6.0, 11.0, -6.0, 1.0])  # (x-1)(x-2)(x-3)
        assert sorted(np.real(p.roots())) == pytest.approx([1.0, 2.0, 3.0])

    def test_descartes(self):
        assert Polynomial([-1.0, -4.0, 1.0, 1.0]).descartes_sign_changes() == 1
        assert Polynomial([1.0, -1.0, 1.0]).descartes_sign_changes() == 2

    def test_shifted_monomial_power(self):
        p = Polynomial.shifted_monomial_power(2.0, 3)  # (2+x)^3
        assert list(p.coeffs) == pytest.approx([8.0, 12.0, 6.0, 1.0])


class TestCharFunction:
    def test_value_at_zero_is_gamma(self):
        for k1, k2 in [
            (ErlangKernel(m=2, a=1.0), ErlangKernel(m=1, a=1.0)),
            (TentKernel(sigma=1.0, epsilon=0.5), TentKernel(sigma=2.0, epsilon=1.0)),
            (DiracKernel(sigma=0.7), DiracKernel(sigma=0.7)),
        ]:
            cf = CharFunction(FULL, k1, k2)
            assert cf(0.0) == pytest.approx(cf.gamma, abs=1e-14)

    def test_zero_delay_is_quadratic(self):
        cf = CharFunction(FULL, DiracKernel(sigma=0.0), DiracKernel(sigma=0.0))
        for lam in (0.3, 1j, 1.0 + 2.0j):
            expected = lam * lam + cf.beta * lam + cf.gamma
            assert cf(lam) == pytest.approx(expected, abs=1e-13)

    def test_erlang_hand_value(self):
        # beta=2, gamma=1, m1=m2=1, a=1, lambda=1: 1 + 2*(1/2) + 1*(1/2)
        params = params_for(beta=2.0, gamma=1.0)
        cf = CharFunction(params, ErlangKernel(m=1, a=1.0), ErlangKernel(m=1, a=1.0))
        assert cf(1.0) == pytest.approx(2.5, abs=1e-14)


class TestReducedPolynomial:
    def test_equal_m1_cubic(self):
        params = params_for(beta=2.0, gamma=1.0)
        poly = erlang_reduced_poly(params, 1, 1, a=1.0)
        assert list(poly.coeffs) == pytest.approx([1.0, 2.0, 1.0, 1.0])

    def test_equal_m2_quartic(self):
        params = params_for(beta=2.0, gamma=1.0)
        poly = erlang_reduced_poly(params, 2, 2, a=1.0)
        assert list(poly.coeffs) == pytest.approx([1.0, 2.0, 1.0, 2.0, 1.0])

    def test_equal_m3_quintic(self):
        rates = derived_rates(FULL)
        a = 1.3
        poly = erlang_reduced_poly(FULL, 3, 3, a)
        expected = [rates.gamma * a**3, rates.beta * a**3, a**3, 3 * a**2, 3 * a, 1.0]
        assert list(poly.coeffs) == pytest.approx(expected)

    def test_mixed_12_quartic(self):
        a = 0.8
        rates = derived_rates(FULL)
        poly = erlang_reduced_poly(FULL, 1, 2, a)
        expected = [rates.gamma * a**2, a**2 * rates.beta + rates.gamma * a,
                    a * (a + FULL.r), 2 * a, 1.0]
        assert list(poly.coeffs) == pytest.approx(expected)

    def test_mixed_21_quartic(self):
        a = 0.8
        rates = derived_rates(FULL)
        ab = FULL.alpha * FULL.b
        poly = erlang_reduced_poly(FULL, 2, 1, a)
        expected = [rates.gamma * a**2, a**2 * rates.beta, a * (a + ab), 2 * a, 1.0]
        assert list(poly.coeffs) == pytest.approx(expected)

    @pytest.mark.parametrize("m1,m2", [(1, 1), (2, 2), (3, 3), (1, 2), (2, 1), (3, 1)])
    def test_cross_evaluation_oracle(self, m1, m2):
        # reduced polynomial equals W(lambda)*(a+lambda)**mM pointwise
        a = 1.1
        lam = 0.7 + 0.3j
        poly = erlang_reduced_poly(FULL, m1, m2, a)
        cf = CharFunction(FULL, ErlangKernel(m=m1, a=a), ErlangKernel(m=m2, a=a))
        m_max = max(m1, m2)
        assert poly(lam) == pytest.approx(cf(lam) * (a + lam) ** m_max, abs=1e-10)

    @pytest.mark.parametrize("m1,m2", [(1, 1), (2, 2), (3, 3), (1, 2), (2, 1)])
    def test_roots_annihilate_char_function(self, m1, m2):
        a = 0.9
        poly = erlang_reduced_poly(FULL, m1, m2, a)
        cf = CharFunction(FULL, ErlangKernel(m=m1, a=a), ErlangKernel(m=m2, a=a))
        m_max = max(m1, m2)
        for root in poly.roots():
            assert abs(cf(root) * (a + root) ** m_max) < 1e-8


class TestShiftedForm:
    def test_zero_shift_matches_reduced_poly(self):
        a = 1.2
        poly = erlang_reduced_poly(FULL, 2, 1, a)
        for lam in (0.5, 1j, -0.3 + 1.7j):
            assert erlang_shifted_char(FULL, 2, 1, a, 0.0, lam) == \
                pytest.approx(poly(lam), abs=1e-12)

    def test_value_at_zero(self):
        rates = derived_rates(FULL)
        a = 1.2
        val = erlang_shifted_char(FULL, 2, 3, a, 1.5, 0.0)
        assert val == pytest.approx(rates.gamma * a**3, abs=1e-13)

    def test_hand_value_m1(self):
        # m1=m2=1, a=1, sigma=1, lambda=i: i^2(1+i) + (i*beta+gamma)e^{-i}
        params = params_for(beta=2.0, gamma=1.0)
        expected = (1j) ** 2 * (1 + 1j) + (2j + 1.0) * cmath.exp(-1j)
        assert erlang_shifted_char(params, 1, 1, 1.0, 1.0, 1j) == \
            pytest.approx(expected, abs=1e-13)

    @pytest.mark.parametrize("sigma", [0.0, 0.4, 2.0])
    def test_cross_evaluation_vs_kernels(self, sigma):
        a = 0.9
        cf = CharFunction(FULL, ErlangKernel(m=1, a=a, sigma=sigma),
                          ErlangKernel(m=2, a=a, sigma=sigma))
        for lam in (0.3 + 0.2j, 1j, -0.2 + 1.4j):
            expected = cf(lam) * (a + lam) ** 2
            assert erlang_shifted_char(FULL, 1, 2, a, sigma, lam) == \
                pytest.approx(expected, abs=1e-11)


class TestRandomisedClosedFormAgreement:
    def test_erlang_closed_form_on_disc(self):
        rng = np.random.RandomState(11)
        a = 1.4
        cf = CharFunction(FULL, ErlangKernel(m=2, a=a, sigma=0.6),
                          ErlangKernel(m=1, a=a, sigma=0.6))
        checked = 0
        while checked < 100:
            lam = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
            if abs(lam) > 10.0 or abs(lam + a) < 0.3:
                continue
            direct = cf(lam)
            via_poly_form = erlang_shifted_char(FULL, 2, 1, a, 0.6, lam) / (a + lam) ** 2
            assert abs(direct - via_poly_form) < 1e-10 * max(1.0, abs(direct))
            checked += 1

    def test_tent_closed_form_on_axis(self):
        rng = np.random.RandomState(13)
        params = FULL
        for _ in range(100):
            sigma = rng.uniform(0.3, 3.0)
            epsilon = rng.uniform(0.05, 1.0) * sigma
            omega = rng.uniform(0.0, 12.0)
            kernel = TentKernel(sigma=sigma, epsilon=epsilon)
            cf = CharFunction(params, kernel, kernel)
            re, im = tent_char_parts(params, sigma, epsilon, omega)
            val = cf(1j * omega)
            assert val.real == pytest.approx(re, abs=1e-12 * max(1.0, abs(val)))
            assert val.imag == pytest.approx(im, abs=1e-12 * max(1.0, abs(val)))


class TestAuxErlang:
    def test_equal_m_closed_form(self):
        # beta=2, gamma=1, a=1, m=1: F(u) = u^2(1+u) - (4u+1)
        params = params_for(beta=2.0, gamma=1.0)
        aux = aux_function_erlang(params, 1, 1, 1.0)
        assert aux.case == "erlang-equal-m"
        assert list(aux.poly_u.coeffs) == pytest.approx([-1.0, -4.0, 1.0, 1.0])

    def test_f_at_zero_negative(self):
        for m1, m2 in [(1, 1), (2, 2), (3, 3), (1, 2), (2, 1), (3, 2)]:
            aux = aux_function_erlang(FULL, m1, m2, 1.1)
            assert aux(0.0) < 0.0
            if aux.poly_u is not None:
                assert aux.poly_u(0.0) < 0.0

    def test_21_coefficients(self):
        rates = derived_rates(FULL)
        ab = FULL.alpha * FULL.b
        a = 1.3
        aux = aux_function_erlang(FULL, 2, 1, a)
        coeffs = list(aux.poly_u.coeffs)
        assert coeffs[4] == pytest.approx(1.0)
        assert coeffs[3] == pytest.approx(2.0 * a**2)
        assert coeffs[2] == pytest.approx(a**2 * (a**2 - ab**2))
        assert coeffs[1] == pytest.approx(-(a**3) * (a * rates.beta**2 - 2 * ab * rates.gamma))
        assert coeffs[0] == pytest.approx(-(rates.gamma**2) * a**4)

    def test_12_coefficients(self):
        rates = derived_rates(FULL)
        ab = FULL.alpha * FULL.b
        a = 0.7
        aux = aux_function_erlang(FULL, 1, 2, a)
        coeffs = list(aux.poly_u.coeffs)
        assert coeffs[2] == pytest.approx(a**2 * (a**2 - FULL.r**2))
        assert coeffs[1] == pytest.approx(
            -(a**2) * (a**2 * rates.beta**2 + 2 * a * ab * rates.gamma + rates.gamma**2))
        assert coeffs[0] == pytest.approx(-(a**4) * rates.gamma**2)

    @pytest.mark.parametrize("m1,m2", [(1, 1), (2, 2), (1, 2), (2, 1)])
    def test_poly_matches_general_evaluator(self, m1, m2):
        # closed polynomial in u = omega^2 equals the squared-modulus form
        a = 1.2
        aux = aux_function_erlang(FULL, m1, m2, a)
        for omega in (0.1, 0.7, 1.9, 3.0):
            assert aux.poly_u(omega**2) == pytest.approx(aux(omega), rel=1e-10, abs=1e-10)

    def test_general_case_has_no_poly_but_evaluates(self):
        aux = aux_function_erlang(FULL, 3, 1, 1.0)
        assert aux.poly_u is None
        assert aux(0.0) < 0.0
        assert len(aux.positive_roots()) >= 1

    @pytest.mark.parametrize("m1,m2", [(1, 1), (2, 2), (3, 3), (1, 2), (2, 1), (3, 1)])
    def test_roots_admit_a_crossing_shift(self, m1, m2):
        # each simple positive root yields a shift where the shifted form vanishes
        a = 1.2
        aux = aux_function_erlang(FULL, m1, m2, a)
        m_max = max(m1, m2)
        roots = aux.positive_roots()
        assert roots, "at least one crossing frequency must exist"
        for root in roots:
            omega = root.omega
            head = -(omega**2) * (a + 1j * omega) ** m_max
            target = erlang_shifted_char(FULL, m1, m2, a, 0.0, 1j * omega) - head
            phase = (-cmath.phase(-head / target)) % (2 * math.pi)
            sigma = phase / omega
            assert abs(erlang_shifted_char(FULL, m1, m2, a, sigma, 1j * omega)) < 1e-8


class TestAuxTent:
    def test_g1_values(self):
        assert tent_g1(0.0) == pytest.approx(1.0)
        assert tent_g1(math.pi) == pytest.approx(4.0 / math.pi**2)
        assert tent_g1(2.0 * math.pi) == pytest.approx(0.0, abs=1e-15)

    def test_parts_at_zero(self):
        rates = derived_rates(FULL)
        re, im = tent_char_parts(FULL, 1.0, 0.5, 0.0)
        assert re == pytest.approx(rates.gamma)
        assert im == 0.0

    def test_parts_at_g1_zero(self):
        eps = 0.5
        omega = 2.0 * math.pi / eps
        re, im = tent_char_parts(FULL, 1.0, eps, omega)
        assert re == pytest.approx(-omega**2)
        assert im == pytest.approx(0.0, abs=1e-12)

    def test_f_at_zero(self):
        rates = derived_rates(FULL)
        aux = aux_function_tent(FULL, 0.5)
        assert aux(0.0) == pytest.approx(-rates.gamma**2)

    def test_f_positive_where_g1_vanishes(self):
        eps = 0.5
        omega = 2.0 * math.pi / eps
        aux = aux_function_tent(FULL, eps)
        assert aux(omega) == pytest.approx(omega**4)

    def test_modulus_identity_at_roots(self):
        # F(omega0)=0 iff omega0^2 equals |(i*omega0*beta+gamma)*g(i*omega0*eps)|
        rates = derived_rates(FULL)
        eps = 0.4
        aux = aux_function_tent(FULL, eps)
        for root in aux.positive_roots():
            omega = root.omega
            lhs = omega**2
            rhs = abs((1j * omega * rates.beta + rates.gamma)) * abs(tent_g1(omega * eps))
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_root_admits_phase_solution(self):
        # bisection root, then a shift making the full characteristic value vanish
        params = ModelParams(r=0.192, b=5.85, a_H=8.73e-3, mu=0.0, alpha=1.0)
        rates = derived_rates(params)
        eps = 0.5
        aux = aux_function_tent(params, eps)
        roots = aux.positive_roots()
        assert roots
        omega = roots[0].omega
        theta = math.atan2(rates.beta * omega, rates.gamma)
        sigma = theta / omega
        kernel = TentKernel(sigma=sigma, epsilon=min(eps, sigma))
        re, im = tent_char_parts(params, sigma, eps, omega)
        assert math.hypot(re, im) < 1e-8


class TestHodograph:
    def test_dump_shape_and_values(self):
        cf = CharFunction(FULL, DiracKernel(sigma=0.0), DiracKernel(sigma=0.0))
        pts = hodograph_points(cf, [0.0, 1.0])
        assert pts.shape == (2, 3)
        assert pts[0, 1] == pytest.approx(cf.gamma)
        assert pts[1, 0] == 1.0
