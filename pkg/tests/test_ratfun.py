import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdlens.ratfun import (
    ComplexPoly,
    CoprimalityError,
    RationalMap,
    all_roots,
    dualize,
    is_self_dual,
    on_unit_circle,
)


def sorted_roots(roots):
    return np.array(sorted(roots, key=lambda z: (round(z.real, 7), round(z.imag, 7))))


class TestAllRoots:
    def test_quadratic_factorization(self):
        roots = all_roots(ComplexPoly([1, 0, 1]))  # z^2 + 1
        assert np.allclose(sorted_roots(roots), [-1j, 1j])

    def test_suffridge_d3_critical_points(self):
        # f'(z) = 1 + (4*sqrt(2)/3) z + z^2 for f = z + (2 sqrt2/3) z^2 + z^3/3
        s = 2.0 * np.sqrt(2.0) / 3.0
        roots = all_roots(ComplexPoly([1.0, 2 * s, 1.0]))
        expected = np.array([(-2 * np.sqrt(2) - 1j) / 3, (-2 * np.sqrt(2) + 1j) / 3])
        assert np.allclose(sorted_roots(roots), sorted_roots(expected), atol=1e-12)
        assert all(on_unit_circle(z) for z in roots)

    def test_talbot_numerator_roots_on_circle(self):
        # z^4 - (2/3) z^2 + 1: cleared numerator of Talbot f', |z^2| = 1
        roots = all_roots(ComplexPoly([1.0, 0.0, -2.0 / 3.0, 0.0, 1.0]))
        assert len(roots) == 4
        assert np.allclose(np.abs(roots), 1.0, atol=1e-12)

    def test_residual_contract(self):
        rng = np.random.default_rng(7)
        c = rng.normal(size=9) + 1j * rng.normal(size=9)
        p = ComplexPoly(c)
        roots = all_roots(p, tol=1e-9)
        assert len(roots) == p.degree
        assert np.max(np.abs(p(roots))) <= 1e-9 * np.max(np.abs(c)) * 1e3

    def test_multiset_matches_monic_rescaling(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            deg = rng.integers(2, 11)
            c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
            c[-1] += 3.0  # keep leading coefficient away from zero
            p = ComplexPoly(c)
            r1 = sorted_roots(all_roots(p))
            r2 = sorted_roots(all_roots(p.monic()))
            assert np.allclose(r1, r2, atol=1e-7)

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            all_roots(ComplexPoly([0.0]))


class TestDualize:
    def test_palindromic_real(self):
        p = ComplexPoly([1.0, 1.0])
        assert np.allclose(dualize(p, 1).coeffs, p.coeffs)

    def test_coefficient_reversal(self):
        p = ComplexPoly([1.0, 2.0])
        assert np.allclose(dualize(p, 1).coeffs, [2.0, 1.0])

    def test_suffridge_d3_derivative_self_dual(self):
        s = 2.0 * np.sqrt(2.0) / 3.0
        fprime = ComplexPoly([1.0, 2 * s, 1.0])
        assert np.allclose(dualize(fprime, 2).coeffs, fprime.coeffs)

    def test_slot_violation(self):
        with pytest.raises(ValueError):
            dualize(ComplexPoly([1.0, 0.0, 1.0]), 1)

    @given(
        st.lists(
            st.tuples(
                st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False)
            ),
            min_size=1,
            max_size=8,
        ),
        st.integers(0, 4),
    )
    @settings(max_examples=60, deadline=None)
    def test_involution(self, pairs, extra):
        p = ComplexPoly([complex(re, im) for re, im in pairs])
        k = p.degree + extra
        q = dualize(dualize(p, k), k)
        a = np.zeros(k + 1, dtype=complex)
        b = np.zeros(k + 1, dtype=complex)
        a[: len(p.coeffs)] = p.coeffs
        b[: len(q.coeffs)] = q.coeffs
        assert np.max(np.abs(a - b)) <= 1e-14 * max(1.0, np.max(np.abs(a)))


class TestIsSelfDual:
    def test_cardioid_derivative(self):
        assert is_self_dual(ComplexPoly([1.0, 1.0]), 1)

    def test_deltoid_derivative_slot3(self):
        # f = z - 1/(2 z^2): f'(1/z) = 1 + z^3 lies in Pi_3
        assert is_self_dual(ComplexPoly([1.0, 0.0, 0.0, 1.0]), 3)

    def test_non_self_dual(self):
        assert not is_self_dual(ComplexPoly([1.0, 2.0]), 1)

    def test_circle_critical_points_product_rule(self):
        # f' = prod (z - e^{i theta_j}) with sum theta_j = pi (d-1) mod 2 pi
        rng = np.random.default_rng(3)
        for d in range(2, 7):
            theta = rng.uniform(0, 2 * np.pi, size=d - 1)
            theta[-1] = np.pi * (d - 1) - np.sum(theta[:-1])
            fp = ComplexPoly([1.0])
            for t in theta:
                fp = fp * ComplexPoly([-np.exp(1j * t), 1.0])
            assert is_self_dual(fp, d - 1, tol=1e-10)


class TestRationalMap:
    def test_pole_bookkeeping(self):
        r = RationalMap([0.0, 2.0], [-1.0, 0.0, 1.0])  # 2z / (z^2 - 1)
        assert r.degree == 2
        assert r.pole_at_infinity == 0
        assert r.n_poles == 2
        locs = sorted(z.real for z, m in r.finite_poles)
        assert np.allclose(locs, [-1.0, 1.0], atol=1e-9)

    def test_infinity_pole_counted(self):
        r = RationalMap([0.0, 0.0, 1.0], [1.0])  # z^2
        assert r.degree == 2
        assert r.pole_at_infinity == 2
        assert r.n_poles == 1

    def test_coprimality_guard(self):
        with pytest.raises(CoprimalityError):
            RationalMap([0.0, 1.0], [0.0, 1.0, 1.0])  # z / (z(z+1))

    def test_explicit_pole_data(self):
        r = RationalMap(
            [1.0], [0.0, 0.0, 1.0], finite_poles=[(0.0, 2)], check_coprime=False
        )
        assert r.n_poles == 1
        assert r.finite_poles[0][1] == 2

    def test_eval_and_derivative(self):
        r = RationalMap([0.0, 2.0], [-1.0, 0.0, 1.0])
        assert np.isclose(r(1j), -1j)
        assert np.isclose(r.deriv_at(1j), 0.0)

    def test_json_roundtrip(self):
        r = RationalMap([0.0, 2.0], [-1.0, 0.0, 1.0])
        r2 = RationalMap.from_json(r.to_json())
        assert np.allclose(r2.numerator.coeffs, r.numerator.coeffs)
        assert np.allclose(r2.denominator.coeffs, r.denominator.coeffs)
