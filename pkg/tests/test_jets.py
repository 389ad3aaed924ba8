"""Taylor engine: exact coefficients, the finite-difference oracle, errors."""

import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import jets, metrics
from finslerlab.errors import ConfigError, DomainError, NumericError, OrderError
from finslerlab.jets import (
    BasePoint,
    MultiIndex,
    coefficient,
    fd_partial,
    jet_space,
    taylor_eval,
)

from conftest import seeded_points


def f2_euclidean(x, y):
    acc = y[0] * y[0]
    for yi in y[1:]:
        acc = acc + yi * yi
    return acc


class TestBasePoint:
    def test_rejects_zero_fiber(self):
        with pytest.raises(DomainError):
            BasePoint([0.0, 0.0], [0.0, 1e-9])

    def test_rejects_dimension_one(self):
        with pytest.raises(ConfigError):
            BasePoint([0.0], [1.0])

    def test_arrays_frozen(self):
        p = BasePoint([0.0, 1.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            p.x[0] = 5.0


class TestTaylorEval:
    def test_euclidean_norm_square(self):
        p = BasePoint([0.3, -0.7], [1.2, 0.5])
        j = taylor_eval(f2_euclidean, p, 2, 4)
        assert j.value == pytest.approx(1.2 ** 2 + 0.5 ** 2, abs=1e-15)
        for i in range(2):
            for k in range(2):
                beta = [0, 0]
                beta[i] += 1
                beta[k] += 1
                expected = 2.0 if i == k else 0.0
                assert j.partial((0, 0), tuple(beta)) == pytest.approx(expected, abs=1e-15)
        assert j.partial((1, 0), (0, 0)) == 0.0

    def test_polynomial_mixed_partial(self):
        p = BasePoint([3.0, 0.0], [1.0, 1.0])
        j = taylor_eval(lambda x, y: x[0] * x[0] * y[0], p, 2, 1)
        assert j.partial((2, 0), (1, 0)) == pytest.approx(2.0, abs=1e-14)

    def test_randers_mixed_partial_matches_fd(self, randers_generic):
        p = BasePoint([0.4, -0.3], [0.9, 0.7])
        f2 = randers_generic.f_squared()
        j = taylor_eval(f2, p, 3, 6)
        m = MultiIndex((1, 0), (0, 3))
        ad = coefficient(j, m)
        fd = fd_partial(f2, p, m)
        assert abs(ad - fd) <= 1e-6 * max(1.0, abs(ad))

    def test_order_overflow_rejected(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(ConfigError):
            taylor_eval(f2_euclidean, p, 9, 2)
        with pytest.raises(ConfigError):
            taylor_eval(f2_euclidean, p, 2, 11)

    def test_constant_field(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        j = taylor_eval(lambda x, y: 3.5, p, 1, 1)
        assert j.value == 3.5
        assert j.partial((1, 0), (0, 0)) == 0.0


class TestCoefficient:
    def test_zero_index_is_value(self):
        p = BasePoint([0.1, 0.2], [1.0, -0.5])
        j = taylor_eval(f2_euclidean, p, 1, 2)
        assert coefficient(j, MultiIndex((0, 0), (0, 0))) == j.value

    def test_out_of_range_raises(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        j = taylor_eval(f2_euclidean, p, 1, 2)
        with pytest.raises(OrderError):
            coefficient(j, MultiIndex((0, 0), (0, 3)))

    def test_factorials_applied(self):
        # f = y1^3: third derivative is 6, not the raw Taylor coefficient 1
        p = BasePoint([0.0, 0.0], [0.5, 1.0])
        j = taylor_eval(lambda x, y: y[0] * y[0] * y[0], p, 0, 3)
        assert coefficient(j, MultiIndex((0, 0), (3, 0))) == pytest.approx(6.0)


class TestFdPartial:
    def test_euclidean_second_derivative(self):
        p = BasePoint([0.0, 0.0], [3.0, 4.0])
        val = fd_partial(f2_euclidean, p, MultiIndex((0, 0), (2, 0)), step=1e-3)
        assert val == pytest.approx(2.0, abs=1e-7)

    def test_mixed_xy(self):
        p = BasePoint([0.0, 1.0], [1.0, 1.0])
        f = lambda x, y: math.sin(x[0]) * y[0] if not hasattr(x[0], "space") \
            else jets.sin(x[0]) * y[0]
        val = fd_partial(f, p, MultiIndex((1, 0), (1, 0)))
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_step_underflow(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(NumericError):
            fd_partial(f2_euclidean, p, MultiIndex((0, 0), (1, 0)), step=1e-13)

    def test_order_cap(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(OrderError):
            fd_partial(f2_euclidean, p, MultiIndex((0, 0), (5, 0)))


def _families():
    return [
        metrics.euclidean(2),
        metrics.riemannian(2, "diagonal", [4.0, 1.0]),
        metrics.sphere_chart(2),
        metrics.hyperbolic_chart(2),
        metrics.randers(2, b_expressions=["0.2 + 0.1*sin(x2)", "0.1*x1"]),
        metrics.perturbed_quartic(2, c=0.5),
    ]


@pytest.mark.parametrize("structure", _families(), ids=lambda s: s.label)
class TestOracleAgreement:
    """AD vs central differences on F^2 for every built-in family."""

    def test_all_mixed_partials(self, structure):
        from itertools import product

        f2 = structure.f_squared()
        points = seeded_points(structure, 20, seed=7, half_width=0.4)
        multis = [
            MultiIndex((a1, a2), (b1, b2))
            for a1, a2 in product(range(3), repeat=2) if a1 + a2 <= 2
            for b1, b2 in product(range(4), repeat=2) if b1 + b2 <= 3
        ]
        worst = 0.0
        for p in points:
            j = taylor_eval(f2, p, 2, 3)
            for m in multis:
                ad = coefficient(j, m)
                fd = fd_partial(f2, p, m)
                err = abs(ad - fd) / max(1.0, abs(ad))
                worst = max(worst, err)
        assert worst <= 1e-6

    def test_euler_degree_two(self, structure):
        # y^s d(F^2)/dy^s = 2 F^2 at every sampled point
        f2 = structure.f_squared()
        for p in seeded_points(structure, 10, seed=3):
            j = taylor_eval(f2, p, 0, 1)
            e = sum(p.y[s] * j.partial((0, 0), tuple(int(i == s) for i in range(2)))
                    for s in range(2))
            assert abs(e - 2 * j.value) <= 1e-9 * abs(2 * j.value)

    def test_fiber_scaling(self, structure):
        # F(x, lam y) = lam F(x, y) transfers to the jet value
        for p in seeded_points(structure, 5, seed=11):
            for lam in (0.5, 2.0):
                v1 = float(structure.F(p.x, p.y))
                v2 = float(structure.F(p.x, lam * p.y))
                assert v2 == pytest.approx(lam * v1, rel=1e-12)


class TestJetAlgebra:
    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.3, 2.0))
    @settings(max_examples=50, deadline=None)
    def test_product_rule(self, a, b, c):
        # d(uv)/dy1 = u dv + v du, exactly at the coefficient level
        p = BasePoint([a, 0.1], [c, b if abs(b) > 0.4 else 0.7])
        sp = jet_space(2, 1, 3)
        u = taylor_eval(lambda x, y: x[0] * y[0] + y[1] * y[1], p, space=sp,
                        x_order=1, y_order=3)
        v = taylor_eval(lambda x, y: jets.exp(0.3 * y[0]) + x[1], p, space=sp,
                        x_order=1, y_order=3)
        lhs = (u * v).dy(0)
        rhs = u.dy(0) * v + u * v.dy(0)
        npt.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)

    @given(st.floats(0.5, 3.0))
    @settings(max_examples=30, deadline=None)
    def test_sqrt_squares_back(self, v):
        p = BasePoint([0.2, -0.1], [v, 0.9])
        j = taylor_eval(lambda x, y: y[0] * y[0] + y[1] * y[1] + x[0] * y[0] * y[1],
                        p, 2, 4)
        r = j.sqrt()
        back = r * r
        npt.assert_allclose(back.coeffs[jet_space(2, 2, 4).mask(2, 4)],
                            j.coeffs[jet_space(2, 2, 4).mask(2, 4)],
                            atol=1e-12)

    def test_division_and_log_exp(self):
        p = BasePoint([0.3, 0.4], [1.1, 0.6])
        j = taylor_eval(lambda x, y: 1.0 + x[0] * y[0], p, 2, 2)
        ident = j * (1.0 / j)
        assert ident.value == pytest.approx(1.0, abs=1e-14)
        assert abs(ident.coeffs[1:]).max() < 1e-13
        roundtrip = jets.log(jets.exp(j)) - j
        assert abs(roundtrip.coeffs).max() < 1e-12

    def test_derivative_exhaustion(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        j = taylor_eval(f2_euclidean, p, 0, 1)
        with pytest.raises(OrderError):
            j.dx(0)
        with pytest.raises(OrderError):
            j.dy(0).dy(0)

    def test_sqrt_domain(self):
        p = BasePoint([0.0, 0.0], [1.0, 1.0])
        j = taylor_eval(lambda x, y: y[0] - 2.0, p, 0, 1)
        with pytest.raises(DomainError):
            j.sqrt()
