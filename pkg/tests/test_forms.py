import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouvillekit import fields as flds
from liouvillekit.forms import (AnnihilatorForm, Jet2, contact_coefficient, lie_s, lie_X,
                                wedge)

finite = st.floats(-10, 10, allow_nan=False)
positive = st.floats(0.2, 5.0)


def form(e, f):
    return AnnihilatorForm(Jet2.const(e), Jet2.const(f))


jet_strategy = st.tuples(finite, finite, finite, finite, finite).map(lambda t: Jet2(*t))
form_strategy = st.tuples(jet_strategy, jet_strategy).map(lambda t: AnnihilatorForm(*t))


class TestLieX:
    def test_constant_unstable_coefficient_scales_by_rate(self):
        out = lie_X(form(1.0, 0.0), 0.9624, -0.9624)
        assert out.E.value == pytest.approx(0.9624)
        assert out.F.value == 0.0

    def test_zero_form(self):
        out = lie_X(form(0.0, 0.0), 0.9624, -0.9624)
        assert out.values() == (0.0, 0.0)

    def test_exponential_coefficient(self):
        s = 0.7
        E = Jet2(math.exp(s), 0.0, math.exp(s), 0.0, math.exp(s))
        out = lie_X(AnnihilatorForm(E, Jet2.const(0.0)), 1.0, -1.0)
        assert out.E.value == pytest.approx(math.exp(s))
        assert out.E.d_s == pytest.approx(math.exp(s))
        assert out.F.value == 0.0

    def test_coupling_feeds_stable_coefficient_into_unstable(self):
        out = lie_X(form(0.0, 2.0), 1.0, 0.5, coupling=0.25)
        assert out.E.value == pytest.approx(0.5)
        assert out.F.value == pytest.approx(1.0)

    def test_unavailable_slots_are_nan(self):
        out = lie_X(form(1.0, 1.0), 1.0, -1.0)
        assert math.isnan(out.E.d_X) and math.isnan(out.F.d_ss)

    @given(form_strategy, jet_strategy, finite, finite)
    def test_leibniz_rule(self, a, phi, r_u, r_s):
        scaled = AnnihilatorForm(a.E * phi, a.F * phi)
        lhs = lie_X(scaled, r_u, r_s)
        base = lie_X(a, r_u, r_s)
        for got, coeff, lie in ((lhs.E, a.E, base.E), (lhs.F, a.F, base.F)):
            expected = phi.d_X * coeff.value + phi.value * lie.value
            assert got.value == pytest.approx(expected, rel=1e-9, abs=1e-9)


class TestLieS:
    def test_bicontact_pair_derivative(self):
        s, hu, hs = 0.3, 1.7, 0.6
        es, ems = math.exp(s), math.exp(-s)
        exp_s = Jet2(es, 0, es, 0, es)
        exp_ms = Jet2(ems, 0, -ems, 0, ems)
        a = AnnihilatorForm(exp_s + exp_ms * hu, -exp_s + exp_ms * hs)
        out = lie_s(a)
        assert out.E.value == pytest.approx(es - hu * ems)
        assert out.F.value == pytest.approx(-es - hs * ems)

    def test_constant_coefficients(self):
        assert lie_s(form(3.0, -2.0)).values() == (0.0, 0.0)

    def test_polynomial(self):
        s = Jet2.fibre(3.0)
        out = lie_s(AnnihilatorForm(s * s, Jet2.const(0.0)))
        assert out.E.value == 6.0
        assert out.E.d_s == 2.0

    @given(form_strategy, form_strategy, finite)
    def test_linear(self, a, b, c):
        lhs = lie_s(a + b.scale(c))
        ra, rb = lie_s(a), lie_s(b)
        assert lhs.E.value == pytest.approx(ra.E.value + c * rb.E.value, rel=1e-9, abs=1e-9)
        assert lhs.F.d_s == pytest.approx(ra.F.d_s + c * rb.F.d_s, rel=1e-9, abs=1e-9)


class TestWedge:
    def test_orientation(self):
        assert wedge(form(0, 1), form(1, 0)).coeff == 1.0

    def test_self_wedge_vanishes(self):
        a = form(2.5, -1.25)
        assert wedge(a, a).coeff == 0.0

    def test_determinant(self):
        assert wedge(form(2, 3), form(5, 7)).coeff == 1.0

    @given(finite, finite, finite, finite)
    def test_antisymmetric(self, a, b, c, d):
        x, y = form(a, b), form(c, d)
        assert wedge(x, y).coeff == -wedge(y, x).coeff

    @given(finite, finite, finite, finite, finite, finite, finite)
    def test_bilinear(self, a, b, c, d, e, f, k):
        x, y, z = form(a, b), form(c, d), form(e, f)
        lhs = wedge(x + y.scale(k), z).coeff
        rhs = wedge(x, z).coeff + k * wedge(y, z).coeff
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


class TestContactCoefficient:
    def test_symmetric_pair(self):
        r_u, r_s = 0.9624, -0.9624
        assert contact_coefficient(form(1, -1), r_u, r_s) == pytest.approx(r_u - r_s)
        assert contact_coefficient(form(1, 1), r_u, r_s) == pytest.approx(-(r_u - r_s))

    @given(positive, st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
    def test_homogeneous_of_degree_two(self, k, xh, r_u, r_s):
        a = AnnihilatorForm(Jet2(1.0, xh), Jet2(-0.5, 0.3))
        c1 = contact_coefficient(a, r_u, r_s)
        c2 = contact_coefficient(a.scale(k), r_u, r_s)
        assert c2 == pytest.approx(k * k * c1, rel=1e-9, abs=1e-9)


class TestJetArithmetic:
    """Jet arithmetic against jets of the combined expression taken symbolically."""

    @pytest.fixture(autouse=True)
    def _model(self, cat):
        self.model = cat

    def jet_of(self, text, s, theta):
        pts = np.array([[0.1, -0.2, theta]])
        return flds.parse_expr(text).jet(self.model, np.array([s]), pts)

    def assert_same(self, a, b):
        for x, y in zip(a.slots(), b.slots()):
            assert np.allclose(x, y, rtol=1e-10, atol=1e-10)

    @given(st.floats(-1.5, 1.5), st.floats(0, 1))
    def test_product_quotient_and_functions(self, s, theta):
        f = "2 + sin(2*pi*theta)*s"
        g = "3 + cos(2*pi*theta) + s**2"
        jf, jg = self.jet_of(f, s, theta), self.jet_of(g, s, theta)
        self.assert_same(jf * jg, self.jet_of(f"({f})*({g})", s, theta))
        self.assert_same(jf / jg, self.jet_of(f"({f})/({g})", s, theta))
        self.assert_same(jg.exp(), self.jet_of(f"exp({g})", s, theta))
        self.assert_same(jg.log(), self.jet_of(f"log({g})", s, theta))
        self.assert_same(jg.sqrt(), self.jet_of(f"sqrt({g})", s, theta))
        self.assert_same(2.0 - jf, self.jet_of(f"2 - ({f})", s, theta))

    def test_slots_against_finite_differences(self):
        text = "exp(s*cos(2*pi*theta)) + s**3"
        s, theta, h = 0.4, 0.3, 1e-5
        j = self.jet_of(text, s, theta)
        val = lambda s_, th: float(self.jet_of(text, s_, th).value[0])
        assert j.d_s[0] == pytest.approx((val(s + h, theta) - val(s - h, theta)) / (2 * h),
                                         rel=1e-7)
        assert j.d_X[0] == pytest.approx((val(s, theta + h) - val(s, theta - h)) / (2 * h),
                                         rel=1e-7)
        h2 = 1e-4
        d_ss = (val(s + h2, theta) - 2 * val(s, theta) + val(s - h2, theta)) / h2**2
        assert j.d_ss[0] == pytest.approx(d_ss, rel=1e-5)
        d_sX = (val(s + h2, theta + h2) - val(s + h2, theta - h2)
                - val(s - h2, theta + h2) + val(s - h2, theta - h2)) / (4 * h2 * h2)
        assert j.d_sX[0] == pytest.approx(d_sX, rel=1e-5)
