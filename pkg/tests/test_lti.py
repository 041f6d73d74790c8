import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from searange.errors import (
    ImproperTransferFunctionError,
    InvalidInputError,
    SingularLoopError,
)
from searange.lti import (
    ONE,
    FrequencyGrid,
    Polynomial,
    RationalTF,
    S,
    Stability,
    freq_response,
    is_stable,
    poly_roots,
    tf_combine,
    tf_feedback,
    tf_to_state_space,
)


def sorted_roots(rs):
    return sorted(rs, key=lambda z: (round(z.real, 6), round(z.imag, 6)))


class TestPolynomial:
    def test_trims_leading_zeros(self):
        p = Polynomial((1.0, 2.0, 0.0, 0.0))
        assert p.coeffs == (1.0, 2.0)
        assert p.degree == 1

    def test_zero_polynomial_is_single_zero(self):
        assert Polynomial((0.0, 0.0)).coeffs == (0.0,)
        assert Polynomial((0.0,)).is_zero

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(InvalidInputError):
            Polynomial(())
        with pytest.raises(InvalidInputError):
            Polynomial((1.0, math.inf))

    def test_eval_and_derivative(self):
        p = Polynomial((2.0, 3.0, 1.0))  # s^2 + 3 s + 2
        assert p(0) == 2.0
        assert p(-1) == 0.0
        assert p.derivative().coeffs == (3.0, 2.0)


class TestPolyRoots:
    def test_factorable_quadratic(self):
        r = sorted_roots(poly_roots(Polynomial((2.0, 3.0, 1.0))))
        assert r[0] == pytest.approx(-2.0, abs=1e-12)
        assert r[1] == pytest.approx(-1.0, abs=1e-12)

    def test_imaginary_pair(self):
        r = sorted_roots(poly_roots(Polynomial((1.0, 0.0, 1.0))))
        assert r[0] == pytest.approx(-1j, abs=1e-12)
        assert r[1] == pytest.approx(1j, abs=1e-12)

    def test_critically_damped_double_root(self):
        w0 = 157.08
        r = poly_roots(Polynomial((w0 * w0, 2 * w0, 1.0)))
        for root in r:
            assert root == pytest.approx(-w0, rel=1e-6)

    def test_degree_zero_rejected(self):
        with pytest.raises(InvalidInputError):
            poly_roots(Polynomial((3.0,)))
        with pytest.raises(InvalidInputError):
            poly_roots(Polynomial((0.0,)))

    def test_residual_contract(self):
        p = Polynomial((2.0, 3.0, 1.0, 0.5, 2.0))
        norm = math.sqrt(sum(c * c for c in p.coeffs))
        for r in poly_roots(p):
            assert abs(p(r)) <= 1e-9 * norm

    @given(
        st.lists(
            st.floats(min_value=-5, max_value=5).filter(lambda x: abs(x) > 0.05),
            min_size=1,
            max_size=8,
            unique_by=lambda x: round(x, 2),
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_roundtrip_from_roots(self, roots):
        p = Polynomial.from_roots(roots)
        found = poly_roots(p)
        for r in roots:
            assert min(abs(r - f) for f in found) <= 1e-7 * max(1.0, abs(r))


class TestRationalTF:
    def test_monic_normalization(self):
        g = RationalTF(Polynomial((141350.0,)), Polynomial((1.0, 2.0)))
        assert g.den.leading == 1.0
        assert g.num.coeffs[0] == pytest.approx(141350.0 / 2.0)

    def test_zero_denominator_rejected(self):
        with pytest.raises(InvalidInputError):
            RationalTF(ONE, Polynomial((0.0,)))

    def test_add_integrator_plus_one(self):
        g = 1 / S + 1  # (s+1)/s
        assert g(2.0) == pytest.approx(1.5)
        assert g.num.coeffs == (1.0, 1.0)
        assert g.den.coeffs == (0.0, 1.0)

    def test_mul_first_order_sections(self):
        g = RationalTF(ONE, Polynomial((1.0, 1.0))) * RationalTF(
            ONE, Polynomial((2.0, 1.0))
        )
        # 1/(s^2+3s+2)
        assert g.den.coeffs == pytest.approx((2.0, 3.0, 1.0))

    def test_scale_by_spring_constant(self):
        g = tf_combine("scale", RationalTF(ONE, Polynomial((1.0, 1.0))), 141350.0)
        assert g(0) == pytest.approx(141350.0)

    def test_no_cancellation(self):
        # (s+1)/(s+1) stays degree 1 over degree 1
        p = Polynomial((1.0, 1.0))
        g = RationalTF(p, p)
        assert g.num.degree == 1 and g.den.degree == 1

    def test_combine_commutes_pointwise(self):
        a = RationalTF(Polynomial((1.0, 2.0)), Polynomial((1.0, 3.0, 1.0)))
        b = RationalTF(Polynomial((5.0,)), Polynomial((2.0, 1.0)))
        w = np.logspace(-2, 2, 50)
        for kind in ("add", "mul"):
            x = tf_combine(kind, a, b)
            y = tf_combine(kind, b, a)
            vx = freq_response(x, FrequencyGrid(tuple(w))).values
            vy = freq_response(y, FrequencyGrid(tuple(w))).values
            np.testing.assert_allclose(vx, vy, rtol=1e-9)

    def test_combine_associates_pointwise(self):
        a = RationalTF(Polynomial((1.0, 2.0)), Polynomial((1.0, 3.0, 1.0)))
        b = RationalTF(Polynomial((5.0,)), Polynomial((2.0, 1.0)))
        c = RationalTF(Polynomial((0.5, 1.0)), Polynomial((4.0, 1.0)))
        w = FrequencyGrid(tuple(np.logspace(-2, 2, 40)))
        for kind in ("add", "mul"):
            x = tf_combine(kind, tf_combine(kind, a, b), c)
            y = tf_combine(kind, a, tf_combine(kind, b, c))
            np.testing.assert_allclose(
                freq_response(x, w).values, freq_response(y, w).values, rtol=1e-9
            )


class TestFeedback:
    def test_integrator_with_gain(self):
        g = tf_feedback(1 / S, 3.0)  # 1/(s+3)
        assert g(1.0) == pytest.approx(0.25)
        assert g.den.coeffs == pytest.approx((3.0, 1.0))

    def test_static(self):
        g = tf_feedback(RationalTF.scalar(5.0), RationalTF.scalar(1.0))
        assert g(0.7) == pytest.approx(5.0 / 6.0)

    def test_pointwise_oracle_motor_spring(self):
        # fb(Mhat, K/s) at w=100 equals direct complex arithmetic
        J, B, K = 6.4e-6, 6e-5, 141350.0
        Mhat = RationalTF(ONE, Polynomial((B, J)))
        g = tf_feedback(Mhat, RationalTF(Polynomial((K,)), Polynomial((0.0, 1.0))))
        w = 100.0
        m = 1.0 / (J * 1j * w + B)
        expected = m / (1.0 + m * K / (1j * w))
        assert g(1j * w) == pytest.approx(expected, rel=1e-12)

    def test_singular_loop_detected(self):
        # fb(-1, 1): 1 + (-1)(1) = 0 identically
        with pytest.raises(SingularLoopError):
            tf_feedback(RationalTF.scalar(-1.0), RationalTF.scalar(1.0))

    @given(
        st.lists(st.floats(min_value=0.2, max_value=4.0), min_size=1, max_size=3),
        st.floats(min_value=0.1, max_value=5.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_feedback_inverse_roundtrip(self, poles, gain):
        a = RationalTF(Polynomial((gain,)), Polynomial.from_roots([-p for p in poles]))
        b = RationalTF(Polynomial((1.0, 0.5)), Polynomial((2.0, 1.0)))
        rt = tf_feedback(tf_feedback(a, b), -b)
        w = FrequencyGrid(tuple(np.logspace(-2, 2, 60)))
        np.testing.assert_allclose(
            freq_response(rt, w).values, freq_response(a, w).values, rtol=1e-9
        )


class TestFreqResponse:
    def test_motor_dc_gain(self):
        M = RationalTF(ONE, Polynomial((6e-5, 6.4e-6)))
        grid = FrequencyGrid((1e-6, 1e-5))
        v = freq_response(M, grid).values
        assert abs(v[0]) == pytest.approx(1.0 / 6e-5, rel=1e-6)

    def test_integrator_at_one(self):
        v = freq_response(1 / S, FrequencyGrid((1.0, 2.0))).values
        assert v[0] == pytest.approx(-1j, abs=1e-15)

    def test_allpass_like_at_low_freq(self):
        g = RationalTF(Polynomial((-1.0, 1.0)), Polynomial((1.0, 1.0)))
        v = freq_response(g, FrequencyGrid((1e-9, 1.0))).values
        assert v[0].real == pytest.approx(-1.0, abs=1e-6)

    def test_singular_sample_flagged(self):
        g = RationalTF(ONE, Polynomial((1.0, 0.0, 1.0)))  # poles at +-j
        resp = freq_response(g, FrequencyGrid((0.5, 1.0, 2.0)))
        assert resp.singular[1]
        assert not resp.singular[0] and not resp.singular[2]


class TestStability:
    def test_basic_cases(self):
        assert is_stable(RationalTF(ONE, Polynomial((1.0, 1.0)))) is Stability.STABLE
        assert is_stable(RationalTF(ONE, Polynomial((-1.0, 1.0)))) is Stability.UNSTABLE
        # 1/s^2: repeated pole on the axis -> marginal by the pole-location test
        assert (
            is_stable(RationalTF(ONE, Polynomial((0.0, 0.0, 1.0)))) is Stability.MARGINAL
        )


class TestStateSpace:
    def test_first_order(self):
        a = 3.0
        ss = tf_to_state_space(RationalTF(ONE, Polynomial((a, 1.0))))
        assert ss.A.shape == (1, 1)
        assert ss.A[0, 0] == pytest.approx(-a)
        assert ss.B[0, 0] == 1.0
        assert ss.C[0, 0] == 1.0
        assert ss.D[0, 0] == 0.0

    def test_constant_has_empty_state(self):
        ss = tf_to_state_space(RationalTF.scalar(4.2))
        assert ss.order == 0
        assert ss.D[0, 0] == pytest.approx(4.2)

    def test_improper_rejected(self):
        with pytest.raises(ImproperTransferFunctionError):
            tf_to_state_space(S)

    def test_realization_matches_frequency_response(self):
        g = RationalTF(
            Polynomial((2.0, 0.3, 1.0)), Polynomial((5.0, 2.5, 0.8, 1.0))
        )
        grid = FrequencyGrid.log_spaced(1e-2, 1e3, 50)
        ss = tf_to_state_space(g)
        hv = freq_response(g, grid).values
        sv = ss.freq_response(grid)
        np.testing.assert_allclose(sv, hv, rtol=1e-9)

    def test_biproper_feedthrough(self):
        g = RationalTF(Polynomial((1.0, 2.0)), Polynomial((3.0, 1.0)))
        ss = tf_to_state_space(g)
        assert ss.D[0, 0] == pytest.approx(2.0)
        grid = FrequencyGrid.log_spaced(1e-1, 1e2, 30)
        np.testing.assert_allclose(
            ss.freq_response(grid), freq_response(g, grid).values, rtol=1e-9
        )


class TestFrequencyGrid:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            FrequencyGrid((1.0,))
        with pytest.raises(InvalidInputError):
            FrequencyGrid((0.0, 1.0))
        with pytest.raises(InvalidInputError):
            FrequencyGrid((2.0, 1.0))

    def test_log_spaced_default(self):
        g = FrequencyGrid.log_spaced()
        assert len(g) == 400
        assert g.points[0] == pytest.approx(1e-3)
        assert g.points[-1] == pytest.approx(1e6)
