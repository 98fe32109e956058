"""Transfer-function core: biquad prototypes, arithmetic, poles.

Expected values for the non-trivial cases are computed by direct complex
arithmetic on the defining formulas (written out below, independent of the
Polynomial/Horner machinery under test) and then asserted against the library.
"""

import cmath
import math

import numpy as np
import pytest

from gmclab import (
    BiquadKind,
    BiquadParams,
    Polynomial,
    RationalTF,
    biquad_bpf_equal_poles,
    biquad_lpf,
    cascaded_lossy,
    first_order_lpf,
    hx_equal_poles,
    mul,
    poles,
    scale,
    sub,
    two_pole_bpf,
    two_pole_hx,
    two_pole_lpf,
    two_pole_q,
)
from gmclab.errors import (
    EvaluationSingularError,
    InvalidParameterError,
    UnsupportedDegreeError,
)

# Direct-formula oracles.
def lpf_direct(w0, q, s):
    return w0 * w0 / (s * s + (w0 / q) * s + w0 * w0)


def bpf_direct(w0, q, s):
    return w0 * s / (s * s + (w0 / q) * s + w0 * w0)


def hx_direct(w0, q, s):
    return w0 * (s + w0 / q) / (s * s + (w0 / q) * s + w0 * w0)


SWEEP = [10.0 ** (k / 16.0) for k in range(-32, 97)]  # 1e-2 .. ~1e6 Hz


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestPolynomial:
    def test_trailing_zeros_trimmed(self):
        assert Polynomial([1.0, 2.0, 0.0, 0.0]).coeffs == (1.0, 2.0)
        assert Polynomial([0.0, 0.0]).coeffs == (0.0,)

    def test_degree(self):
        assert Polynomial([3.0]).degree == 0
        assert Polynomial([1.0, 0.0, 2.0]).degree == 2

    def test_empty_rejected(self):
        with pytest.raises(InvalidParameterError):
            Polynomial([])

    def test_evaluation_matches_direct_sum(self):
        p = Polynomial([1.0, -2.5, 0.75])
        for s in (0j, 1j, 2.0 + 3.0j):
            direct = 1.0 - 2.5 * s + 0.75 * s * s
            assert p(s) == pytest.approx(direct, rel=1e-15)


class TestBiquadLpf:
    def test_dc_gain_is_one(self):
        assert biquad_lpf(1.0, 0.5).eval(0.0) == 1.0 + 0.0j

    def test_magnitude_q_at_center(self):
        # |H(j w0)| = Q: real parts cancel, leaving w0^2 / (j w0^2 / Q)
        h = biquad_lpf(1.0, 2.0).eval_s(1j)
        assert h == pytest.approx(-2.0j, abs=1e-15)
        assert abs(h) == pytest.approx(2.0, rel=1e-14)

    def test_at_center_pure_negative_imaginary(self):
        w0 = 2.0 * math.pi * 1000.0
        h = biquad_lpf(w0, 2.0).eval(1000.0)
        assert h == pytest.approx(0.0 - 2.0j, abs=1e-12)

    def test_far_above_cutoff(self):
        w0 = 2.0 * math.pi * 100.0
        tf = biquad_lpf(w0, 2.0)
        s = 2j * math.pi * 1e4
        expected = lpf_direct(w0, 2.0, s)
        assert rel_err(tf.eval(1e4), expected) < 1e-14
        # (w0/w)^2 asymptote
        assert abs(expected) == pytest.approx(1.0e-4, rel=1e-3)

    def test_matches_direct_formula_on_sweep(self):
        tf = biquad_lpf(123.0, 0.9)
        for f in SWEEP:
            s = 2j * math.pi * f
            assert rel_err(tf.eval(f), lpf_direct(123.0, 0.9, s)) < 1e-13

    def test_rejects_nonpositive(self):
        for bad in ((0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.nan, 1.0)):
            with pytest.raises(InvalidParameterError):
                biquad_lpf(*bad)


class TestBiquadBpf:
    def test_zero_at_dc(self):
        assert biquad_bpf_equal_poles(1.0, 2.0).eval(0.0) == 0.0j

    def test_center_gain_is_q(self):
        h = biquad_bpf_equal_poles(1.0, 2.0).eval_s(1j)
        assert abs(h) == pytest.approx(2.0, rel=1e-14)

    def test_decade_above_center(self):
        # H(10j) = 10j / (-99 + 5j), |H| = 10/sqrt(9826)
        h = biquad_bpf_equal_poles(1.0, 2.0).eval_s(10j)
        expected = 10j / (-99.0 + 5.0j)
        assert h == pytest.approx(expected, rel=1e-14)
        assert abs(h) == pytest.approx(10.0 / math.sqrt(9826.0), rel=1e-14)

    def test_center_gain_is_q_randomized(self, rng):
        for _ in range(50):
            w0 = 10.0 ** rng.uniform(0, 6)
            q = 10.0 ** rng.uniform(-1, 1)
            h = biquad_bpf_equal_poles(w0, q).eval_s(1j * w0)
            assert abs(abs(h) - q) <= 1e-12 * q


class TestHxEqualPoles:
    def test_dc_value_inverse_q(self):
        assert hx_equal_poles(1.0, 2.0).eval(0.0) == pytest.approx(0.5, abs=1e-15)
        assert hx_equal_poles(1.0, 1.0).eval(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_subtraction_identity(self):
        # H_X - (1/Q) H_LPF == H_BPF pointwise
        w0, q = 2.0 * math.pi * 500.0, 2.0
        lhs = sub(hx_equal_poles(w0, q), scale(biquad_lpf(w0, q), 1.0 / q))
        rhs = biquad_bpf_equal_poles(w0, q)
        for f in SWEEP:
            assert rel_err(lhs.eval(f), rhs.eval(f)) < 1e-13


class TestTwoPoleForms:
    def test_q_from_pole_ratio(self):
        assert two_pole_q(4.0, 1.0) == pytest.approx(2.0, rel=1e-15)

    def test_hx_unity_at_dc(self):
        assert two_pole_hx(4.0, 1.0).eval(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_bpf_center_gain_q_squared(self):
        # s = 2j (w0 = sqrt(4*1)): num 4*2j, den reduces to j*w0*w2 = 2j
        h = two_pole_bpf(4.0, 1.0).eval_s(2j)
        assert h == pytest.approx(8j / 2j, rel=1e-14)
        assert abs(h) == pytest.approx(4.0, rel=1e-14)

    def test_hx_at_center_exact_form(self):
        # |H_X(j w0)| = Q sqrt(Q^2 + 1) exactly
        for w1, w2 in ((4.0, 1.0), (9.0, 1.0), (400.0, 1.0), (2.0, 3.0)):
            q = math.sqrt(w1 / w2)
            w0 = math.sqrt(w1 * w2)
            got = abs(two_pole_hx(w1, w2).eval_s(1j * w0))
            assert got == pytest.approx(q * math.sqrt(q * q + 1.0), rel=1e-12)

    def test_hx_peak_label_is_large_q_asymptote(self):
        # The exact on-axis value exceeds Q^2; the excess shrinks as Q grows.
        errs = []
        for q in (1.0, 2.0, 4.0, 8.0, 16.0):
            exact = q * math.sqrt(q * q + 1.0)
            errs.append((exact - q * q) / (q * q))
        assert all(e > 0 for e in errs)
        assert errs == sorted(errs, reverse=True)

    def test_subtraction_identity(self):
        w1, w2 = 4000.0, 1000.0
        lhs = sub(two_pole_hx(w1, w2), two_pole_lpf(w1, w2))
        rhs = two_pole_bpf(w1, w2)
        for f in SWEEP:
            assert rel_err(lhs.eval(f), rhs.eval(f)) < 1e-13

    def test_subtraction_identity_randomized(self, rng):
        for _ in range(20):
            w1 = 10.0 ** rng.uniform(1, 5)
            w2 = 10.0 ** rng.uniform(1, 5)
            lhs = sub(two_pole_hx(w1, w2), two_pole_lpf(w1, w2))
            rhs = two_pole_bpf(w1, w2)
            for f in SWEEP[::8]:
                assert rel_err(lhs.eval(f), rhs.eval(f)) < 1e-12


class TestCascadedLossy:
    def test_equal_poles_hit_bound(self):
        _, q = cascaded_lossy(1.0, 1.0)
        assert q == pytest.approx(0.5, abs=1e-15)

    def test_distinct_poles(self):
        _, q = cascaded_lossy(4.0, 1.0)
        assert q == pytest.approx(0.4, rel=1e-15)  # sqrt(4)/5

    def test_bound_holds_randomized(self, rng):
        for _ in range(200):
            w1 = 10.0 ** rng.uniform(0, 6)
            w2 = 10.0 ** rng.uniform(0, 6)
            _, q = cascaded_lossy(w1, w2)
            assert q <= 0.5 + 1e-12

    def test_product_of_lossy_sections(self):
        w1, w2 = 250.0, 4000.0
        prod = mul(first_order_lpf(w1), first_order_lpf(w2))
        casc, _ = cascaded_lossy(w1, w2)
        for f in SWEEP:
            assert rel_err(prod.eval(f), casc.eval(f)) < 1e-13


class TestEval:
    def test_constant_tf(self):
        tf = RationalTF(Polynomial([3.0]), Polynomial([1.0]))
        for f in (0.0, 1.0, 1e6):
            assert tf.eval(f) == 3.0 + 0.0j

    def test_pure_function_bit_identical(self):
        tf = biquad_lpf(2.0 * math.pi * 997.0, 1.3)
        a = tf.eval(1234.5)
        b = tf.eval(1234.5)
        assert a == b and (a.real, a.imag) == (b.real, b.imag)

    def test_on_axis_pole_raises(self):
        # den = s^2 + w0^2 has poles at +/- j w0
        tf = RationalTF(Polynomial([1.0]), Polynomial([1.0, 0.0, 1.0]))
        with pytest.raises(EvaluationSingularError):
            tf.eval_s(1j)

    def test_zero_denominator_rejected(self):
        with pytest.raises(InvalidParameterError):
            RationalTF(Polynomial([1.0]), Polynomial([0.0]))


class TestArithmetic:
    def test_self_subtraction_is_zero(self):
        tf = biquad_bpf_equal_poles(100.0, 3.0)
        diff = sub(tf, tf)
        for f in SWEEP[::4]:
            assert diff.eval(f) == 0.0j

    def test_scale(self):
        tf = scale(biquad_lpf(10.0, 1.0), 2.5)
        assert tf.eval(0.0) == pytest.approx(2.5 + 0j, rel=1e-15)


class TestPoles:
    def test_first_order(self):
        tf = RationalTF(Polynomial([1.0]), Polynomial([1.0, 1.0]))
        assert poles(tf) == [(-1.0 + 0.0j)]

    def test_critical_damping_double_pole(self):
        got = poles(biquad_lpf(1.0, 0.5))
        assert got[0] == pytest.approx(-1.0 + 0j, abs=1e-15)
        assert got[1] == pytest.approx(-1.0 + 0j, abs=1e-15)

    def test_complex_pair(self):
        # -w0/(2Q) +/- j w0 sqrt(1 - 1/(4Q^2)); Q=2 gives sqrt(15)/4
        got = poles(biquad_lpf(1.0, 2.0))
        expected_imag = math.sqrt(15.0) / 4.0
        assert got[0] == pytest.approx(complex(-0.25, -expected_imag), rel=1e-14)
        assert got[1] == pytest.approx(complex(-0.25, expected_imag), rel=1e-14)
        assert got[1].imag == pytest.approx(0.9682458365518543, rel=1e-14)

    def test_left_half_plane_for_positive_coeffs(self, rng):
        for _ in range(100):
            w0 = 10.0 ** rng.uniform(0, 6)
            q = 10.0 ** rng.uniform(-1.5, 1.5)
            for p in poles(biquad_lpf(w0, q)):
                assert p.real < 0.0

    def test_unsupported_degree(self):
        cubic = RationalTF(Polynomial([1.0]), Polynomial([1.0, 1.0, 1.0, 1.0]))
        with pytest.raises(UnsupportedDegreeError):
            poles(cubic)
        constant = RationalTF(Polynomial([1.0]), Polynomial([2.0]))
        with pytest.raises(UnsupportedDegreeError):
            poles(constant)


class TestBiquadParams:
    def test_roundtrip_to_tf(self):
        p = BiquadParams(100.0, 2.0, BiquadKind.LPF)
        assert p.to_tf().eval(0.0) == 1.0 + 0j
        p = BiquadParams(100.0, 2.0, BiquadKind.BPF)
        assert p.to_tf().eval(0.0) == 0.0j

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            BiquadParams(-1.0, 2.0)
        with pytest.raises(InvalidParameterError):
            BiquadParams(1.0, 0.0)
