"""Rational transfer functions in s and the two-integrator-loop biquad prototypes.

Polynomial coefficients are stored in ascending powers of s, so ``coeffs[k]``
multiplies ``s**k``. Rational arithmetic works over a common denominator with
no cancellation; equivalence of two transfer functions is checked by pointwise
evaluation, never by symbolic simplification.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import (
    EvaluationSingularError,
    InvalidParameterError,
    UnsupportedDegreeError,
)

# |den(jw)| below this is treated as an on-axis pole.
SINGULAR_DEN_TOL = 1e-300


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class Polynomial:
    """Real-coefficient polynomial, ascending powers: coeffs[k] * s**k."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        coeffs = [float(c) for c in coeffs]
        if not coeffs:
            raise InvalidParameterError("polynomial needs at least one coefficient")
        # Enforce a nonzero leading coefficient; the zero polynomial stays [0].
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, s: complex) -> complex:
        # Horner, highest power first.
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def add(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0.0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0.0] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    def scale(self, k: float) -> "Polynomial":
        return Polynomial([k * c for c in self.coeffs])

    def mul(self, other: "Polynomial") -> "Polynomial":
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)


@dataclass(frozen=True)
class RationalTF:
    """Ratio of two real polynomials in the Laplace variable s."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise InvalidParameterError("denominator must not be the zero polynomial")

    def eval_s(self, s: complex) -> complex:
        d = self.den(s)
        if abs(d) < SINGULAR_DEN_TOL:
            raise EvaluationSingularError(f"denominator vanishes at s = {s}")
        return self.num(s) / d

    def eval(self, freq_hz: float) -> complex:
        """Evaluate at s = j*2*pi*freq_hz."""
        return self.eval_s(2j * math.pi * freq_hz)

    def __call__(self, freq_hz: float) -> complex:
        return self.eval(freq_hz)


class BiquadKind(enum.Enum):
    LPF = "lpf"
    BPF = "bpf"


@dataclass(frozen=True)
class BiquadParams:
    """Natural frequency, quality factor, and response kind of one biquad."""

    omega0: float
    q: float
    kind: BiquadKind = BiquadKind.BPF

    def __post_init__(self):
        _require_positive(omega0=self.omega0, q=self.q)

    def to_tf(self) -> RationalTF:
        if self.kind is BiquadKind.LPF:
            return biquad_lpf(self.omega0, self.q)
        return biquad_bpf_equal_poles(self.omega0, self.q)


def _biquad_den(omega0: float, q: float) -> Polynomial:
    # s^2 + (w0/Q) s + w0^2, ascending order
    return Polynomial([omega0 * omega0, omega0 / q, 1.0])


def biquad_lpf(omega0: float, q: float) -> RationalTF:
    """Second-order low-pass w0^2 / (s^2 + (w0/Q)s + w0^2); unity DC gain."""
    _require_positive(omega0=omega0, q=q)
    return RationalTF(Polynomial([omega0 * omega0]), _biquad_den(omega0, q))


def biquad_bpf_equal_poles(omega0: float, q: float) -> RationalTF:
    """Second-order band-pass w0*s / (s^2 + (w0/Q)s + w0^2); |H(jw0)| = Q."""
    _require_positive(omega0=omega0, q=q)
    return RationalTF(Polynomial([0.0, omega0]), _biquad_den(omega0, q))


def hx_equal_poles(omega0: float, q: float) -> RationalTF:
    """Lossless-integrator tap w0*(s + w0/Q) / (s^2 + (w0/Q)s + w0^2).

    Band-pass-like but lossy at low frequency: H(0) = 1/Q.
    """
    _require_positive(omega0=omega0, q=q)
    return RationalTF(
        Polynomial([omega0 * omega0 / q, omega0]), _biquad_den(omega0, q)
    )


def _two_pole_den(omega1: float, omega2: float) -> Polynomial:
    # s^2 + w2 s + w1 w2; w2 is the lossy integrator pole, w1 the lossless gain
    return Polynomial([omega1 * omega2, omega2, 1.0])


def two_pole_lpf(omega1: float, omega2: float) -> RationalTF:
    """Low-pass w1*w2 / (s^2 + w2*s + w1*w2) of the two-distinct-pole loop."""
    _require_positive(omega1=omega1, omega2=omega2)
    return RationalTF(Polynomial([omega1 * omega2]), _two_pole_den(omega1, omega2))


def two_pole_hx(omega1: float, omega2: float) -> RationalTF:
    """Lossless-integrator tap w1*(s + w2) / (s^2 + w2*s + w1*w2); H(0) = 1."""
    _require_positive(omega1=omega1, omega2=omega2)
    return RationalTF(
        Polynomial([omega1 * omega2, omega1]), _two_pole_den(omega1, omega2)
    )


def two_pole_bpf(omega1: float, omega2: float) -> RationalTF:
    """Ideal band-pass w1*s / (s^2 + w2*s + w1*w2).

    Equals two_pole_hx - two_pole_lpf; peak magnitude at w0 = sqrt(w1*w2) is
    w1/w2 = Q^2 with Q = sqrt(w1/w2).
    """
    _require_positive(omega1=omega1, omega2=omega2)
    return RationalTF(Polynomial([0.0, omega1]), _two_pole_den(omega1, omega2))


def two_pole_q(omega1: float, omega2: float) -> float:
    """Quality factor sqrt(w1/w2) implied by the two-distinct-pole loop."""
    _require_positive(omega1=omega1, omega2=omega2)
    return math.sqrt(omega1 / omega2)


def first_order_lpf(omega: float) -> RationalTF:
    """Lossy integrator 1 / (1 + s/omega)."""
    _require_positive(omega=omega)
    return RationalTF(Polynomial([omega]), Polynomial([omega, 1.0]))


def cascaded_lossy(omega1: float, omega2: float) -> tuple[RationalTF, float]:
    """Cascade of two lossy integrators and its quality factor.

    Returns (w1*w2 / (s^2 + (w1+w2)s + w1*w2), Q) with
    Q = sqrt(w1*w2)/(w1+w2) <= 0.5; the bound is tight at w1 == w2.
    """
    _require_positive(omega1=omega1, omega2=omega2)
    tf = RationalTF(
        Polynomial([omega1 * omega2]),
        Polynomial([omega1 * omega2, omega1 + omega2, 1.0]),
    )
    q = math.sqrt(omega1 * omega2) / (omega1 + omega2)
    return tf, q


def sub(tf_a: RationalTF, tf_b: RationalTF) -> RationalTF:
    """tf_a - tf_b over the product denominator, no cancellation."""
    num = tf_a.num.mul(tf_b.den).add(tf_b.num.mul(tf_a.den).scale(-1.0))
    return RationalTF(num, tf_a.den.mul(tf_b.den))


def scale(tf: RationalTF, k: float) -> RationalTF:
    return RationalTF(tf.num.scale(k), tf.den)


def mul(tf_a: RationalTF, tf_b: RationalTF) -> RationalTF:
    return RationalTF(tf_a.num.mul(tf_b.num), tf_a.den.mul(tf_b.den))


def poles(tf: RationalTF) -> list[complex]:
    """Exact denominator roots for degree 1 or 2 via the closed formulas."""
    c = tf.den.coeffs
    degree = tf.den.degree
    if degree == 1:
        a0, a1 = c
        return [complex(-a0 / a1)]
    if degree == 2:
        a0, a1, a2 = c
        # roots of a2 s^2 + a1 s + a0
        disc = cmath.sqrt(complex(a1 * a1 - 4.0 * a2 * a0))
        return sorted(
            [(-a1 - disc) / (2.0 * a2), (-a1 + disc) / (2.0 * a2)],
            key=lambda z: (z.real, z.imag),
        )
    raise UnsupportedDegreeError(
        f"pole extraction supports denominator degree 1 or 2, got {degree}"
    )
