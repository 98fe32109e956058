"""Frequency-response measurement: sweeps, peak/Q/roll-off metrics, comparison.

The peak estimator interpolates a 3-point parabola in (log10 f, dB) so dB-level
assertions do not depend on grid resolution. Bandwidth-based Q uses the
half-power width (the "-3 dB" points, 20*log10(sqrt(2)) below the peak).
"""

from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BandwidthUnresolvedError,
    GridMismatchError,
    InvalidParameterError,
    UnsupportedDegreeError,
)
from .tf import RationalTF

HALF_POWER_DB = 20.0 * math.log10(math.sqrt(2.0))

CSV_HEADER = "freq_hz,re,im,mag_db,phase_deg"


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float
    f_stop: float
    points: int = 512
    spacing: str = "log"

    def __post_init__(self):
        if not (0.0 < self.f_start < self.f_stop):
            raise InvalidParameterError(
                f"need 0 < f_start < f_stop, got {self.f_start}..{self.f_stop}"
            )
        if self.points < 2:
            raise InvalidParameterError("grid needs at least 2 points")
        if self.spacing not in ("log", "linear"):
            raise InvalidParameterError(f"unknown spacing {self.spacing!r}")

    def frequencies(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.f_start), math.log10(self.f_stop), self.points)
        return np.linspace(self.f_start, self.f_stop, self.points)


DEFAULT_GRID = FrequencyGrid(1.0, 1e6, 512, "log")


def as_frequencies(grid) -> np.ndarray:
    """Accept a FrequencyGrid or any ascending sequence of Hz values."""
    if isinstance(grid, FrequencyGrid):
        return grid.frequencies()
    freqs = np.asarray(list(grid), dtype=float)
    return freqs


@dataclass(frozen=True)
class FrequencyResponse:
    """Ordered (frequency, complex gain) samples from one sweep."""

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if freqs.shape != values.shape or freqs.ndim != 1:
            raise InvalidParameterError("freqs and values must be 1-d and the same length")
        if len(freqs) and not np.all(np.diff(freqs) > 0):
            raise InvalidParameterError("frequencies must be strictly increasing")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.freqs)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def mag_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.values))

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for f, h in zip(self.freqs, self.values):
            mag = abs(h)
            mag_db = 20.0 * math.log10(mag) if mag > 0.0 else float("-inf")
            phase = math.degrees(cmath.phase(h))
            out.write(
                f"{float(f)!r},{float(h.real)!r},{float(h.imag)!r},{mag_db!r},{phase!r}\n"
            )
        return out.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "FrequencyResponse":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CSV_HEADER:
            raise InvalidParameterError("missing or unexpected CSV header")
        freqs, values = [], []
        for ln in lines[1:]:
            f, re, im = ln.split(",")[:3]
            freqs.append(float(f))
            values.append(complex(float(re), float(im)))
        return cls(np.asarray(freqs), np.asarray(values))

    @classmethod
    def read_csv(cls, path) -> "FrequencyResponse":
        with open(path, "r", newline="") as fh:
            return cls.from_csv(fh.read())


@dataclass(frozen=True)
class PeakEstimate:
    f_peak: float
    mag_db: float
    at_boundary: bool = False


@dataclass(frozen=True)
class ResponseMetrics:
    f_peak: float
    peak_mag_db: float
    dc_gain_db: float
    q_estimate: float | None = None
    rolloff_db_per_decade: float | None = None


def sweep_tf(tf: RationalTF, grid=DEFAULT_GRID) -> FrequencyResponse:
    freqs = as_frequencies(grid)
    values = np.asarray([tf.eval(f) for f in freqs], dtype=complex)
    return FrequencyResponse(freqs, values)


def sweep_netlist(netlist, probe_label: str, grid=DEFAULT_GRID) -> FrequencyResponse:
    from .mna import response

    return response(netlist, probe_label, grid)


def peak(resp: FrequencyResponse) -> PeakEstimate:
    """Peak via a 3-point parabola in (log10 f, dB); ties go to the lower f.

    A maximum on a grid boundary is returned as-is with at_boundary set and
    no interpolation.
    """
    if len(resp) < 3:
        raise InvalidParameterError("peak needs at least 3 samples")
    db = resp.mag_db()
    i = int(np.argmax(db))
    if i == 0 or i == len(resp) - 1:
        return PeakEstimate(float(resp.freqs[i]), float(db[i]), at_boundary=True)
    x = np.log10(resp.freqs[i - 1 : i + 2])
    y = db[i - 1 : i + 2]
    a, b, c = np.polyfit(x, y, 2)
    if a >= 0.0:
        # Degenerate (flat or concave-up) neighborhood; keep the raw sample.
        return PeakEstimate(float(resp.freqs[i]), float(db[i]))
    x_peak = -b / (2.0 * a)
    y_peak = c - b * b / (4.0 * a)
    return PeakEstimate(float(10.0 ** x_peak), float(y_peak))


def _cross(freqs, db, start: int, step: int, target: float) -> float:
    """Log-f position where db crosses target, scanning from start by step."""
    i = start
    while 0 <= i + step < len(db):
        j = i + step
        if db[j] <= target:
            x_i, x_j = math.log10(freqs[i]), math.log10(freqs[j])
            if db[j] == db[i]:
                return 10.0 ** x_j
            frac = (target - db[i]) / (db[j] - db[i])
            return 10.0 ** (x_i + frac * (x_j - x_i))
        i = j
    raise BandwidthUnresolvedError(
        f"no {target:.2f} dB crossing on the {'high' if step > 0 else 'low'} side"
    )


def q_from_bandwidth(resp: FrequencyResponse) -> float:
    """Q = f_peak / half-power bandwidth, crossings interpolated in log-log."""
    pk = peak(resp)
    if pk.at_boundary:
        raise BandwidthUnresolvedError("response has no interior peak")
    db = resp.mag_db()
    i = int(np.argmax(db))
    target = pk.mag_db - HALF_POWER_DB
    f_lo = _cross(resp.freqs, db, i, -1, target)
    f_hi = _cross(resp.freqs, db, i, +1, target)
    return pk.f_peak / (f_hi - f_lo)


def rolloff(resp: FrequencyResponse, f_a: float, f_b: float) -> float:
    """Least-squares slope of dB versus log10(f) over [f_a, f_b], in dB/decade."""
    if not (f_a < f_b):
        raise InvalidParameterError("need f_a < f_b")
    mask = (resp.freqs >= f_a) & (resp.freqs <= f_b)
    if int(mask.sum()) < 2:
        raise InvalidParameterError("need at least 2 samples in the roll-off band")
    return float(np.polyfit(np.log10(resp.freqs[mask]), resp.mag_db()[mask], 1)[0])


def compare(resp_a: FrequencyResponse, resp_b: FrequencyResponse) -> float:
    """max |h_a - h_b| over the grid, normalized by max |h_b| over the grid."""
    if not np.array_equal(resp_a.freqs, resp_b.freqs):
        raise GridMismatchError("responses were sampled on different grids")
    norm = float(np.max(np.abs(resp_b.values)))
    diff = float(np.max(np.abs(resp_a.values - resp_b.values)))
    if norm == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / norm


def center_frequency(tf: RationalTF) -> float:
    """sqrt(a0/a2) / 2pi of a degree-2 denominator, in Hz."""
    if tf.den.degree != 2:
        raise UnsupportedDegreeError(
            f"center frequency needs a degree-2 denominator, got degree {tf.den.degree}"
        )
    a0, _, a2 = tf.den.coeffs
    ratio = a0 / a2
    if ratio <= 0.0:
        raise InvalidParameterError("denominator coefficients must have matching signs")
    return math.sqrt(ratio) / (2.0 * math.pi)


def summarize(
    resp: FrequencyResponse, rolloff_band: tuple[float, float] | None = None
) -> ResponseMetrics:
    pk = peak(resp)
    dc_db = float(resp.mag_db()[0])
    try:
        q = q_from_bandwidth(resp)
    except BandwidthUnresolvedError:
        q = None
    slope = rolloff(resp, *rolloff_band) if rolloff_band else None
    return ResponseMetrics(pk.f_peak, pk.mag_db, dc_db, q, slope)
