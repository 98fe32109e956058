"""Log-spaced band-pass filter bank turning PCM audio into envelope features.

Channel centers are geometrically spaced, each channel is a second-order
band-pass prototype discretized with a prewarped bilinear transform (the
discrete magnitude at the channel center equals the analog one exactly), and
the feature chain per channel is full-wave rectification, a one-pole smoother,
and decimation to the frame rate.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import (
    InputCorruptError,
    InvalidParameterError,
    MalformedWavError,
    MultiChannelWavError,
    NyquistViolationError,
    TruncatedWavError,
    UnsupportedWavError,
)
from .tf import RationalTF, biquad_bpf_equal_poles, scale, two_pole_bpf

PROTOTYPES = ("equal_pole_bpf", "two_pole_bpf")


@dataclass(frozen=True)
class FilterBankSpec:
    """Bank design plus run-time settings; maps 1:1 onto the bank JSON file."""

    channels: int
    f_lo_hz: float
    f_hi_hz: float
    q: float
    prototype: str = "equal_pole_bpf"
    fs_hz: float | None = None
    smooth_hz: float = 25.0
    frame_rate_hz: float = 100.0
    log_compress: bool = False
    normalize_peak: bool = False

    def __post_init__(self):
        if self.channels < 1:
            raise InvalidParameterError("channels must be >= 1")
        if not (0.0 < self.f_lo_hz < self.f_hi_hz):
            raise InvalidParameterError("need 0 < f_lo_hz < f_hi_hz")
        if self.q <= 0:
            raise InvalidParameterError("q must be > 0")
        if self.prototype not in PROTOTYPES:
            raise InvalidParameterError(
                f"prototype must be one of {PROTOTYPES}, got {self.prototype!r}"
            )

    def envelope(self) -> "EnvelopeConfig":
        return EnvelopeConfig(self.smooth_hz, self.frame_rate_hz, self.log_compress)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FilterBankSpec":
        doc = json.loads(text)
        missing = {"channels", "f_lo_hz", "f_hi_hz", "q"} - set(doc)
        if missing:
            raise InvalidParameterError(f"bank spec is missing {sorted(missing)}")
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in doc.items() if k in known})


@dataclass(frozen=True)
class EnvelopeConfig:
    smooth_hz: float = 25.0
    frame_rate_hz: float = 100.0
    log_compress: bool = False
    eps: float = 1e-6


def channel_centers(spec: FilterBankSpec) -> list[float]:
    """Geometric spacing f_lo * (f_hi/f_lo)^(k/(n-1)); one channel sits at f_lo."""
    n = spec.channels
    if n == 1:
        return [spec.f_lo_hz]
    ratio = spec.f_hi_hz / spec.f_lo_hz
    return [spec.f_lo_hz * ratio ** (k / (n - 1)) for k in range(n)]


def design_bank(spec: FilterBankSpec) -> list[tuple[float, RationalTF]]:
    """Per channel: (center frequency, continuous-time band-pass prototype)."""
    bank = []
    for f0 in channel_centers(spec):
        w0 = 2.0 * math.pi * f0
        if spec.prototype == "equal_pole_bpf":
            tf = biquad_bpf_equal_poles(w0, spec.q)
            peak_gain = spec.q
        else:
            tf = two_pole_bpf(spec.q * w0, w0 / spec.q)
            peak_gain = spec.q * spec.q
        if spec.normalize_peak:
            tf = scale(tf, 1.0 / peak_gain)
        bank.append((f0, tf))
    return bank


@dataclass
class DiscreteBiquad:
    """z-domain biquad (a0 normalized to 1) with direct-form-II-transposed state."""

    b0: float
    b1: float
    b2: float
    a1: float
    a2: float
    state: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        # Schur-Cohn stability test for a real quadratic: |a2|<1 and |a1|<1+a2.
        if not (abs(self.a2) < 1.0 and abs(self.a1) < 1.0 + self.a2):
            raise InvalidParameterError(
                f"discrete poles are not inside the unit circle (a1={self.a1}, a2={self.a2})"
            )

    @property
    def ba(self) -> tuple[list[float], list[float]]:
        return [self.b0, self.b1, self.b2], [1.0, self.a1, self.a2]

    def reset(self) -> None:
        self.state = np.zeros(2)

    def process(self, samples: np.ndarray) -> np.ndarray:
        b, a = self.ba
        out, self.state = lfilter(b, a, samples, zi=self.state)
        return out

    def response_at(self, freq_hz: float, fs: float) -> complex:
        z_inv = np.exp(-2j * math.pi * freq_hz / fs)
        b, a = self.ba
        return (b[0] + b[1] * z_inv + b[2] * z_inv**2) / (
            a[0] + a[1] * z_inv + a[2] * z_inv**2
        )

    def poles(self) -> np.ndarray:
        return np.roots([1.0, self.a1, self.a2])


def discretize(tf: RationalTF, f0: float, fs: float, channel: int | None = None) -> DiscreteBiquad:
    """Bilinear transform, prewarped so |H_d| equals |H_ct| exactly at f0.

    Substitutes s = K (1 - z^-1)/(1 + z^-1) with K = w0/tan(pi f0/fs), which
    maps s = j*w0 onto the unit circle at f0.
    """
    if not (0.0 < f0 < fs / 2.0):
        raise NyquistViolationError(
            f"channel{'' if channel is None else ' ' + str(channel)} center {f0} Hz "
            f"is not below fs/2 = {fs / 2.0} Hz",
            channel=channel,
        )
    if tf.den.degree != 2 or tf.num.degree > 2:
        raise InvalidParameterError("discretize expects a biquad (degree <= 2 over 2)")
    k = 2.0 * math.pi * f0 / math.tan(math.pi * f0 / fs)
    n = list(tf.num.coeffs) + [0.0] * (3 - len(tf.num.coeffs))
    d = list(tf.den.coeffs)

    def bilinear(c):
        c0, c1, c2 = c
        return (
            c0 + c1 * k + c2 * k * k,
            2.0 * c0 - 2.0 * c2 * k * k,
            c0 - c1 * k + c2 * k * k,
        )

    b = bilinear(n)
    a = bilinear(d)
    return DiscreteBiquad(b[0] / a[0], b[1] / a[0], b[2] / a[0], a[1] / a[0], a[2] / a[0])


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-channel, per-frame envelope values (channels x frames)."""

    frame_rate_hz: float
    values: np.ndarray
    log_compressed: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidParameterError("values must be channels x frames")
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        header = "time_s," + ",".join(f"ch{c:02d}" for c in range(self.channels))
        lines = [header]
        for i in range(self.frames):
            t = i / self.frame_rate_hz
            row = ",".join(repr(float(v)) for v in self.values[:, i])
            lines.append(f"{t!r},{row}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def run_bank(
    bank: list[DiscreteBiquad],
    samples: np.ndarray,
    fs: float,
    envelope_cfg: EnvelopeConfig | None = None,
) -> FeatureMatrix:
    """Filter, full-wave rectify, smooth, and decimate each channel.

    Channel state is reset before processing; identical audio gives
    bit-identical features. Frames are sampled at the end of each hop window,
    giving floor(len(samples)/hop) frames.
    """
    if not bank:
        raise InvalidParameterError("bank must not be empty")
    cfg = envelope_cfg or EnvelopeConfig()
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise InvalidParameterError("samples must be a 1-d array")
    if samples.size and not np.all(np.isfinite(samples)):
        raise InputCorruptError("samples contain NaN or infinite values")
    hop = max(1, round(fs / cfg.frame_rate_hz))
    n_frames = samples.size // hop
    values = np.zeros((len(bank), n_frames))
    if n_frames:
        # One-pole smoother y[n] = (1-p) x[n] + p y[n-1], pole matched to the
        # cutoff: p = exp(-2 pi fc / fs); unity DC gain.
        p = math.exp(-2.0 * math.pi * cfg.smooth_hz / fs)
        for ch, biquad in enumerate(bank):
            biquad.reset()
            rectified = np.abs(biquad.process(samples))
            env = lfilter([1.0 - p], [1.0, -p], rectified)
            values[ch] = env[hop - 1 :: hop][:n_frames]
    if cfg.log_compress:
        values = np.log1p(values / cfg.eps)
    return FeatureMatrix(cfg.frame_rate_hz, values, log_compressed=cfg.log_compress)


def filter_outputs(bank: list[DiscreteBiquad], samples: np.ndarray) -> np.ndarray:
    """Raw per-channel filter output (channels x samples), no envelope chain."""
    if not bank:
        raise InvalidParameterError("bank must not be empty")
    samples = np.asarray(samples, dtype=float)
    if samples.size and not np.all(np.isfinite(samples)):
        raise InputCorruptError("samples contain NaN or infinite values")
    out = np.zeros((len(bank), samples.size))
    for ch, biquad in enumerate(bank):
        biquad.reset()
        out[ch] = biquad.process(samples)
    return out


def build_discrete_bank(spec: FilterBankSpec, fs: float) -> list[DiscreteBiquad]:
    """Design and discretize every channel; collects all Nyquist offenders."""
    designed = design_bank(spec)
    bad = [(ch, f0) for ch, (f0, _) in enumerate(designed) if f0 >= fs / 2.0]
    if bad:
        listing = ", ".join(f"channel {ch} ({f0:g} Hz)" for ch, f0 in bad)
        raise NyquistViolationError(
            f"center frequencies at or above fs/2 = {fs / 2.0:g} Hz: {listing}; "
            "resample the audio or lower f_hi_hz",
            channel=bad[0][0],
        )
    return [discretize(tf, f0, fs, channel=ch) for ch, (f0, tf) in enumerate(designed)]


# --- WAV input --------------------------------------------------------------
# Hand-parsed so malformed containers, truncated data, and unsupported
# encodings each raise their own error type.


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM mono RIFF/WAVE file; samples scaled by 1/32768."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedWavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    offset = 12
    while offset + 8 <= len(raw):
        chunk_id = raw[offset : offset + 4]
        (size,) = struct.unpack_from("<I", raw, offset + 4)
        body = raw[offset + 8 : offset + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedWavError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = (size, body)
        offset += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or data is None:
        raise MalformedWavError(f"{path}: missing fmt or data chunk")
    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedWavError(f"{path}: not PCM (format tag {audio_format})")
    if channels != 1:
        raise MultiChannelWavError(f"{path}: expected mono, got {channels} channels")
    if bits != 16:
        raise UnsupportedWavError(f"{path}: expected 16-bit samples, got {bits}-bit")

    declared, body = data
    if len(body) < declared or declared % 2 != 0:
        raise TruncatedWavError(
            f"{path}: data chunk declares {declared} bytes, {len(body)} present"
        )
    samples = np.frombuffer(body[:declared], dtype="<i2").astype(float) / 32768.0
    return samples, sample_rate


def write_wav(path, samples: np.ndarray, fs: int) -> None:
    """Write float samples in [-1, 1] as 16-bit PCM mono (test/demo helper)."""
    pcm = np.clip(np.asarray(samples, dtype=float) * 32768.0, -32768, 32767)
    body = pcm.astype("<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(body)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, int(fs), int(fs) * 2, 2, 16)
    data = b"data" + struct.pack("<I", len(body)) + body
    with open(path, "wb") as fh:
        fh.write(header + fmt + data)
