"""Exception types shared across the package."""


class GmclabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(GmclabError, ValueError):
    """A constructor or operation received a non-positive / malformed parameter."""


class EvaluationSingularError(GmclabError, ArithmeticError):
    """Transfer-function evaluation hit a pole on the jw axis."""


class UnsupportedDegreeError(GmclabError, ValueError):
    """Pole extraction requested for a polynomial degree outside {1, 2}."""


class InfiniteLoopGainError(GmclabError, ZeroDivisionError):
    """DC loop gain is unbounded (zero total output conductance)."""


class SingularSystemError(GmclabError, ArithmeticError):
    """Nodal system is singular; carries the offending node when known."""

    def __init__(self, message: str, node: int | None = None, freq_hz: float | None = None):
        super().__init__(message)
        self.node = node
        self.freq_hz = freq_hz


class GridMismatchError(GmclabError, ValueError):
    """Two responses being compared were sampled on different grids."""


class BandwidthUnresolvedError(GmclabError, ValueError):
    """A -3 dB crossing needed for a bandwidth estimate is outside the grid."""


class NyquistViolationError(GmclabError, ValueError):
    """A channel's center frequency is at or above half the sample rate."""

    def __init__(self, message: str, channel: int | None = None):
        super().__init__(message)
        self.channel = channel


class InputCorruptError(GmclabError, ValueError):
    """Audio samples contain NaN or other unusable values."""


class WavError(GmclabError, ValueError):
    """Base class for WAV parsing failures."""


class MalformedWavError(WavError):
    """File is not a parseable RIFF/WAVE container."""


class TruncatedWavError(WavError):
    """Data chunk ends before the declared sample count."""


class UnsupportedWavError(WavError):
    """Valid WAV, but not 16-bit PCM mono."""


class MultiChannelWavError(UnsupportedWavError):
    """WAV has more than one channel."""


class UnstableConfigurationWarning(UserWarning):
    """Chosen element values put poles in the right half-plane."""
