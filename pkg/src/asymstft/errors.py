"""Exception hierarchy shared by the library and the command-line tool.

Every class carries the process exit code the CLI uses when the error
escapes a subcommand, so the code table lives in exactly one place.
"""


class AsymStftError(Exception):
    exit_code = 1


class ParameterError(AsymStftError, ValueError):
    """Invalid parameter value or conflicting options."""

    exit_code = 2


class InputOutputError(AsymStftError, OSError):
    """A file could not be opened, read or written."""

    exit_code = 3


class UnsupportedFormatError(AsymStftError, ValueError):
    """WAV encoding other than PCM16, PCM24, PCM32 or IEEE float."""

    exit_code = 4


class SampleRateMismatchError(AsymStftError, ValueError):
    exit_code = 5


class AudiogramError(AsymStftError, ValueError):
    """Missing or malformed audiogram."""

    exit_code = 6


class ShapeError(AsymStftError, ValueError):
    """Array shape, length or channel count does not match expectations."""

    exit_code = 7


class VerificationError(AsymStftError):
    """A verification command measured a value outside its tolerance."""

    exit_code = 8


class DegenerateWindowError(AsymStftError, ValueError):
    """The overlap-add envelope vanishes at some phase; reconstruction is impossible."""

    exit_code = 9


class StreamStateError(AsymStftError, RuntimeError):
    """Streaming engine misuse: out-of-order frames, use after flush, double flush."""

    exit_code = 10


class UndefinedSnrError(AsymStftError, ValueError):
    exit_code = 11


EXIT_CODES = {
    "ok": 0,
    "internal": AsymStftError.exit_code,
    "parameter": ParameterError.exit_code,
    "io": InputOutputError.exit_code,
    "unsupported-format": UnsupportedFormatError.exit_code,
    "sample-rate-mismatch": SampleRateMismatchError.exit_code,
    "audiogram": AudiogramError.exit_code,
    "shape": ShapeError.exit_code,
    "verification-failed": VerificationError.exit_code,
    "degenerate-window": DegenerateWindowError.exit_code,
    "stream-state": StreamStateError.exit_code,
    "undefined-snr": UndefinedSnrError.exit_code,
}
