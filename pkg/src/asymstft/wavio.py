"""WAV reading/writing and sample-rate conversion for the command-line tool.

Samples are handled as float64 arrays of shape ``(channels, n)`` scaled to
[-1, 1). Reading accepts PCM16, PCM24, PCM32 and IEEE float; writing
produces IEEE float32 or dithered PCM16.
"""

from __future__ import annotations

import os
import warnings
from fractions import Fraction

import numpy as np
from scipy.io import wavfile
from scipy.signal import firwin, resample_poly

from asymstft.errors import InputOutputError, ParameterError, UnsupportedFormatError

TAPS_PER_PHASE = 64
DITHER_SEED = 0x5EED

_INT_SCALE = {np.dtype(np.int16): 2.0**15, np.dtype(np.int32): 2.0**31}


def read_wav(path: str | os.PathLike) -> tuple[int, np.ndarray]:
    """Return ``(sample_rate, samples)`` with samples as float64 ``(channels, n)``."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(os.fspath(path))
    except FileNotFoundError:
        raise InputOutputError(f"{path}: no such file") from None
    except OSError as exc:
        raise InputOutputError(f"{path}: {exc}") from None
    except ValueError as exc:
        raise UnsupportedFormatError(f"{path}: {exc}") from None
    if data.dtype in _INT_SCALE:
        samples = data.astype(np.float64) / _INT_SCALE[data.dtype]
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported sample format {data.dtype}")
    samples = samples[:, np.newaxis] if samples.ndim == 1 else samples
    return int(rate), np.ascontiguousarray(samples.T)


def write_wav(path: str | os.PathLike, sample_rate: int, samples: np.ndarray, pcm16: bool = False) -> None:
    """Write ``(channels, n)`` samples as float32, or as TPDF-dithered PCM16.

    The dither generator is seeded with a constant so output files are
    reproducible byte for byte.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[np.newaxis, :]
    if pcm16:
        rng = np.random.default_rng(DITHER_SEED)
        dither = rng.random(samples.shape) - rng.random(samples.shape)
        data = np.clip(np.round(samples * 32768.0 + dither), -32768, 32767).astype(np.int16)
    else:
        data = samples.astype(np.float32)
    try:
        wavfile.write(os.fspath(path), int(sample_rate), np.ascontiguousarray(data.T))
    except OSError as exc:
        raise InputOutputError(f"{path}: {exc}") from None


def resample(samples: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    """Windowed-sinc polyphase resampling along the last axis.

    The prototype low-pass has ``TAPS_PER_PHASE`` taps per polyphase branch
    (Kaiser window, beta 8.6) and cuts off at the lower of the two Nyquist
    frequencies.
    """
    if rate_in <= 0 or rate_out <= 0:
        raise ParameterError(f"sample rates must be positive, got {rate_in} and {rate_out}")
    if rate_in == rate_out:
        return np.array(samples, dtype=np.float64)
    ratio = Fraction(int(rate_out), int(rate_in))
    up, down = ratio.numerator, ratio.denominator
    taps = firwin(TAPS_PER_PHASE * up + 1, 1.0 / max(up, down), window=("kaiser", 8.6))
    return resample_poly(np.asarray(samples, dtype=np.float64), up, down, axis=-1, window=taps)
