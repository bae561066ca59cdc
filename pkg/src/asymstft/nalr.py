"""
NAL-R linear hearing-aid prescription and its FIR realization.

The prescription maps an audiogram (dB HL at six audiometric frequencies)
to insertion gains::

    X       = 0.05 * (HL(500) + HL(1000) + HL(2000))
    gain(f) = max(0, X + 0.31 * HL(f) + k(f))

with ``k = [-17, -8, 1, -1, -2, -2]`` dB at 250 .. 6000 Hz. The gains are
turned into a linear-phase FIR by frequency sampling and applied with the
filter's group delay removed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from asymstft.errors import AudiogramError, ParameterError, ShapeError

CATALOG_FREQUENCIES = np.array([250.0, 500.0, 1000.0, 2000.0, 4000.0, 6000.0])
NALR_CORRECTION_DB = np.array([-17.0, -8.0, 1.0, -1.0, -2.0, -2.0])
HL_RANGE = (0.0, 120.0)
DEFAULT_NFIR = 256


@dataclass(frozen=True, eq=False)
class Audiogram:
    """Hearing levels of one ear in dB HL, ordered like :data:`CATALOG_FREQUENCIES`.

    Levels are clamped to [0, 120] dB HL on construction.
    """

    levels: np.ndarray
    frequencies: np.ndarray = field(default_factory=lambda: CATALOG_FREQUENCIES.copy())

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=np.float64)
        if freqs.shape != CATALOG_FREQUENCIES.shape or np.any(freqs != CATALOG_FREQUENCIES):
            raise AudiogramError(
                f"audiogram frequencies must be {CATALOG_FREQUENCIES.astype(int).tolist()} Hz"
            )
        try:
            levels = np.asarray(self.levels, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise AudiogramError(f"audiogram levels are not numeric: {exc}") from None
        if levels.shape != CATALOG_FREQUENCIES.shape:
            raise AudiogramError(f"audiogram needs 6 levels, got shape {levels.shape}")
        if not np.all(np.isfinite(levels)):
            raise AudiogramError("audiogram levels must be finite")
        levels = np.clip(levels, *HL_RANGE)
        levels.flags.writeable = False
        freqs.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "frequencies", freqs)

    @classmethod
    def flat(cls, level: float) -> "Audiogram":
        return cls(np.full(6, float(level)))


def read_audiograms(path: str | os.PathLike) -> list[Audiogram]:
    """Parse an audiogram file: one line per ear, six whitespace-separated dB HL values.

    Blank lines and ``#`` comments are ignored.
    """
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise AudiogramError(f"cannot read audiogram {path}: {exc.strerror}") from None
    ears = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values = [float(tok) for tok in line.split()]
        except ValueError:
            raise AudiogramError(f"{path}:{lineno}: non-numeric hearing level") from None
        if len(values) != 6:
            raise AudiogramError(f"{path}:{lineno}: expected 6 levels, got {len(values)}")
        ears.append(Audiogram(np.array(values)))
    if not ears:
        raise AudiogramError(f"{path}: no audiogram lines")
    return ears


def nalr_gains(audiogram: Audiogram) -> np.ndarray:
    """NAL-R insertion gains in dB at the six catalog frequencies."""
    if not isinstance(audiogram, Audiogram):
        raise ParameterError(f"expected an Audiogram, got {type(audiogram).__name__}")
    hl = audiogram.levels
    x = 0.05 * (hl[1] + hl[2] + hl[3])
    return np.maximum(0.0, x + 0.31 * hl + NALR_CORRECTION_DB)


def target_response_db(gains_db, freqs: np.ndarray) -> np.ndarray:
    """Interpolate catalog gains linearly in log frequency, flat outside 250..6000 Hz."""
    f = np.clip(np.asarray(freqs, dtype=np.float64), CATALOG_FREQUENCIES[0], CATALOG_FREQUENCIES[-1])
    return np.interp(np.log(f), np.log(CATALOG_FREQUENCIES), np.asarray(gains_db, dtype=np.float64))


def design_fir(gains_db, nfir: int = DEFAULT_NFIR, sample_rate: float = 32000.0) -> np.ndarray:
    """
    Linear-phase FIR of ``nfir + 1`` taps realizing ``gains_db`` by frequency sampling.

    The target magnitude is sampled at ``j * fs / nfir`` for
    ``j = 0 .. nfir/2`` with zero phase and inverted with a real DFT of
    size ``nfir``. Centering the result puts the lag ``+-nfir/2`` term on
    both end taps, so it is split between them; that keeps the response
    exact at every sampled frequency. At 32 kHz and ``nfir = 256`` the grid
    spacing is 125 Hz and all catalog frequencies are sampled exactly.

    Parameters
    ----------
    gains_db : array_like, shape (6,)
        Gains at :data:`CATALOG_FREQUENCIES`.
    nfir : int
        Even filter order (>= 32); the group delay is ``nfir // 2``.
    sample_rate : float
        Must be at least twice the highest catalog frequency.

    Returns
    -------
    taps : ndarray, shape (nfir + 1,)
        Exactly symmetric about the center tap.
    """
    gains_db = np.asarray(gains_db, dtype=np.float64)
    if gains_db.shape != CATALOG_FREQUENCIES.shape:
        raise ParameterError(f"need 6 gains, got shape {gains_db.shape}")
    if isinstance(nfir, bool) or int(nfir) != nfir or nfir < 32 or nfir % 2:
        raise ParameterError(f"nfir must be an even integer >= 32, got {nfir}")
    nfir = int(nfir)
    if sample_rate < 2 * CATALOG_FREQUENCIES[-1]:
        raise ParameterError(
            f"sample rate {sample_rate} Hz cannot represent {CATALOG_FREQUENCIES[-1]:.0f} Hz"
        )
    freqs = np.arange(nfir // 2 + 1) * sample_rate / nfir
    magnitude = 10.0 ** (target_response_db(gains_db, freqs) / 20.0)
    circular = np.fft.irfft(magnitude, n=nfir)
    taps = np.empty(nfir + 1)
    taps[:nfir] = np.roll(circular, nfir // 2)
    taps[0] *= 0.5
    taps[nfir] = taps[0]
    return 0.5 * (taps + taps[::-1])


@dataclass(frozen=True, eq=False)
class NalrPrescription:
    gains_db: np.ndarray
    fir: np.ndarray
    delay: int

    @classmethod
    def from_audiogram(
        cls, audiogram: Audiogram, nfir: int = DEFAULT_NFIR, sample_rate: float = 32000.0
    ) -> "NalrPrescription":
        gains = nalr_gains(audiogram)
        return cls(gains, design_fir(gains, nfir, sample_rate), int(nfir) // 2)


def apply_amplification(
    signal,
    audiograms: Audiogram | Sequence[Audiogram],
    nfir: int = DEFAULT_NFIR,
    sample_rate: float = 32000.0,
) -> np.ndarray:
    """Filter each channel with its ear's NAL-R FIR, time-aligned with the input.

    ``signal`` is 1-D (one audiogram) or ``(channels, n)`` with one audiogram
    per channel, e.g. ``[left, right]`` for stereo.
    """
    x = np.asarray(signal, dtype=np.float64)
    if isinstance(audiograms, Audiogram):
        audiograms = [audiograms]
    audiograms = list(audiograms)
    mono = x.ndim == 1
    x2 = x[np.newaxis, :] if mono else x
    if x2.ndim != 2:
        raise ShapeError(f"signal must be 1-D or (channels, n), got shape {x.shape}")
    if len(audiograms) != x2.shape[0]:
        raise ShapeError(f"{x2.shape[0]} channel(s) but {len(audiograms)} audiogram ear(s)")
    if not np.all(np.isfinite(x2)):
        raise ParameterError("signal contains non-finite samples")
    n = x2.shape[1]
    out = np.zeros_like(x2)
    for ch, audiogram in enumerate(audiograms):
        rx = NalrPrescription.from_audiogram(audiogram, nfir, sample_rate)
        if n:
            out[ch] = np.convolve(x2[ch], rx.fir)[rx.delay : rx.delay + n]
    return out[0] if mono else out
