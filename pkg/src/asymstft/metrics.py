"""
Evaluation metrics: multi-resolution magnitude loss and delay/SNR measurement.

The loss compares magnitude spectrograms at several resolutions. Each
resolution uses a periodic Hann window, hop ``window // hop_divisor`` and
only full frames (no padding)::

    L_r  = mean_{frames, bins} (|STFT_r(ref)| - |STFT_r(est)|) ** 2
    loss = mean_r L_r
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import correlate, correlation_lags

from asymstft.errors import ParameterError, ShapeError, UndefinedSnrError

DEFAULT_WINDOW_SIZES = (128, 256, 512, 1024, 2048)


@dataclass(frozen=True)
class MultiResConfig:
    window_sizes: tuple[int, ...] = DEFAULT_WINDOW_SIZES
    hop_divisor: int = 4

    def __post_init__(self):
        sizes = tuple(int(w) for w in self.window_sizes)
        if not sizes:
            raise ParameterError("need at least one window size")
        if self.hop_divisor < 1:
            raise ParameterError(f"hop_divisor must be positive, got {self.hop_divisor}")
        for w in sizes:
            if w % 2 or w < 2 * self.hop_divisor:
                raise ParameterError(f"window size {w} must be even and >= {2 * self.hop_divisor}")
        object.__setattr__(self, "window_sizes", sizes)

    def hop(self, window_size: int) -> int:
        return window_size // self.hop_divisor


def periodic_hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def magnitude_spectrogram(x: np.ndarray, window_size: int, hop: int) -> np.ndarray:
    """``(frames, window_size // 2 + 1)`` magnitudes of the Hann-windowed frames of ``x``."""
    frames = sliding_window_view(np.asarray(x, dtype=np.float64), window_size)[::hop]
    return np.abs(np.fft.rfft(frames * periodic_hann(window_size), axis=-1))


def _check_pair(reference, estimate, min_length: int = 1) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(reference, dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    if ref.ndim != 1 or est.ndim != 1:
        raise ShapeError(f"signals must be 1-D, got {ref.shape} and {est.shape}")
    if ref.shape != est.shape:
        raise ShapeError(f"length mismatch: {ref.size} vs {est.size}")
    if ref.size < min_length:
        raise ShapeError(f"signals of {ref.size} samples shorter than required {min_length}")
    return ref, est


def multires_mag_loss_terms(reference, estimate, config: MultiResConfig | None = None) -> dict[int, float]:
    """Per-resolution terms ``{window_size: L_r}`` of :func:`multires_mag_loss`."""
    config = MultiResConfig() if config is None else config
    ref, est = _check_pair(reference, estimate, max(config.window_sizes))
    terms = {}
    for w in config.window_sizes:
        hop = config.hop(w)
        diff = magnitude_spectrogram(ref, w, hop) - magnitude_spectrogram(est, w, hop)
        terms[w] = float(np.mean(diff**2))
    return terms


def multires_mag_loss(reference, estimate, config: MultiResConfig | None = None) -> float:
    terms = multires_mag_loss_terms(reference, estimate, config)
    return float(np.mean(list(terms.values())))


class DelaySnr(NamedTuple):
    delay: int
    snr_db: float


def measure_delay_snr(reference, estimate, max_delay: int) -> DelaySnr:
    """Find the lag in ``[0, max_delay]`` aligning ``estimate`` to ``reference`` and the SNR there.

    The delay maximizes ``sum_n ref[n] * est[n + d]``. The SNR compares
    ``ref[: n - d]`` with ``est[d:]``; it is ``math.inf`` when the residual
    is exactly zero.

    Raises
    ------
    UndefinedSnrError
        If the reference is all zeros.
    """
    ref, est = _check_pair(reference, estimate)
    n = ref.size
    max_delay = int(max_delay)
    if not 0 <= max_delay < n / 2:
        raise ParameterError(f"max_delay must lie in [0, {n / 2}), got {max_delay}")
    if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(est))):
        raise ParameterError("signals must be finite")
    if not np.any(ref):
        raise UndefinedSnrError("reference is all zeros; SNR undefined")
    xcorr = correlate(est, ref, mode="full")
    lags = correlation_lags(n, n, mode="full")
    window = (lags >= 0) & (lags <= max_delay)
    delay = int(lags[window][np.argmax(xcorr[window])])
    aligned = ref[: n - delay]
    residual = aligned - est[delay:]
    noise = float(np.sum(residual**2))
    signal = float(np.sum(aligned**2))
    if noise == 0.0:
        return DelaySnr(delay, math.inf)
    if signal == 0.0:
        raise UndefinedSnrError("reference is zero over the aligned region")
    return DelaySnr(delay, 10.0 * math.log10(signal / noise))
