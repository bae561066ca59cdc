"""
Frame processors: the stage between STFT analysis and synthesis.

A processor maps one :class:`~asymstft.stft.SpectrumFrame` to another with
the same bin count and channel. Processors may keep state, but output frame
``k`` must depend only on frames ``0..k`` of the same channel, and identical
frame histories must give identical outputs. Enhancement networks plug in
here by subclassing :class:`FrameProcessor`.
"""

from __future__ import annotations

import abc
import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from asymstft.errors import ParameterError, ShapeError
from asymstft.stft import SpectrumFrame

EPS = 1e-12


class FrameProcessor(abc.ABC):
    @abc.abstractmethod
    def process(self, frame: SpectrumFrame) -> SpectrumFrame:
        ...

    def __call__(self, frame: SpectrumFrame) -> SpectrumFrame:
        return self.process(frame)


class IdentityProcessor(FrameProcessor):
    def process(self, frame: SpectrumFrame) -> SpectrumFrame:
        return frame


@dataclass(frozen=True)
class SuppressionParams:
    """Noise-floor smoothing ``alpha``, over-subtraction ``beta`` and gain floor ``g_min``."""

    alpha: float = 0.98
    beta: float = 1.0
    g_min: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.beta > 0.0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not 0.0 < self.g_min <= 1.0:
            raise ParameterError(f"g_min must lie in (0, 1], got {self.g_min}")


class MagnitudeGainProcessor(FrameProcessor):
    """Per-bin spectral-subtraction style gain with a recursive noise floor.

    For each channel and bin the floor follows::

        N[k] = min(alpha * N[k-1] + (1 - alpha) * |X[k]|, |X[k]|)

    starting from the first frame's magnitude, and the frame is scaled by
    ``max(g_min, 1 - beta * N[k] / max(|X[k]|, eps))``. The phase is left
    untouched. Note that a perfectly stationary component (noise *or* a
    steady tone) is absorbed into the floor and ends up near ``g_min``;
    components are only passed while they rise above the tracked floor.
    """

    def __init__(self, params: SuppressionParams | None = None):
        self.params = SuppressionParams() if params is None else params
        self._floor: dict[int, np.ndarray] = {}
        self.last_gain: dict[int, np.ndarray] = {}

    def process(self, frame: SpectrumFrame) -> SpectrumFrame:
        p = self.params
        bins = np.asarray(frame.bins)
        mag = np.abs(bins)
        floor = self._floor.get(frame.channel)
        if floor is None:
            floor = mag.copy()
        else:
            if floor.shape != mag.shape:
                raise ShapeError(f"bin count changed from {floor.shape[0]} to {mag.shape[0]}")
            floor = np.minimum(p.alpha * floor + (1.0 - p.alpha) * mag, mag)
        self._floor[frame.channel] = floor
        gain = np.maximum(p.g_min, 1.0 - p.beta * floor / np.maximum(mag, EPS))
        self.last_gain[frame.channel] = gain
        # scale the parts separately: a complex multiply can flip the sign of zeros
        out = np.empty_like(bins)
        out.real = bins.real * gain
        out.imag = bins.imag * gain
        return dataclasses.replace(frame, bins=out)


class ProcessorChain(FrameProcessor):
    def __init__(self, processors: Sequence[FrameProcessor]):
        processors = list(processors)
        if not processors:
            raise ParameterError("processor chain needs at least one processor")
        self.processors = processors

    def process(self, frame: SpectrumFrame) -> SpectrumFrame:
        for processor in self.processors:
            frame = processor(frame)
        return frame


def identity_processor() -> IdentityProcessor:
    return IdentityProcessor()


def magnitude_gain_processor(params: SuppressionParams | None = None, **kwargs) -> MagnitudeGainProcessor:
    """Build a :class:`MagnitudeGainProcessor` from params or keyword overrides."""
    if params is not None and kwargs:
        raise ParameterError("pass either a SuppressionParams or keyword overrides, not both")
    return MagnitudeGainProcessor(params if params is not None else SuppressionParams(**kwargs))


def chain(processors: Sequence[FrameProcessor]) -> ProcessorChain:
    return ProcessorChain(processors)
