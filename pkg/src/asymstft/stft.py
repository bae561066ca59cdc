"""
Streaming STFT analysis and overlap-add synthesis with the asymmetric pair.

Timing model
------------
Input arrives one hop (``R`` samples) at a time. After every completed hop
:meth:`StreamingStft.analyze` emits one frame made of the most recent ``L``
input samples (zero history before the stream starts) weighted by ``w1``.
:meth:`StreamingStft.synthesize` turns a frame back into time samples,
weights them by ``w2`` and overlap-adds the last ``2R`` of them. Each call
returns the ``R`` samples that were completed by the previous frame, so the
output stream is the input stream delayed by exactly ``2R`` samples: one hop
to collect the block plus one hop of overlap-add.

All processing is per frame and per channel with 1-D transforms, which keeps
the results bit-identical regardless of how the input is chunked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from asymstft.buffers import RingBuffer
from asymstft.errors import ParameterError, ShapeError, StreamStateError
from asymstft.window import WindowPair, WindowParams, make_window_pair, normalize_synthesis

FrameFn = Callable[["SpectrumFrame"], "SpectrumFrame"]


@dataclass(frozen=True)
class StftConfig:
    window_pair: WindowPair
    fft_size: int | None = None
    num_channels: int = 1
    sample_rate: float | None = None

    def __post_init__(self):
        length = self.window_pair.length
        fft_size = length if self.fft_size is None else int(self.fft_size)
        if fft_size < length:
            raise ParameterError(f"fft_size {fft_size} shorter than window length {length}")
        if fft_size % 2:
            raise ParameterError(f"fft_size must be even, got {fft_size}")
        if self.num_channels < 1:
            raise ParameterError(f"num_channels must be positive, got {self.num_channels}")
        rate = self.window_pair.params.sample_rate if self.sample_rate is None else self.sample_rate
        object.__setattr__(self, "fft_size", fft_size)
        object.__setattr__(self, "sample_rate", float(rate))

    @classmethod
    def from_params(
        cls,
        params: WindowParams | None = None,
        *,
        normalize: bool = True,
        fft_size: int | None = None,
        num_channels: int = 1,
    ) -> "StftConfig":
        pair = make_window_pair(params)
        if normalize:
            pair = normalize_synthesis(pair)
        return cls(pair, fft_size=fft_size, num_channels=num_channels)

    @property
    def hop(self) -> int:
        return self.window_pair.hop

    @property
    def window_length(self) -> int:
        return self.window_pair.length

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def latency(self) -> int:
        return algorithmic_latency(self)

    @property
    def latency_ms(self) -> float:
        return 1000.0 * self.latency / self.sample_rate


def algorithmic_latency(config: StftConfig) -> int:
    """Input-to-output delay in samples: two hops, independent of window length."""
    return 2 * config.hop


@dataclass(frozen=True, eq=False)
class SpectrumFrame:
    bins: np.ndarray
    frame_index: int
    channel: int = 0


@dataclass
class StreamState:
    inputs: RingBuffer
    # hop-sized staging slot followed by the 2R-sample overlap region
    accumulator: np.ndarray
    pending: int = 0
    samples_consumed: int = 0
    frames_emitted: int = 0
    frames_synthesized: list[int] = field(default_factory=list)
    flushed: bool = False

    @classmethod
    def initial(cls, config: StftConfig) -> "StreamState":
        return cls(
            inputs=RingBuffer(config.num_channels, config.window_length),
            accumulator=np.zeros((config.num_channels, 3 * config.hop)),
            frames_synthesized=[0] * config.num_channels,
        )


class StreamingStft:
    """Block-streaming analysis/synthesis engine for one multichannel stream.

    Not safe for concurrent mutation; create one instance per stream. The
    (immutable) config can be shared between instances.
    """

    def __init__(self, config: StftConfig):
        self.config = config
        self.state = StreamState.initial(config)
        self._w1 = config.window_pair.w1
        self._w2_tail = config.window_pair.w2[config.window_length - 2 * config.hop :]

    def _as_block(self, block) -> np.ndarray:
        block = np.asarray(block, dtype=np.float64)
        if block.ndim == 1 and self.config.num_channels == 1:
            block = block[np.newaxis, :]
        if block.ndim != 2 or block.shape[0] != self.config.num_channels:
            raise ShapeError(
                f"expected a block of shape ({self.config.num_channels}, n), got {block.shape}"
            )
        return block

    def _emit(self) -> list[SpectrumFrame]:
        frames = self.state.inputs.latest() * self._w1
        index = self.state.frames_emitted
        self.state.frames_emitted += 1
        return [
            SpectrumFrame(np.fft.rfft(frames[ch], n=self.config.fft_size), index, ch)
            for ch in range(self.config.num_channels)
        ]

    def _push(self, block: np.ndarray) -> list[list[SpectrumFrame]]:
        hop = self.config.hop
        out: list[list[SpectrumFrame]] = [[] for _ in range(self.config.num_channels)]
        pos, n = 0, block.shape[1]
        while pos < n:
            take = min(hop - self.state.pending, n - pos)
            self.state.inputs.write(block[:, pos : pos + take])
            self.state.pending += take
            pos += take
            if self.state.pending == hop:
                self.state.pending = 0
                for ch, frame in enumerate(self._emit()):
                    out[ch].append(frame)
        return out

    def analyze(self, block) -> list[list[SpectrumFrame]]:
        """Consume ``block`` (shape ``(channels, n)``, or ``(n,)`` for mono).

        Returns one list of newly completed frames per channel; lists are
        empty while a hop is still incomplete.
        """
        if self.state.flushed:
            raise StreamStateError("stream already flushed")
        block = self._as_block(block)
        frames = self._push(block)
        self.state.samples_consumed += block.shape[1]
        return frames

    def synthesize(self, frame: SpectrumFrame) -> np.ndarray:
        """Overlap-add one frame and return the ``R`` samples it finalizes."""
        ch = frame.channel
        if not 0 <= ch < self.config.num_channels:
            raise ShapeError(f"channel {ch} out of range for {self.config.num_channels} channels")
        expected = self.state.frames_synthesized[ch]
        if frame.frame_index != expected:
            raise StreamStateError(
                f"channel {ch}: expected frame {expected}, got frame {frame.frame_index}"
            )
        bins = np.asarray(frame.bins)
        if bins.shape != (self.config.num_bins,):
            raise ShapeError(f"frame must have {self.config.num_bins} bins, got {bins.shape}")
        hop, length = self.config.hop, self.config.window_length
        y = np.fft.irfft(bins, n=self.config.fft_size)
        acc = self.state.accumulator[ch]
        acc[hop:] += y[length - 2 * hop : length] * self._w2_tail
        out = acc[:hop].copy()
        acc[: 2 * hop] = acc[hop:]
        acc[2 * hop :] = 0.0
        self.state.frames_synthesized[ch] += 1
        return out

    def process(self, block, processor: FrameFn | None = None) -> np.ndarray:
        """Analyze, transform each frame with ``processor`` and synthesize.

        Returns ``(channels, k * R)`` output samples for the ``k`` frames
        completed by this block.
        """
        return self._run(self.analyze(block), processor)

    def _run(self, frames: list[list[SpectrumFrame]], processor: FrameFn | None) -> np.ndarray:
        hop = self.config.hop
        n_frames = len(frames[0])
        out = np.zeros((self.config.num_channels, n_frames * hop))
        for k in range(n_frames):
            for ch in range(self.config.num_channels):
                frame = frames[ch][k]
                if processor is not None:
                    frame = processor(frame)
                out[ch, k * hop : (k + 1) * hop] = self.synthesize(frame)
        return out

    def flush(self, processor: FrameFn | None = None) -> np.ndarray:
        """Complete pending frames with zero input and drain the accumulator.

        After a stream of ``T > 0`` samples the total output (all ``process``
        results plus this return value) is exactly ``T + 2R`` samples per
        channel. A stream that never received a sample flushes to nothing.
        """
        state = self.state
        if state.flushed:
            raise StreamStateError("stream already flushed")
        if any(n != state.frames_emitted for n in state.frames_synthesized):
            raise StreamStateError("all analyzed frames must be synthesized before flush")
        state.flushed = True
        channels, hop = self.config.num_channels, self.config.hop
        total = state.samples_consumed
        if total == 0:
            return np.zeros((channels, 0))
        remainder = total % hop
        padding = hop if remainder == 0 else 2 * hop - remainder
        tail = self._run(self._push(np.zeros((channels, padding))), processor)
        out = np.concatenate((tail, state.accumulator[:, :hop]), axis=1)
        state.accumulator[:] = 0.0
        return out[:, : remainder + 2 * hop]


def process_signal(
    signal,
    config: StftConfig,
    processor: FrameFn | None = None,
    block_size: int | None = None,
) -> np.ndarray:
    """Run a whole signal through analyze -> processor -> synthesize -> flush.

    ``signal`` is ``(channels, n)`` or 1-D for mono; the result has the same
    layout and ``n + 2R`` samples.
    """
    x = np.asarray(signal, dtype=np.float64)
    mono = x.ndim == 1
    engine = StreamingStft(config)
    x2 = engine._as_block(x)
    n = x2.shape[1]
    step = max(n, 1) if block_size is None else int(block_size)
    if step < 1:
        raise ParameterError(f"block_size must be positive, got {block_size}")
    pieces = [engine.process(x2[:, i : i + step], processor) for i in range(0, n, step)]
    pieces.append(engine.flush(processor))
    y = np.concatenate(pieces, axis=1)
    return y[0] if mono else y


def first_nonzero(y: np.ndarray, rel_threshold: float = 1e-9) -> int:
    """Index of the first sample above ``rel_threshold`` times the peak magnitude.

    Transform round-trips leave ~1e-17 residue around an impulse, so
    exact-zero tests are meaningless; -1 for an all-zero signal.
    """
    mag = np.abs(np.asarray(y))
    peak = mag.max(initial=0.0)
    if peak == 0.0:
        return -1
    return int(np.argmax(mag > rel_threshold * peak))


def measure_impulse_latency(
    config: StftConfig,
    processor: FrameFn | None = None,
    position: int | None = None,
) -> int:
    """Feed a unit impulse mid-stream and return the output delay in samples."""
    length = config.window_length
    p = 2 * length + 3 if position is None else int(position)
    x = np.zeros(p + 4 * length)
    x[p] = 1.0
    if config.num_channels != 1:
        config = StftConfig(config.window_pair, config.fft_size, 1, config.sample_rate)
    y = process_signal(x, config, processor)
    return first_nonzero(y) - p


def latency_sweep(
    window_lengths: Iterable[int],
    hop: int,
    n1: int = 64,
    sample_rate: float = 32000.0,
    **kwargs,
) -> dict[int, int]:
    """Measured impulse latency for each analysis window length at fixed hop."""
    result = {}
    for length in window_lengths:
        params = WindowParams(n1=n1, n2=int(length) - hop, hop=hop, sample_rate=sample_rate, **kwargs)
        result[int(length)] = measure_impulse_latency(StftConfig.from_params(params))
    return result
