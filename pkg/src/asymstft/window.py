"""
Asymmetric analysis/synthesis window pair for low-latency overlap-add.

The analysis window ``w1`` is long (``L = n2 + hop`` samples) which gives
the DFT its frequency resolution, while the synthesis window ``w2`` is
nonzero only on the final ``2 * hop`` samples of the frame. Because each
output sample only receives contributions from the two most recent frames,
the reconstruction delay is ``2 * hop`` no matter how long ``w1`` is.

For ``0 <= n < L``::

    w1[n] = sin^2(pi n / (2 n1))              0 <= n < n1
          = 1                                  n1 <= n <= n2
          = sin(pi (n2 + hop - n) / (c hop))   n2 < n < L

    w2[n] = 0                                  0 <= n < n2 - hop
          = cos^2(pi (n - n2) / (2 hop))       n2 - hop <= n <= n2
          = sin(pi (n2 + hop - n) / (2 hop))   n2 < n < L

with ``c = 2`` for the continuous tail and ``c = 4`` for the verbatim tail.
Only ``c = 2`` makes ``w1`` continuous at ``n2`` and the product
``w1 * w2`` exactly COLA at hop ``hop``; the verbatim tail needs
:func:`normalize_synthesis` before it reconstructs perfectly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from asymstft.errors import DegenerateWindowError, ParameterError

ENVELOPE_FLOOR = 1e-6


class TailVariant(str, enum.Enum):
    CONTINUOUS = "continuous"
    VERBATIM = "verbatim"

    @property
    def denominator(self) -> int:
        """Multiple of ``hop`` in the denominator of the ``w1`` tail."""
        return 2 if self is TailVariant.CONTINUOUS else 4


@dataclass(frozen=True)
class WindowParams:
    """Parameters of one window pair.

    The defaults (64, 448, 64 at 32 kHz) give a 512-sample (16 ms) analysis
    window with a 64-sample (2 ms) hop.
    """

    n1: int = 64
    n2: int = 448
    hop: int = 64
    sample_rate: float = 32000.0
    tail_variant: TailVariant = TailVariant.CONTINUOUS

    def __post_init__(self):
        for name in ("n1", "n2", "hop"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
        if self.hop <= 0:
            raise ParameterError(f"hop > 0 violated (hop={self.hop})")
        if not 0 < self.n1:
            raise ParameterError(f"0 < n1 violated (n1={self.n1})")
        if not self.n1 < self.n2 - self.hop:
            raise ParameterError(
                f"n1 < n2 - hop violated (n1={self.n1}, n2={self.n2}, hop={self.hop})"
            )
        if (self.n2 + self.hop) % 2:
            raise ParameterError(
                f"window length n2 + hop must be even (got {self.n2 + self.hop})"
            )
        if not np.isfinite(self.sample_rate) or self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate!r}")
        object.__setattr__(self, "tail_variant", TailVariant(self.tail_variant))

    @property
    def length(self) -> int:
        return self.n2 + self.hop

    @property
    def latency(self) -> int:
        return 2 * self.hop


@dataclass(frozen=True, eq=False)
class WindowPair:
    w1: np.ndarray
    w2: np.ndarray
    params: WindowParams = field(default_factory=WindowParams)
    normalized: bool = False

    def __post_init__(self):
        w1 = np.array(self.w1, dtype=np.float64)
        w2 = np.array(self.w2, dtype=np.float64)
        length = self.params.length
        if w1.shape != (length,) or w2.shape != (length,):
            raise ParameterError(
                f"window pair must hold two 1-D arrays of length {length}, "
                f"got {w1.shape} and {w2.shape}"
            )
        if np.any(w2[: self.params.n2 - self.params.hop] != 0.0):
            raise ParameterError("w2 must vanish for n < n2 - hop")
        w1.flags.writeable = False
        w2.flags.writeable = False
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)

    @property
    def hop(self) -> int:
        return self.params.hop

    @property
    def length(self) -> int:
        return self.params.length


def make_window_pair(params: WindowParams | None = None) -> WindowPair:
    """Evaluate the window pair on ``n = 0 .. n2 + hop - 1``.

    The formulas are defined up to ``n = n2 + hop`` inclusive, where both
    windows are zero; that endpoint is dropped so the frame length is
    ``n2 + hop`` (512 for the defaults).
    """
    if params is None:
        params = WindowParams()
    n1, n2, hop = params.n1, params.n2, params.hop
    n = np.arange(params.length)
    head = n < n1
    tail = n > n2
    overlap = (n >= n2 - hop) & (n <= n2)

    w1 = np.ones(params.length)
    w1[head] = np.sin(n[head] * np.pi / (2 * n1)) ** 2
    w1[tail] = np.sin(np.pi * (n2 + hop - n[tail]) / (params.tail_variant.denominator * hop))

    w2 = np.zeros(params.length)
    w2[overlap] = np.cos(np.pi * (n[overlap] - n2) / (2 * hop)) ** 2
    w2[tail] = np.sin(np.pi * (n2 + hop - n[tail]) / (2 * hop))

    return WindowPair(w1, w2, params, normalized=False)


def cola_envelope(pair: WindowPair) -> np.ndarray:
    """Steady-state overlap-add envelope of ``w1 * w2`` at hop ``R``.

    Entry ``s`` is ``sum_k w1[s + kR] * w2[s + kR]``, i.e. the gain applied to
    every output sample whose position within the frame is congruent to
    ``s`` modulo ``R``.
    """
    hop = pair.hop
    product = pair.w1 * pair.w2
    periods = -(-pair.length // hop)
    padded = np.zeros(periods * hop)
    padded[: pair.length] = product
    return padded.reshape(periods, hop).sum(axis=0)


def cola_deviation(pair: WindowPair) -> tuple[float, int]:
    """Return ``(max |E - 1|, phase)`` for the envelope of ``pair``."""
    deviation = np.abs(cola_envelope(pair) - 1.0)
    phase = int(np.argmax(deviation))
    return float(deviation[phase]), phase


def normalize_synthesis(pair: WindowPair, floor: float = ENVELOPE_FLOOR) -> WindowPair:
    """Divide ``w2`` by the overlap-add envelope so the pair is exactly COLA.

    Raises
    ------
    DegenerateWindowError
        If any envelope entry has magnitude below ``floor``.
    """
    envelope = cola_envelope(pair)
    bad = np.flatnonzero(np.abs(envelope) < floor)
    if bad.size:
        raise DegenerateWindowError(
            f"overlap-add envelope {envelope[bad[0]]:.3g} below {floor:g} "
            f"at phase {int(bad[0])}; reconstruction impossible"
        )
    phase = np.arange(pair.length) % pair.hop
    w2 = pair.w2 / envelope[phase]
    return WindowPair(pair.w1, w2, pair.params, normalized=True)


def window_table(pair: WindowPair) -> np.ndarray:
    """``(L, 3)`` array of ``(n, w1[n], w2[n])`` rows."""
    return np.column_stack([np.arange(pair.length), pair.w1, pair.w2])
