"""Fixed-capacity multichannel ring buffer used by the streaming analyzer."""

from __future__ import annotations

import numpy as np


class RingBuffer:
    """Circular sample store of shape ``(channels, capacity)``.

    Starts zero-filled, so :meth:`latest` before the buffer has wrapped
    returns the zero history followed by everything written so far.
    """

    __slots__ = ("data", "ptr", "capacity", "channels")

    def __init__(self, channels: int, capacity: int):
        if channels < 1 or capacity < 1:
            raise ValueError("channels and capacity must be positive")
        self.channels = channels
        self.capacity = capacity
        self.data = np.zeros((channels, capacity))
        # index of the oldest sample == next write position
        self.ptr = 0

    def write(self, block: np.ndarray) -> None:
        block = np.asarray(block, dtype=np.float64)
        n = block.shape[1]
        if n == 0:
            return
        if n >= self.capacity:
            self.data[:] = block[:, n - self.capacity :]
            self.ptr = 0
            return
        end = self.ptr + n
        if end <= self.capacity:
            self.data[:, self.ptr : end] = block
        else:
            split = self.capacity - self.ptr
            self.data[:, self.ptr :] = block[:, :split]
            self.data[:, : end - self.capacity] = block[:, split:]
        self.ptr = end % self.capacity

    def latest(self) -> np.ndarray:
        """Return a chronological copy of the whole buffer, oldest sample first."""
        if self.ptr == 0:
            return self.data.copy()
        return np.concatenate((self.data[:, self.ptr :], self.data[:, : self.ptr]), axis=1)

    def reset(self) -> None:
        self.data.fill(0.0)
        self.ptr = 0
