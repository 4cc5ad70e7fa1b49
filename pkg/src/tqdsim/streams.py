"""Reproducible per-trajectory noise streams.

Streams are keyed by (seed, stream_id) through the counter-based Philox
bit generator, so any trajectory can be replayed bit-for-bit on any
machine and distinct ids give statistically independent streams.  A
stream is stateless: every call to :meth:`generator` starts the same
sequence again, which is exactly the replay contract the runners rely
on (a runner draws everything it needs from one generator instance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError


@dataclass(frozen=True)
class WienerStream:
    """Noise source for one trajectory: Wiener increments and uniforms."""

    seed: int
    stream_id: int = 0
    dt: float = 1e-4

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if not 0 <= int(self.stream_id) < 2**64:
            raise ConfigError("stream_id must fit in an unsigned 64-bit integer")
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")

    def generator(self):
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def increments(self, n):
        """n Wiener increments dW ~ N(0, dt), from the stream start."""
        return self.generator().standard_normal(int(n)) * np.sqrt(self.dt)

    def uniforms(self, n):
        """n uniforms on [0, 1), from the stream start."""
        return self.generator().random(int(n))
