"""Counter-based, splittable random number streams.

Every source of randomness in the package is an :class:`RngStream`, keyed by
a 64-bit root seed and a 64-bit stream id. Streams built from the same
(seed, stream-id) pair replay the identical draw sequence bit-for-bit;
distinct stream ids give statistically independent streams. This is what
makes coupled A/B comparisons possible: toggling the swap intensity on and
off leaves the position-noise streams untouched.

Backed by numpy's Philox counter-based generator.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Purpose ids used to derive per-role stream ids from one root seed.
PURPOSE_POS1 = 1   # position noise of the first (low-temperature) particle
PURPOSE_POS2 = 2   # position noise of the second particle
PURPOSE_SWAP = 3   # uniforms driving swap decisions
PURPOSE_INIT = 4   # randomized initial positions


class RngStream:
    """A replayable Gaussian/uniform stream identified by (seed, stream id).

    ``counter`` counts scalar draws consumed so far; it is bookkeeping only,
    the underlying Philox state advances with each draw.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self.counter = 0
        self._gen = np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        )

    def normal(self, shape=None):
        """Standard-normal draws; scalar if shape is None."""
        if shape is None:
            self.counter += 1
            return self._gen.standard_normal()
        out = self._gen.standard_normal(shape)
        self.counter += out.size
        return out

    def uniform(self, shape=None):
        """Uniform(0, 1) draws; scalar if shape is None."""
        if shape is None:
            self.counter += 1
            return self._gen.random()
        out = self._gen.random(shape)
        self.counter += out.size
        return out

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"


def stream_id(purpose: int, chain: int = 0) -> int:
    """Pack a purpose id and a chain index into one 64-bit stream id."""
    return ((int(purpose) & 0xFFFFFFFF) << 32) | (int(chain) & 0xFFFFFFFF)


def derive_stream(seed: int, purpose: int, chain: int = 0) -> RngStream:
    """Stream for a given (root seed, purpose, chain) triple."""
    return RngStream(seed, stream_id(purpose, chain))
