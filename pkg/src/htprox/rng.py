"""Seeded random streams.

Every chain owns one stream keyed by ``(seed, stream_id)``. Streams are
derived through :class:`numpy.random.SeedSequence` spawn keys, so distinct
stream ids give independent PCG64 sequences and identical keys give
bit-identical sequences.
"""

from __future__ import annotations

import numpy as np

_U64 = 2**64


class RngStream:
    """A reproducible random stream for one chain (or one batch job).

    Args:
        seed: 64-bit unsigned seed shared by all streams of a run.
        stream_id: non-negative stream index, usually the chain index.
    """

    __slots__ = ("seed", "stream_id", "generator")

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not 0 <= seed < _U64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if stream_id < 0:
            raise ValueError(f"stream_id must be non-negative, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        ss = np.random.SeedSequence(seed, spawn_key=(stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def as_generator(rng) -> np.random.Generator:
    """Coerce an RngStream, Generator or integer seed into a Generator."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit RngStream or seed is required")
    return RngStream(int(rng)).generator
