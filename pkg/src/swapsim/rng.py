"""Counter-based random streams on top of numpy's Philox4x64.

A stream is the value ``(master_seed, stream_id, counter)``. The Philox key
is ``(master_seed, stream_id)`` and draw number ``counter`` is word
``counter % 4`` of block ``counter // 4``, so any draw can be reproduced
from the triple alone, independent of how earlier draws were chunked.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_MASK64 = (1 << 64) - 1
_WORDS_PER_BLOCK = 4
_TO_UNIT = 2.0**-53


_local = threading.local()


def _philox() -> np.random.Philox:
    # Re-keying one generator per thread is several times cheaper than constructing one.
    gen = getattr(_local, "philox", None)
    if gen is None:
        gen = _local.philox = np.random.Philox(0)
    return gen


@lru_cache(maxsize=4096)
def _block(key0: int, key1: int, block: int) -> tuple[int, int, int, int]:
    gen = _philox()
    # Block b is whatever a Philox positioned at counter (b, 0, 0, 0) emits next.
    gen.state = {
        "bit_generator": "Philox",
        "state": {
            "counter": np.array([block & _MASK64, 0, 0, 0], dtype=np.uint64),
            "key": np.array([key0, key1], dtype=np.uint64),
        },
        "buffer": np.zeros(_WORDS_PER_BLOCK, dtype=np.uint64),
        "buffer_pos": _WORDS_PER_BLOCK,
        "has_uint32": 0,
        "uinteger": 0,
    }
    return tuple(gen.random_raw(_WORDS_PER_BLOCK).tolist())


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int
    counter: int = 0

    def raw(self, n: int) -> tuple[list[int], "RngStream"]:
        """Next ``n`` 64-bit words and the advanced stream."""
        if n < 0:
            raise ValueError("n must be non-negative")
        k0 = self.master_seed & _MASK64
        k1 = self.stream_id & _MASK64
        words = []
        for c in range(self.counter, self.counter + n):
            block, offset = divmod(c, _WORDS_PER_BLOCK)
            words.append(_block(k0, k1, block)[offset])
        return words, RngStream(self.master_seed, self.stream_id, self.counter + n)

    def uniforms(self, n: int) -> tuple[list[float], "RngStream"]:
        """Next ``n`` doubles in [0, 1) built from the top 53 bits of each word."""
        words, nxt = self.raw(n)
        return [(w >> 11) * _TO_UNIT for w in words], nxt

    def uniform(self) -> tuple[float, "RngStream"]:
        (u,), nxt = self.uniforms(1)
        return u, nxt

    def generator(self) -> np.random.Generator:
        """A numpy Generator keyed on this stream, for bulk work such as shuffles.

        It does not advance this stream; derive a dedicated stream id for it.
        """
        return np.random.Generator(
            np.random.Philox(
                key=np.array([self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64),
                counter=np.array([self.counter & _MASK64, 0, 0, 0], dtype=np.uint64),
            )
        )


def rng_derive(master_seed: int, stream_id: int) -> RngStream:
    return RngStream(int(master_seed), int(stream_id), 0)
