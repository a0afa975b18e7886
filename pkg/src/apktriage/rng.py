"""Deterministic pseudo-random numbers shared by every stochastic step.

The generator is splitmix64, chosen because the whole state is one 64-bit
word and a port to any language reproduces the streams bit for bit. The
algorithm, exactly:

    GAMMA = 0x9E3779B97F4A7C15

    next_u64():
        state = (state + GAMMA) mod 2**64
        z = state
        z = ((z xor (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
        z = ((z xor (z >> 27)) * 0x94D049BB133111EB) mod 2**64
        return z xor (z >> 31)

Derived quantities are defined only in terms of next_u64():

* child(seed, index) seeds a new generator with the (index+1)-th raw output
  of a generator seeded with `seed`, i.e. mix64((seed + (index+1)*GAMMA)
  mod 2**64). Child streams let work units (trees of a forest) be computed
  in any order, or concurrently, with identical results.
* uniform_index(n) draws by rejection: let limit = 2**64 - (2**64 mod n);
  draw u = next_u64() until u < limit, return u mod n. Unbiased for any
  n >= 1 and consumes a deterministic sequence of draws.
* next_float53() returns (next_u64() >> 11) * 2**-53, uniform on [0, 1).
* shuffle(items) is Fisher-Yates from the top: for i = len-1 .. 1 swap
  items[i] with items[uniform_index(i+1)].

Every consumer documents which stream it uses so that reordering work never
reorders draws.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


class Rng:
    """splitmix64 stream; see the module docstring for the exact algorithm."""

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix64(self._state)

    def child(self, index: int) -> "Rng":
        """Independent stream number `index` derived from this stream's seed."""
        return child(self.seed, index)

    def uniform_index(self, n: int) -> int:
        """Unbiased draw from 0..n-1 by rejection sampling."""
        if n <= 0:
            raise ValueError("uniform_index needs n >= 1, got %r" % (n,))
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def next_float53(self) -> float:
        """Uniform double on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.uniform_index(i + 1)
            items[i], items[j] = items[j], items[i]

    def _raw_block(self, count: int) -> np.ndarray:
        # Vectorized batch of next_u64() outputs; consumes exactly `count`
        # draws, identical values to calling next_u64() `count` times.
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + steps * np.uint64(_GAMMA)
            self._state = int(z[-1])
            z ^= z >> np.uint64(30)
            z *= np.uint64(_MUL1)
            z ^= z >> np.uint64(27)
            z *= np.uint64(_MUL2)
            z ^= z >> np.uint64(31)
        return z

    def index_block(self, n: int, count: int) -> np.ndarray:
        """`count` draws of uniform_index(n) as an int64 array.

        Stream-equivalent to a loop of uniform_index calls: the fast path
        assumes no rejection happened (probability < 2**-32 per draw for the
        n used here); if any raw draw would have been rejected the state is
        rewound and the scalar loop replays the whole block.
        """
        if n <= 0:
            raise ValueError("index_block needs n >= 1, got %r" % (n,))
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        limit = (1 << 64) - ((1 << 64) % n)
        saved = self._state
        block = self._raw_block(count)
        if limit <= _MASK and bool((block >= np.uint64(limit)).any()):
            self._state = saved
            return np.array([self.uniform_index(n) for _ in range(count)],
                            dtype=np.int64)
        return (block % np.uint64(n)).astype(np.int64)


def child(seed: int, index: int) -> Rng:
    """Stream `index` of master seed `seed`; see the module docstring."""
    if index < 0:
        raise ValueError("child index must be >= 0, got %r" % (index,))
    raw = (seed + (index + 1) * _GAMMA) & _MASK
    return Rng(_mix64(raw))
