"""Deterministic, portable random number generation for fixture synthesis.

All synthetic state is drawn from xoshiro256** seeded through splitmix64,
so identical (seed, stream label) pairs produce identical fixtures on any
platform, independent of the host language's random module.

Stream splitting: substream states are derived from
``splitmix64(seed XOR fnv1a64(label))``; each named stream (``"graph"``,
``"labels"``, ``"rbac"``, ``"policy"``, ``"requests/one-of"``, ...) is an
independent generator.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def fnv1a64(data: str) -> int:
    h = 0xCBF29CE484222325
    for byte in data.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256:
    """xoshiro256** with convenience draws used by the synthesizer."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, z = _splitmix64(state)
            s.append(z)
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            v = self.next_u64()
            if v <= limit:
                return v % n

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randrange(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct integers from range(n), by partial Fisher-Yates.

        Order is the draw order, not sorted.
        """
        if k > n:
            raise ValueError(f"cannot sample {k} from {n}")
        swapped: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randrange(n - i)
            out.append(swapped.get(j, j))
            swapped[j] = swapped.get(i, i)
        return out

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        return [seq[i] for i in self.sample_indices(len(seq), k)]


def stream(seed: int, label: str) -> Xoshiro256:
    """Independent generator for one named substream of a master seed."""
    return Xoshiro256((seed & _MASK64) ^ fnv1a64(label))
