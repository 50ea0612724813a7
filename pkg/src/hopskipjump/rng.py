"""Deterministic random streams.

Every stochastic component draws from a stream identified by a 64-bit
(seed, stream_id) pair. The generator algorithm is pinned (PCG64 keyed
through numpy's SeedSequence), so identical identifiers reproduce
bitwise-identical draw sequences across runs and platforms. Child
streams are derived by mixing indices into the stream id with
SplitMix64, which lets a harness give every (sample, attack, repetition)
an independent stream without any shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One SplitMix64 round; a stable, well-mixed 64-bit hash."""
    value = (value + 0x9E3779B97F4A7C15) & _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return value ^ (value >> 31)


def mix_indices(base: int, *indices: int) -> int:
    """Fold indices into a 64-bit stream id, order-sensitively."""
    out = base & _MASK64
    for index in indices:
        out = splitmix64(out ^ splitmix64(index & _MASK64))
    return out


@dataclass(frozen=True)
class RngStream:
    """Identifier of one reproducible random stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """A fresh generator; same (seed, stream_id) gives same draws."""
        entropy = (self.seed & _MASK64, self.stream_id & _MASK64)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def derive(self, *indices: int) -> "RngStream":
        """Child stream with the indices mixed into the stream id."""
        return RngStream(self.seed, mix_indices(self.stream_id, *indices))


def as_generator(rng: "RngStream | np.random.Generator") -> np.random.Generator:
    """Accept either a stream identifier or a live generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng
