"""Deterministic 64-bit randomness and empirical distributions.

PRNG algorithm: xorshift64* (Vigna 2016) with a SplitMix64 finalizer used
both to seed the state and to derive independent replication streams.  All
state is threaded explicitly; there is no global generator anywhere in this
package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STAR = 0x2545F4914F6CDD1D


class EmptyPopulation(ValueError):
    """Raised when an empirical distribution of zero events is requested."""


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngState:
    """Opaque xorshift64* state.  Construct via seed_state or derive."""

    state: int

    def __post_init__(self):
        if not (0 < self.state <= _MASK64):
            raise ValueError("xorshift64* state must be a nonzero 64-bit integer")


def seed_state(seed: int) -> RngState:
    """Build an initial state from an arbitrary 64-bit seed."""
    s = _splitmix64(seed & _MASK64)
    if s == 0:
        s = _GOLDEN
    return RngState(s)


def derive(seed: int, stream: int) -> RngState:
    """Derive the state for replication stream i; distinct i give distinct streams."""
    if stream < 0:
        raise ValueError("stream index must be non-negative")
    s = _splitmix64((seed & _MASK64) ^ _splitmix64((stream + 1) * _GOLDEN & _MASK64))
    if s == 0:
        s = _GOLDEN
    return RngState(s)


def next_u64(rng: RngState) -> tuple[int, RngState]:
    x = rng.state
    x ^= x >> 12
    x = (x ^ (x << 25)) & _MASK64
    x ^= x >> 27
    return (x * _STAR) & _MASK64, RngState(x)


def next_uniform(rng: RngState) -> tuple[float, RngState]:
    """Uniform double in [0, 1) using the top 53 bits of the output."""
    u, rng = next_u64(rng)
    return (u >> 11) * 2.0**-53, rng


def next_bernoulli(rng: RngState, p: float) -> tuple[int, RngState]:
    """Draw 1 with probability p.  p=0 and p=1 are exact."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p!r}")
    u, rng = next_uniform(rng)
    return (1 if u < p else 0), rng


@dataclass(frozen=True)
class Population:
    """A finite ordered collection of 0/1 attribute indicators."""

    indicators: tuple
    attribute_label: str = ""

    def __post_init__(self):
        if any(v not in (0, 1) for v in self.indicators):
            raise ValueError("population indicators must be exactly 0 or 1")

    def __len__(self) -> int:
        return len(self.indicators)


def empirical_distribution(pop: Population | Sequence[int]) -> Fraction:
    """Exact relative frequency of ones: (number of ones)/(population size)."""
    indicators = pop.indicators if isinstance(pop, Population) else tuple(pop)
    if len(indicators) == 0:
        raise EmptyPopulation("empirical distribution of an empty population")
    return Fraction(sum(indicators), len(indicators))
