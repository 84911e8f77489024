"""Deterministic simulation lab for probability-learnability demonstrations."""

from .rng import (
    EmptyPopulation,
    Population,
    RngState,
    derive,
    empirical_distribution,
    next_bernoulli,
    next_u64,
    next_uniform,
    seed_state,
)

__all__ = [
    "EmptyPopulation",
    "Population",
    "RngState",
    "derive",
    "empirical_distribution",
    "next_bernoulli",
    "next_u64",
    "next_uniform",
    "seed_state",
]

__version__ = "0.1.0"
