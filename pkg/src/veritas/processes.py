"""Generators of binary processes with known per-step conditional probabilities.

Three kinds are provided:

* IID(alpha): the same probability at every step.
* RegimeSwitch(alpha, beta): a deterministic alternating schedule, alpha on
  even steps and beta on odd steps, so time averages tend to (alpha+beta)/2.
* BrokenClock(pre, n, post): probability pre before step n and post from
  step n on.

Every path records the hidden truth alongside the drawn outcome, so oracle
operations (and only those) can read it back.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

from .rng import RngState, next_bernoulli


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} out of [0, 1]: {value!r}")


@dataclass(frozen=True)
class PathStep:
    t: int
    truth: float
    outcome: int
    regime: str


@dataclass(frozen=True)
class Path:
    """A realized trajectory: outcomes plus the generator's true probabilities."""

    steps: tuple[PathStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def outcomes(self) -> list[int]:
        return [s.outcome for s in self.steps]

    def truths(self) -> list[float]:
        return [s.truth for s in self.steps]

    def redacted(self) -> "Path":
        """Copy with truths blanked out; used to test the information barrier."""
        return Path(tuple(PathStep(s.t, float("nan"), s.outcome, "") for s in self.steps))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "truth", "outcome", "regime"])
            for s in self.steps:
                writer.writerow([s.t, repr(s.truth), s.outcome, s.regime])


@dataclass(frozen=True)
class ProcessSpec:
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def truth_at(self, t: int) -> float:
        raise NotImplementedError

    def regime_at(self, t: int) -> str:
        raise NotImplementedError

    def _check_step(self, t: int) -> None:
        if not 0 <= t < self.horizon:
            raise ValueError(f"step {t} outside horizon {self.horizon}")


@dataclass(frozen=True)
class IID(ProcessSpec):
    alpha: float = 0.5

    def __post_init__(self):
        ProcessSpec.__post_init__(self)
        _check_prob("alpha", self.alpha)

    def truth_at(self, t: int) -> float:
        self._check_step(t)
        return self.alpha

    def regime_at(self, t: int) -> str:
        return "iid"


@dataclass(frozen=True)
class RegimeSwitch(ProcessSpec):
    """Alternating two-regime process: alpha on even steps, beta on odd steps."""

    alpha: float = 0.2
    beta: float = 0.8

    def __post_init__(self):
        ProcessSpec.__post_init__(self)
        _check_prob("alpha", self.alpha)
        _check_prob("beta", self.beta)

    def truth_at(self, t: int) -> float:
        self._check_step(t)
        return self.alpha if t % 2 == 0 else self.beta

    def regime_at(self, t: int) -> str:
        return "alpha" if t % 2 == 0 else "beta"


@dataclass(frozen=True)
class BrokenClock(ProcessSpec):
    """Probability pre on steps t < n, post on steps t >= n."""

    pre: float = 0.5
    n: int = 100
    post: float = 0.9

    def __post_init__(self):
        ProcessSpec.__post_init__(self)
        _check_prob("pre", self.pre)
        _check_prob("post", self.post)
        if not 0 < self.n < self.horizon:
            raise ValueError("switch step n must satisfy 0 < n < horizon")

    def truth_at(self, t: int) -> float:
        self._check_step(t)
        return self.pre if t < self.n else self.post

    def regime_at(self, t: int) -> str:
        return "pre" if t < self.n else "post"


def truth_at(spec: ProcessSpec, t: int) -> float:
    """Deterministic regime probability at step t."""
    return spec.truth_at(t)


def simulate(spec: ProcessSpec, rng: RngState) -> Path:
    """Draw one path of length spec.horizon; the outcome at t uses truth_at(t)."""
    steps = []
    for t in range(spec.horizon):
        p = spec.truth_at(t)
        outcome, rng = next_bernoulli(rng, p)
        steps.append(PathStep(t, p, outcome, spec.regime_at(t)))
    return Path(tuple(steps))


def oracle_selection(path: Path, target: float) -> list[int]:
    """ORACLE mask: 1 exactly where the hidden truth equals target.

    This reads the hidden per-step probability directly.  It exists to
    demonstrate that selecting the right subsequence requires already
    knowing the truth; it does not model anything a learner could do.
    """
    if len(path) == 0:
        raise ValueError("path is empty")
    return [1 if s.truth == target else 0 for s in path.steps]
