"""Test sets, the running calibration statistic, learnability verdicts, and
a PAC-style disagreement estimator.

The calibration statistic over the first k selected steps is the exact
rational p_k = (number of ones among selected) / (number selected); division
is deferred to Fraction so the identity p_k * (selected count) = (ones count)
holds with zero rounding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .forecasters import ForecastRecord
from .rng import RngState, next_uniform, seed_state


class EmptyTestSet(ValueError):
    """No record satisfied the selection criterion; p_k would be 0/0."""


MATCH_FORECAST = "match_forecast"
MATCH_FORECAST_AND_TRUTH = "match_forecast_and_truth"
ORACLE_MASK = "oracle_mask"


@dataclass(frozen=True)
class SelectionCriterion:
    """Which steps enter the test set.

    match_forecast: |forecast - target| <= tolerance.
    match_forecast_and_truth: additionally truth == target exactly.
    oracle_mask: a precomputed 0/1 mask (e.g. from oracle_selection).
    """

    target_alpha: float
    tolerance: float = 0.0
    mode: str = MATCH_FORECAST
    mask: Sequence[int] | None = None

    def __post_init__(self):
        if not 0.0 <= self.target_alpha <= 1.0:
            raise ValueError(f"target_alpha out of [0, 1]: {self.target_alpha!r}")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.mode not in (MATCH_FORECAST, MATCH_FORECAST_AND_TRUTH, ORACLE_MASK):
            raise ValueError(f"unknown selection mode: {self.mode!r}")
        if self.mode == ORACLE_MASK and self.mask is None:
            raise ValueError("oracle_mask mode requires a mask")

    def selects(self, index: int, record: ForecastRecord) -> bool:
        if self.mode == ORACLE_MASK:
            return bool(self.mask[index])
        if abs(record.forecast - self.target_alpha) > self.tolerance:
            return False
        if self.mode == MATCH_FORECAST_AND_TRUTH:
            return record.truth == self.target_alpha
        return True


@dataclass(frozen=True)
class TestSet:
    selected: tuple[ForecastRecord, ...]
    p_k_trace: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.selected)

    @property
    def p_final(self) -> Fraction:
        return self.p_k_trace[-1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "p_k"])
            for k, p in enumerate(self.p_k_trace, start=1):
                writer.writerow([k, repr(float(p))])


def build_test_set(records: Sequence[ForecastRecord], crit: SelectionCriterion) -> TestSet:
    if len(records) == 0:
        raise ValueError("records are empty")
    selected = []
    trace = []
    ones = 0
    for i, r in enumerate(records):
        if not crit.selects(i, r):
            continue
        selected.append(r)
        ones += r.outcome
        trace.append(Fraction(ones, len(selected)))
    if not selected:
        raise EmptyTestSet(
            f"no record selected for target {crit.target_alpha} (mode {crit.mode})"
        )
    return TestSet(tuple(selected), tuple(trace))


CONVERGED = "Converged"
DIVERGED = "Diverged"
INCONCLUSIVE = "Inconclusive"


def calibration_verdict(
    ts: TestSet, target_alpha: float, epsilon: float, window_fraction: float = 0.5
) -> str:
    """Finite-horizon proxy for p_k -> alpha.

    Converged when |p_k - alpha| <= epsilon throughout the trailing window;
    Diverged when the final statistic misses by more than 2*epsilon;
    Inconclusive otherwise.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if not 0.0 < window_fraction < 1.0:
        raise ValueError("window_fraction must be in (0, 1)")
    k = len(ts.p_k_trace)
    window = ts.p_k_trace[max(0, k - max(1, int(k * window_fraction))):]
    if all(abs(p - target_alpha) <= epsilon for p in window):
        return CONVERGED
    if abs(ts.p_final - target_alpha) > 2 * epsilon:
        return DIVERGED
    return INCONCLUSIVE


LEARNED = "Learned"
NOT_LEARNED = "NotLearned"

_DOXASTIC_NOTE = (
    "self-assurance component not checked: no computable definition is available"
)


@dataclass(frozen=True)
class LearnabilityVerdict:
    verdict: str
    burn_in: int
    tail_error_rate: float
    p_k_final: float | None
    notes: str = _DOXASTIC_NOTE


def success_criterion_check(
    records: Sequence[ForecastRecord],
    target_alpha: float,
    epsilon: float,
    burn_in: int,
    delta: float,
) -> LearnabilityVerdict:
    """Finite proxy for "correct all but finitely often".

    A step errs when |forecast - truth| > epsilon.  Learned when the error
    rate strictly after burn_in is <= delta.  NotLearned when the rate
    exceeds delta in every trailing half-window (the misses persist instead
    of thinning out).  Inconclusive otherwise.
    """
    if not 0 <= burn_in < len(records):
        raise ValueError("burn_in must satisfy 0 <= burn_in < len(records)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    errors = [1 if abs(r.forecast - r.truth) > epsilon else 0 for r in records]
    tail = errors[burn_in:]
    rate = sum(tail) / len(tail)

    p_final = None
    try:
        ts = build_test_set(records, SelectionCriterion(target_alpha, epsilon))
        p_final = float(ts.p_final)
    except EmptyTestSet:
        pass

    if rate <= delta:
        return LearnabilityVerdict(LEARNED, burn_in, rate, p_final)

    persistent = True
    start = burn_in
    while len(records) - start >= 2:
        window = errors[start:]
        if sum(window) / len(window) <= delta:
            persistent = False
            break
        start += (len(records) - start) // 2
    verdict = NOT_LEARNED if persistent else INCONCLUSIVE
    return LearnabilityVerdict(verdict, burn_in, rate, p_final)


@dataclass(frozen=True)
class FiniteInstanceSpace:
    """A finite instance space with per-point sampling weights."""

    points: tuple
    weights: tuple  # non-negative, need not be normalized

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights must have equal length")
        if len(self.points) == 0:
            raise ValueError("instance space is empty")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if sum(self.weights) == 0:
            raise ValueError("weights must not all be zero")


ENUMERATION_LIMIT = 1 << 20


def exact_disagreement(h: Callable, c: Callable, space: FiniteInstanceSpace) -> Fraction:
    """Exact weighted disagreement mass between hypothesis h and concept c."""
    total = sum(space.weights)
    bad = sum(w for x, w in zip(space.points, space.weights) if h(x) != c(x))
    return Fraction(bad, total) if isinstance(bad, int) and isinstance(total, int) else bad / total


def pac_error_estimate(
    h: Callable,
    c: Callable,
    space: FiniteInstanceSpace,
    n: int = 1,
    seed: int | RngState | None = None,
):
    """Estimate Pr_{x ~ space}[h(x) != c(x)].

    Small declared-finite spaces are enumerated exactly; otherwise a Monte
    Carlo estimate over n draws with the package PRNG.
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    if seed is None and len(space.points) <= ENUMERATION_LIMIT:
        return exact_disagreement(h, c, space)
    rng = seed if isinstance(seed, RngState) else seed_state(0 if seed is None else seed)
    total = float(sum(space.weights))
    cumulative = []
    acc = 0.0
    for w in space.weights:
        acc += float(w) / total
        cumulative.append(acc)
    disagreements = 0
    for _ in range(n):
        u, rng = next_uniform(rng)
        # Linear scan is fine at desk scale; bisect would also work.
        idx = 0
        while idx < len(cumulative) - 1 and u >= cumulative[idx]:
            idx += 1
        x = space.points[idx]
        if h(x) != c(x):
            disagreements += 1
    return disagreements / n
