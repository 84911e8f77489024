"""Forecasters that announce a probability for the next outcome at each step.

A forecaster sees only the outcome prefix (outcomes at steps strictly before
t).  The one exception, TruthOracle, is an explicit oracle capability: it
copies the generator's hidden probability and stands in for a directly
observable population.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .processes import Path


@dataclass(frozen=True)
class ForecastRecord:
    t: int
    forecast: object  # float or Fraction
    outcome: int
    truth: float


class Forecaster:
    """Base interface: forecast(prefix) sees outcomes before the current step only."""

    needs_truth = False

    def forecast(self, prefix: Sequence[int]):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Forecaster):
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha out of [0, 1]: {self.alpha!r}")

    def forecast(self, prefix):
        return self.alpha


class BrokenClockReader(Constant):
    """Constant(alpha) with narrative intent: right only while the regime matches."""


@dataclass(frozen=True)
class EmpiricalFrequency(Forecaster):
    """Running mean of past outcomes; a configurable prior before any data."""

    prior_forecast: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.prior_forecast <= 1.0:
            raise ValueError(f"prior out of [0, 1]: {self.prior_forecast!r}")

    def forecast(self, prefix):
        if len(prefix) == 0:
            return self.prior_forecast
        return Fraction(sum(prefix), len(prefix))


@dataclass(frozen=True)
class TruthOracle(Forecaster):
    """Copies the hidden truth; models a directly observable population."""

    needs_truth = True


def run_forecaster(forecaster: Forecaster, path: Path) -> list[ForecastRecord]:
    """One ForecastRecord per path step.

    Non-oracle forecasters receive only the outcome prefix, so the hidden
    truths cannot leak into their forecasts.
    """
    if len(path) == 0:
        raise ValueError("path is empty")
    records = []
    if forecaster.needs_truth:
        for s in path.steps:
            records.append(ForecastRecord(s.t, s.truth, s.outcome, s.truth))
        return records

    if isinstance(forecaster, EmpiricalFrequency):
        # Incremental running mean; equivalent to forecast(outcomes[:t]).
        ones = 0
        for s in path.steps:
            fc = forecaster.prior_forecast if s.t == 0 else Fraction(ones, s.t)
            records.append(ForecastRecord(s.t, fc, s.outcome, s.truth))
            ones += s.outcome
        return records

    outcomes = path.outcomes()
    for s in path.steps:
        fc = forecaster.forecast(outcomes[: s.t])
        records.append(ForecastRecord(s.t, fc, s.outcome, s.truth))
    return records


def write_records_csv(records: Sequence[ForecastRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "forecast", "outcome", "truth"])
        for r in records:
            writer.writerow([r.t, repr(float(r.forecast)), r.outcome, repr(r.truth)])
