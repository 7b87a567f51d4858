"""Kaplan-Meier product-limit estimation on right-censored lifetimes.

The estimator builds one step per distinct event time; censored observations
reduce the at-risk count for later times but create no step of their own.
Ties are resolved events-first: an observation censored at time t is still at
risk for events happening at t. The resulting step function is
right-continuous, so the value AT an event time is the post-drop value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import isfinite
from typing import IO, Sequence

from .fleet import LifetimeObservation

__all__ = ["UNBOUNDED", "CurvePoint", "SurvivalCurve", "km_fit", "write_curve_csv"]

# Returned by quantile() when the curve never drops to the requested level.
UNBOUNDED = float("inf")


@dataclass(frozen=True)
class CurvePoint:
    time: float
    at_risk: int
    events: int
    survival: float


@dataclass(frozen=True)
class SurvivalCurve:
    """Step-function survival estimate with at-risk/event bookkeeping."""

    points: tuple[CurvePoint, ...]
    n_total: int

    def survival_at(self, t: float) -> float:
        """Value of the right-continuous step function at age t."""
        if t < 0:
            raise ValueError(f"negative time {t}")
        value = 1.0
        for pt in self.points:
            if pt.time <= t:
                value = pt.survival
            else:
                break
        return value

    def quantile(self, q: float) -> float:
        """Smallest t with S(t) <= 1 - q, or UNBOUNDED if never reached."""
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile level {q} outside (0, 1)")
        level = 1.0 - q
        for pt in self.points:
            if pt.survival <= level:
                return pt.time
        return UNBOUNDED

    def median(self) -> float:
        return self.quantile(0.5)


def km_fit(observations: Sequence[LifetimeObservation]) -> SurvivalCurve:
    """Fit the product-limit estimator.

    With no events at all the curve is the constant 1 (empty points). The
    running product is carried in exact rational arithmetic and rounded once
    per point.
    """
    if not observations:
        raise ValueError("no observations")
    for obs in observations:
        if not isfinite(obs.duration) or obs.duration < 0:
            raise ValueError(f"invalid duration {obs.duration}")

    marks: dict[float, list[int]] = {}
    for obs in observations:
        entry = marks.setdefault(obs.duration, [0, 0])
        entry[0 if obs.event else 1] += 1

    at_risk = len(observations)
    survival = Fraction(1)
    points: list[CurvePoint] = []
    for t in sorted(marks):
        d, c = marks[t]
        if d > 0:
            survival *= Fraction(at_risk - d, at_risk)
            points.append(
                CurvePoint(time=t, at_risk=at_risk, events=d, survival=float(survival))
            )
        at_risk -= d + c
    return SurvivalCurve(points=tuple(points), n_total=len(observations))


def write_curve_csv(curve: SurvivalCurve, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["t", "n_at_risk", "d_events", "survival"])
    for pt in curve.points:
        writer.writerow([repr(pt.time), pt.at_risk, pt.events, repr(pt.survival)])
