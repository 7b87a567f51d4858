"""Asset health scoring on a 1-10 scale plus apparent-age modelling.

Scores 1-6 come from conditional failure probabilities over a short and a
long look-ahead window, most severe band first; scores 7-10 come from the
asset's age relative to the fleet average. 1-3 map to Purple, 4-6 to Red,
7-8 to Orange, 9-10 to Green. Probability bands take precedence over age
bands, so an asset only falls through to age scoring when the probabilities
clear every probability threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .weibull import WeibullLaw

__all__ = [
    "Band",
    "ScoreBasis",
    "AhiConfig",
    "AhiScore",
    "DegradationState",
    "band_for_score",
    "ahi_from_probability",
    "ahi_from_age",
    "score_asset",
    "threshold_age",
    "apparent_age",
    "RED_ONSET_APPARENT_AGE",
    "PURPLE_ONSET_APPARENT_AGE",
    "DEFAULT_CONDITION_TRIGGER_AGE",
]

# Default apparent ages at which an asset is considered to enter the red and
# purple severity regions; the default condition-based replacement policy
# fires at whichever comes first. threshold_age derives law-consistent
# alternatives (about 48 and 58 years for the bundled reference laws, which
# does not match these defaults exactly; see README).
RED_ONSET_APPARENT_AGE = 50.0
PURPLE_ONSET_APPARENT_AGE = 54.0
DEFAULT_CONDITION_TRIGGER_AGE = min(RED_ONSET_APPARENT_AGE, PURPLE_ONSET_APPARENT_AGE)


class Band(enum.Enum):
    PURPLE = "purple"
    RED = "red"
    ORANGE = "orange"
    GREEN = "green"


class ScoreBasis(enum.Enum):
    PROBABILITY = "probability"
    AGE = "age"


def band_for_score(score: int) -> Band:
    if not 1 <= score <= 10:
        raise ValueError(f"score {score} outside 1..10")
    if score <= 3:
        return Band.PURPLE
    if score <= 6:
        return Band.RED
    if score <= 8:
        return Band.ORANGE
    return Band.GREEN


@dataclass(frozen=True)
class AhiConfig:
    """Scoring thresholds: look-ahead windows, probability bands, age bands."""

    short_window: float = 3.0
    long_window: float = 7.0
    probability_bands: tuple[float, float, float] = (0.8, 0.5, 0.2)
    age_fractions: tuple[float, float] = (0.75, 0.60)
    young_age_cutoff: float = 5.0
    use_apparent_age: bool = True

    def __post_init__(self) -> None:
        a, b, c = self.probability_bands
        if not (1.0 > a > b > c > 0.0):
            raise ValueError(
                f"probability bands must descend within (0, 1), got {self.probability_bands}"
            )
        if self.short_window <= 0 or self.long_window <= 0:
            raise ValueError("windows must be positive")
        hi, lo = self.age_fractions
        if not hi > lo > 0:
            raise ValueError(f"age fractions must descend, got {self.age_fractions}")


@dataclass(frozen=True)
class AhiScore:
    score: int
    band: Band
    basis: ScoreBasis

    def __post_init__(self) -> None:
        if band_for_score(self.score) is not self.band:
            raise ValueError(f"score {self.score} inconsistent with band {self.band}")


@dataclass(frozen=True)
class DegradationState:
    """Multiplier and offset turning real age into apparent age."""

    rate: float = 1.0
    apparent_age_offset: float = 0.0

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError(f"degradation rate must be positive, got {self.rate}")


def apparent_age(commission_age: float, state: DegradationState) -> float:
    """Age the degradation model makes the asset look: rate * age + offset."""
    if commission_age < 0:
        raise ValueError(f"negative age {commission_age}")
    return max(0.0, state.rate * commission_age + state.apparent_age_offset)


def ahi_from_probability(
    p_short: float, p_long: float, config: AhiConfig = AhiConfig()
) -> Optional[int]:
    """Probability-band score 1-6, or None when no band matches.

    The short window is checked first (scores 1-3), then the long window
    (scores 4-6), each against descending thresholds.
    """
    for name, p in (("p_short", p_short), ("p_long", p_long)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}={p} outside [0, 1]")
    if p_long < p_short:
        raise ValueError(
            f"p_long={p_long} < p_short={p_short}: inconsistent nested windows"
        )
    for offset, p in ((0, p_short), (3, p_long)):
        for rank, threshold in enumerate(config.probability_bands, start=1):
            if p >= threshold:
                return offset + rank
    return None


def ahi_from_age(age: float, average_age: float, config: AhiConfig = AhiConfig()) -> int:
    """Age-band score 7-10 relative to the fleet average.

    Assets younger than the young-age cutoff score 10 outright, so the
    average only has to be positive once it is actually compared against.
    """
    if age < 0:
        raise ValueError(f"negative age {age}")
    if age < config.young_age_cutoff:
        return 10
    if average_age <= 0:
        raise ValueError(f"average age must be positive, got {average_age}")
    hi, lo = config.age_fractions
    if age > hi * average_age:
        return 7
    if age > lo * average_age:
        return 8
    return 9


def score_asset(
    law: WeibullLaw,
    apparent_age_years: float,
    fleet_average_age: float,
    config: AhiConfig = AhiConfig(),
) -> AhiScore:
    """Full scoring: probability bands first, age bands as fallback."""
    p_short = law.conditional_failure_probability(apparent_age_years, config.short_window)
    p_long = law.conditional_failure_probability(apparent_age_years, config.long_window)
    score = ahi_from_probability(p_short, p_long, config)
    if score is not None:
        return AhiScore(score=score, band=band_for_score(score), basis=ScoreBasis.PROBABILITY)
    score = ahi_from_age(apparent_age_years, fleet_average_age, config)
    return AhiScore(score=score, band=band_for_score(score), basis=ScoreBasis.AGE)


def threshold_age(
    law: WeibullLaw, window: float, probability: float, tolerance: float = 1e-9
) -> float:
    """Age at which the next-window failure probability reaches a level.

    Inverts the conditional failure probability by bisection; requires a
    strictly aging law (beta > 1) so the inversion is single-valued. Returns
    0 when the level is already exceeded at age zero.
    """
    if law.beta <= 1.0:
        raise ValueError(
            f"non-monotone inversion unsupported for shape {law.beta} <= 1"
        )
    if not 0.0 < probability < 1.0:
        raise ValueError(f"probability {probability} outside (0, 1)")
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    lo, hi = 0.0, 10.0 * law.eta
    if law.conditional_failure_probability(lo, window) >= probability:
        return 0.0
    if law.conditional_failure_probability(hi, window) < probability:
        raise ValueError(
            f"probability {probability} not reached within {hi:.1f} years"
        )
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if law.conditional_failure_probability(mid, window) < probability:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
