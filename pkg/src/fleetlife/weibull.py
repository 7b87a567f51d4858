"""Two-parameter Weibull reliability laws and censored-data fitting.

A law is the pair (beta, eta): shape and scale in years. Fitting comes in two
flavours. fit_weibull_mle maximizes the right-censored log-likelihood through
the one-dimensional profile equation in beta (eta has a closed form given
beta). fit_weibull_rank_regression fits a straight line to the log-log
transform of a survival curve, which doubles as the MLE initializer and as an
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fleet import LifetimeObservation, VoltageClass
from .survival import SurvivalCurve, km_fit

__all__ = [
    "WeibullLaw",
    "FitDiagnostics",
    "FitError",
    "fit_weibull_mle",
    "fit_weibull_rank_regression",
    "REFERENCE_LAWS",
    "law_to_record",
    "law_from_record",
]

BETA_BRACKET = (0.05, 100.0)
PROFILE_TOLERANCE = 1e-10
MAX_ITERATIONS = 200


class FitError(RuntimeError):
    """Fitting failed to converge; carries the diagnostics at abort."""

    def __init__(self, message: str, diagnostics: "FitDiagnostics | None" = None):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class WeibullLaw:
    """Weibull reliability law with shape beta and scale eta (years)."""

    beta: float
    eta: float

    def __post_init__(self) -> None:
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"shape must be positive, got {self.beta}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"scale must be positive, got {self.eta}")

    def _check_age(self, t: float) -> None:
        if t < 0:
            raise ValueError(f"negative age {t}")

    def cumulative_hazard(self, t: float) -> float:
        self._check_age(t)
        return (t / self.eta) ** self.beta

    def cdf(self, t: float) -> float:
        return -math.expm1(-self.cumulative_hazard(t))

    def survival(self, t: float) -> float:
        return math.exp(-self.cumulative_hazard(t))

    def pdf(self, t: float) -> float:
        self._check_age(t)
        if t == 0.0:
            if self.beta > 1:
                return 0.0
            if self.beta == 1:
                return 1.0 / self.eta
            return math.inf
        z = t / self.eta
        return (self.beta / self.eta) * z ** (self.beta - 1.0) * math.exp(-(z**self.beta))

    def hazard(self, t: float) -> float:
        self._check_age(t)
        if t == 0.0:
            return self.pdf(0.0)
        z = t / self.eta
        return (self.beta / self.eta) * z ** (self.beta - 1.0)

    def median(self) -> float:
        return self.quantile(0.5)

    def quantile(self, p: float) -> float:
        """Age at which the failure probability reaches p."""
        if not 0.0 < p < 1.0:
            raise ValueError(f"probability {p} outside (0, 1)")
        return self.eta * (-math.log1p(-p)) ** (1.0 / self.beta)

    def conditional_failure_probability(self, t: float, window: float) -> float:
        """Probability of failing within `window` years given survival to t.

        Computed as 1 - exp(-(H(t+window) - H(t))) with H the cumulative
        hazard. The naive 1 - S(t+window)/S(t) underflows for old assets
        under steep laws; the hazard-difference form does not.
        """
        self._check_age(t)
        if window <= 0:
            raise ValueError(f"window must be positive, got {window}")
        gap = self.cumulative_hazard(t + window) - self.cumulative_hazard(t)
        return -math.expm1(-gap)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n lifetimes by inverse-CDF transform of rng uniforms."""
        u = rng.random(n)
        return self.eta * (-np.log1p(-u)) ** (1.0 / self.beta)


@dataclass(frozen=True)
class FitDiagnostics:
    event_count: int
    censored_count: int
    log_likelihood: float
    iterations: int
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "event_count": self.event_count,
            "censored_count": self.censored_count,
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
        }


# Default laws for the three voltage families, used by the bundled demo
# scenarios and available as fixtures when no fleet data is at hand.
REFERENCE_LAWS: Mapping[VoltageClass, WeibullLaw] = {
    VoltageClass.V110: WeibullLaw(beta=6.67, eta=63.79),
    VoltageClass.V150: WeibullLaw(beta=6.42, eta=74.20),
    VoltageClass.V220_380: WeibullLaw(beta=5.65, eta=77.05),
}


def law_to_record(law: WeibullLaw, family: str, source: str) -> dict:
    return {"family": family, "beta": law.beta, "eta": law.eta, "source": source}


def law_from_record(record: Mapping) -> tuple[str, WeibullLaw, str]:
    try:
        family = str(record["family"])
        law = WeibullLaw(beta=float(record["beta"]), eta=float(record["eta"]))
    except KeyError as exc:
        raise ValueError(f"law record missing field {exc.args[0]!r}") from None
    return family, law, str(record.get("source", "unknown"))


def _profile_terms(beta: float, log_t: np.ndarray) -> tuple[float, float]:
    """Softmax-weighted mean and variance of log-durations at shape beta.

    Weights proportional to t_i^beta, computed in shifted log space so no
    intermediate overflows even at the top of the beta bracket.
    """
    w = beta * log_t
    w -= w.max()
    ew = np.exp(w)
    total = ew.sum()
    mean = float((ew @ log_t) / total)
    var = float((ew @ (log_t - mean) ** 2) / total)
    return mean, var


def _profile_residual(beta: float, log_t: np.ndarray, mean_log_event: float) -> float:
    mean, _ = _profile_terms(beta, log_t)
    return mean - 1.0 / beta - mean_log_event


def _log_likelihood(
    beta: float, eta: float, log_all: np.ndarray, log_events: np.ndarray
) -> float:
    r = log_events.size
    hazard_sum = float(np.exp(beta * (log_all - math.log(eta))).sum())
    return (
        r * math.log(beta)
        + (beta - 1.0) * float(log_events.sum())
        - r * beta * math.log(eta)
        - hazard_sum
    )


def fit_weibull_mle(
    observations: Sequence[LifetimeObservation],
) -> tuple[WeibullLaw, FitDiagnostics]:
    """Maximum-likelihood Weibull fit to right-censored lifetimes.

    Events contribute log pdf, censored observations log survival. The shape
    solves the profile score equation by safeguarded Newton iteration on the
    bracket [0.05, 100], initialized from rank regression when possible;
    the scale then has a closed form. Needs at least two events, and every
    event duration must be positive.
    """
    events = [o.duration for o in observations if o.event]
    censored = [o.duration for o in observations if not o.event]
    r = len(events)
    if r < 2:
        raise ValueError(f"insufficient events: need at least 2, got {r}")
    if any(t <= 0 for t in events):
        raise ValueError("zero-duration events cannot be fitted")

    log_events = np.log(np.asarray(events, dtype=float))
    positive = np.asarray([t for t in events + censored if t > 0], dtype=float)
    log_all = np.log(positive)
    mean_log_event = float(log_events.mean())

    lo, hi = BETA_BRACKET
    g_lo = _profile_residual(lo, log_all, mean_log_event)
    g_hi = _profile_residual(hi, log_all, mean_log_event)

    beta = _initial_beta(observations)
    iterations = 0
    converged = False
    if g_lo < 0.0 < g_hi:
        a, b = lo, hi
        for iterations in range(1, MAX_ITERATIONS + 1):
            mean, var = _profile_terms(beta, log_all)
            g = mean - 1.0 / beta - mean_log_event
            if abs(g) <= PROFILE_TOLERANCE:
                converged = True
                break
            if g > 0.0:
                b = beta
            else:
                a = beta
            slope = var + 1.0 / (beta * beta)
            step = beta - g / slope
            beta = step if a < step < b else 0.5 * (a + b)

    eta = _profile_eta(beta, log_all, r)
    diagnostics = FitDiagnostics(
        event_count=r,
        censored_count=len(censored),
        log_likelihood=_log_likelihood(beta, eta, log_all, log_events),
        iterations=iterations,
        converged=converged,
    )
    if not converged:
        raise FitError(
            f"profile equation did not converge within {MAX_ITERATIONS} iterations "
            f"on beta bracket {BETA_BRACKET}",
            diagnostics,
        )
    return WeibullLaw(beta=beta, eta=eta), diagnostics


def _profile_eta(beta: float, log_all: np.ndarray, r: int) -> float:
    shift = float((beta * log_all).max())
    log_sum = shift + math.log(float(np.exp(beta * log_all - shift).sum()))
    return math.exp((log_sum - math.log(r)) / beta)


def _initial_beta(observations: Sequence[LifetimeObservation]) -> float:
    lo, hi = BETA_BRACKET
    try:
        law = fit_weibull_rank_regression(km_fit(observations))
    except ValueError:
        return 1.0
    return min(max(law.beta, lo), hi)


def fit_weibull_rank_regression(curve: SurvivalCurve) -> WeibullLaw:
    """Least-squares fit of log(-log S) against log t over curve steps.

    Steps with survival 0 or 1 (or zero time) fall outside the transform's
    domain and are skipped. The slope is the shape; the scale follows from
    the intercept.
    """
    xs, ys = [], []
    for pt in curve.points:
        if 0.0 < pt.survival < 1.0 and pt.time > 0.0:
            xs.append(math.log(pt.time))
            ys.append(math.log(-math.log(pt.survival)))
    if len(xs) < 2:
        raise ValueError(
            f"rank regression needs at least 2 usable curve points, got {len(xs)}"
        )
    slope, intercept = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    beta = float(slope)
    if beta <= 0:
        raise ValueError(f"non-increasing survival transform (slope {beta})")
    return WeibullLaw(beta=beta, eta=math.exp(-float(intercept) / beta))
