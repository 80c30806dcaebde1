"""Phase-dependent intervention thresholds and trigger evaluation.

Severity and probability thresholds interpolate between initial and
full-deployment values along a smoothstep curve in the phase parameter
t in [0,1]. Two trigger modes run side by side:

* population -- the historical score distribution puts probability mass
  >= a_j(t) at or above s_j(t) (needs min_samples history)
* incident   -- the current score alone clears s_j(t) (cold start and
  per-incident alerting)

Enforcement tiers follow strict inequalities: moderate above 0.6,
extreme above 0.8.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import InsufficientDataError, ValidationError

log = logging.getLogger(__name__)

LEVELS: tuple[str, ...] = ("L", "M", "H")

ROADMAP_MONTHS = 72.0


@dataclass(frozen=True)
class LevelThresholds:
    """Initial and full-deployment severity (s) and probability (a) thresholds."""

    s_init: float
    s_full: float
    a_init: float
    a_full: float

    def __post_init__(self):
        for name in ("s_init", "s_full", "a_init", "a_full"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ThresholdSchedule:
    levels: dict[str, LevelThresholds]

    def __post_init__(self):
        missing = [lv for lv in LEVELS if lv not in self.levels]
        if missing:
            raise ValidationError(f"schedule missing levels: {missing}")
        unknown = [lv for lv in self.levels if lv not in LEVELS]
        if unknown:
            raise ValidationError(f"schedule has unknown levels: {unknown}")
        object.__setattr__(self, "levels", dict(self.levels))

    def to_dict(self) -> dict:
        out = {}
        for lv in LEVELS:
            t = self.levels[lv]
            out[lv] = {"s_init": t.s_init, "s_full": t.s_full, "a_init": t.a_init, "a_full": t.a_full}
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ThresholdSchedule":
        levels = {}
        for lv, entry in obj.items():
            try:
                levels[lv] = LevelThresholds(
                    entry["s_init"], entry["s_full"], entry["a_init"], entry["a_full"]
                )
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"level {lv!r}: missing threshold field {exc}") from exc
        return cls(levels)


def default_schedule() -> ThresholdSchedule:
    """The stock schedule: L rises 0.2->0.3, M rises 0.5->0.6, H drops 0.8->0.75."""
    return ThresholdSchedule(
        {
            "L": LevelThresholds(s_init=0.2, s_full=0.3, a_init=0.1, a_full=0.15),
            "M": LevelThresholds(s_init=0.5, s_full=0.6, a_init=0.05, a_full=0.1),
            "H": LevelThresholds(s_init=0.8, s_full=0.75, a_init=0.01, a_full=0.05),
        }
    )


def smoothstep(t: float) -> float:
    """Cubic S-curve 3t^2 - 2t^3 on [0,1]; out-of-range t is clamped with a warning."""
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError(f"t must be finite, got {t!r}")
    if t < 0.0 or t > 1.0:
        log.warning("phase t=%s outside [0,1], clamping", t)
        t = min(1.0, max(0.0, t))
    return 3.0 * t * t - 2.0 * t * t * t


def phase_from_months(months_elapsed: float) -> float:
    """Convenience mapping of calendar progress onto t: clamp(months/72, 0, 1)."""
    return min(1.0, max(0.0, float(months_elapsed) / ROADMAP_MONTHS))


def threshold_at(level: str, t: float, schedule: ThresholdSchedule) -> tuple[float, float]:
    """Interpolated (severity, probability) thresholds for one level at phase t."""
    if level not in LEVELS:
        raise ValidationError(f"unknown level {level!r}, expected one of {LEVELS}")
    phi = smoothstep(t)
    lt = schedule.levels[level]
    s = (1.0 - phi) * lt.s_init + phi * lt.s_full
    a = (1.0 - phi) * lt.a_init + phi * lt.a_full
    return s, a


class ScoreHistory:
    """Rolling window of past severity scores; immutable, append returns a new history."""

    __slots__ = ("scores", "window", "min_samples", "_sorted")

    def __init__(self, scores: Iterable[float] = (), window: int = 500, min_samples: int = 30):
        if window < 1:
            raise ValidationError(f"window must be >= 1, got {window}")
        if min_samples < 1:
            raise ValidationError(f"min_samples must be >= 1, got {min_samples}")
        vals = [float(s) for s in scores]
        for i, s in enumerate(vals):
            if not math.isfinite(s) or not 0.0 <= s <= 1.0:
                raise ValidationError(f"scores[{i}] must lie in [0, 1], got {s!r}")
        self.scores = tuple(vals[-window:])
        self.window = window
        self.min_samples = min_samples
        self._sorted = sorted(self.scores)

    def __len__(self) -> int:
        return len(self.scores)

    def with_score(self, score: float) -> "ScoreHistory":
        return ScoreHistory(self.scores + (score,), self.window, self.min_samples)


def empirical_cdf(history: ScoreHistory, s: float) -> float:
    """Fraction of retained scores <= s (right-continuous step function)."""
    if len(history) == 0:
        raise InsufficientDataError("score history is empty")
    return bisect_right(history._sorted, float(s)) / len(history)


@dataclass(frozen=True)
class LevelTrigger:
    level: str
    severity_threshold: float
    probability_threshold: float
    incident_fired: bool
    population_fired: Optional[bool]  # None when history has too few samples
    exceedance: Optional[float]  # 1 - F_S(s_j(t)) when computable

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "severity_threshold": self.severity_threshold,
            "probability_threshold": self.probability_threshold,
            "incident": {"fired": self.incident_fired},
            "population": {
                "fired": self.population_fired,
                "exceedance": self.exceedance,
                "status": "ok" if self.population_fired is not None else "insufficient-data",
            },
        }


@dataclass(frozen=True)
class TriggerReport:
    t: float
    history_size: int
    min_samples: int
    levels: tuple[LevelTrigger, ...]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "history_size": self.history_size,
            "min_samples": self.min_samples,
            "levels": [lt.to_dict() for lt in self.levels],
        }

    def fired_levels(self, mode: str) -> list[str]:
        if mode == "incident":
            return [lt.level for lt in self.levels if lt.incident_fired]
        if mode == "population":
            return [lt.level for lt in self.levels if lt.population_fired]
        raise ValidationError(f"unknown trigger mode {mode!r}")


def evaluate_triggers(
    current: float, history: ScoreHistory, t: float, schedule: ThresholdSchedule
) -> TriggerReport:
    """Evaluate both trigger modes for every level at phase t."""
    current = float(current)
    if not math.isfinite(current) or not 0.0 <= current <= 1.0:
        raise ValidationError(f"current score must lie in [0, 1], got {current!r}")
    enough = len(history) >= history.min_samples
    entries = []
    for level in LEVELS:
        s, a = threshold_at(level, t, schedule)
        incident = current >= s
        if enough:
            exceedance = 1.0 - empirical_cdf(history, s)
            population: Optional[bool] = exceedance >= a
        else:
            exceedance = None
            population = None
        entries.append(LevelTrigger(level, s, a, incident, population, exceedance))
    return TriggerReport(float(t), len(history), history.min_samples, tuple(entries))


MODERATE_ACTIONS = (
    "pre-deployment impact assessment with a 15-30 day stakeholder consultation period",
    "mandated design modifications, including capability restrictions or alignment interventions",
    "operational monitoring requirements with regular compliance audits",
)

EXTREME_ACTIONS = MODERATE_ACTIONS + (
    "temporary deployment suspension pending comprehensive review",
)


@dataclass(frozen=True)
class EnforcementTier:
    name: str  # none | moderate | extreme
    actions: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"name": self.name, "actions": list(self.actions)}


def classify_enforcement(score: float) -> EnforcementTier:
    """Strict-inequality tiers: extreme > 0.8, moderate > 0.6, else none.

    Boundary values do not escalate: a score of exactly 0.6 is 'none' and
    exactly 0.8 is 'moderate'.
    """
    score = float(score)
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise ValidationError(f"score must lie in [0, 1], got {score!r}")
    if score > 0.8:
        return EnforcementTier("extreme", EXTREME_ACTIONS)
    if score > 0.6:
        return EnforcementTier("moderate", MODERATE_ACTIONS)
    return EnforcementTier("none", ())
