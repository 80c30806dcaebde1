"""Seven-category democratic risk taxonomy.

Each category's score is an L2-normalized weighted sum of three raw
sub-component measurements. The canonical risk vector stacks the seven
category scores in the fixed order ``disc, surv, elec, manip, civic,
capture, emerg``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Optional

from .errors import ValidationError

log = logging.getLogger(__name__)

# Canonical category ordering for the 7-dimensional risk vector.
CATEGORIES: tuple[str, ...] = ("disc", "surv", "elec", "manip", "civic", "capture", "emerg")

# Human-readable sub-component names per category, in sub-weight order.
SUB_COMPONENTS: dict[str, tuple[str, str, str]] = {
    "disc": ("bias_amplification", "synthetic_content_bias", "language_exclusion"),
    "surv": ("conversational_monitoring", "political_sentiment_tracking", "dissent_detection"),
    "elec": ("generated_propaganda", "personalized_political_ads", "synthetic_news_generation"),
    "manip": ("conversational_manipulation", "bot_amplification", "deepfake_text_generation"),
    "civic": ("echo_amplification", "personalization_bubbles", "radicalization_pathways"),
    "capture": ("model_concentration", "infrastructure_dependence", "provider_capture"),
    "emerg": ("cascade_risk", "goal_misalignment", "emergent_behaviors"),
}

EQUAL_SUB_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


@dataclass(frozen=True)
class SubComponentTriple:
    """Three raw sub-risk measurements in [0,1] with non-negative weights.

    The all-zero weight configuration is rejected; all-zero values are fine
    (a fully unmeasured category scores 0).
    """

    values: tuple[float, float, float]
    weights: tuple[float, float, float] = EQUAL_SUB_WEIGHTS

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        wts = tuple(float(w) for w in self.weights)
        if len(vals) != 3:
            raise ValidationError(f"values must have 3 entries, got {len(vals)}")
        if len(wts) != 3:
            raise ValidationError(f"weights must have 3 entries, got {len(wts)}")
        for i, v in enumerate(vals):
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValidationError(f"values[{i}] must lie in [0, 1], got {v!r}")
        for i, w in enumerate(wts):
            if not math.isfinite(w) or w < 0.0:
                raise ValidationError(f"weights[{i}] must be >= 0 and finite, got {w!r}")
        if sum(wts) == 0.0:
            raise ValidationError("weights must not all be zero")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weights", wts)


@dataclass(frozen=True)
class RiskVector:
    """Ordered factor vector f in [0,1]^d with category labels."""

    entries: tuple[float, ...]
    labels: tuple[str, ...]

    def __init__(self, entries: Iterable[float], labels: Iterable[str] | None = None):
        vals = tuple(float(v) for v in entries)
        if not vals:
            raise ValidationError("entries must be non-empty")
        for i, v in enumerate(vals):
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValidationError(f"entries[{i}] must lie in [0, 1], got {v!r}")
        if labels is None:
            if len(vals) == len(CATEGORIES):
                labs = CATEGORIES
            else:
                labs = tuple(f"f{i}" for i in range(len(vals)))
        else:
            labs = tuple(str(x) for x in labels)
            if len(labs) != len(vals):
                raise ValidationError(
                    f"labels has {len(labs)} entries for {len(vals)} values"
                )
        object.__setattr__(self, "entries", vals)
        object.__setattr__(self, "labels", labs)

    @property
    def dimension(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class IncidentRecord:
    """One incident: per-category sub-component measurements plus metadata.

    All seven categories must be present; missing categories are rejected
    rather than imputed. The optional continuous severity label y lies in
    [0,1].
    """

    id: str
    timestamp: datetime
    category_inputs: Mapping[str, SubComponentTriple]
    label: Optional[float] = None
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("id must be a non-empty string")
        ts = self.timestamp
        if not isinstance(ts, datetime):
            raise ValidationError(f"timestamp must be a datetime, got {type(ts).__name__}")
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        object.__setattr__(self, "timestamp", ts.astimezone(timezone.utc))
        missing = [c for c in CATEGORIES if c not in self.category_inputs]
        if missing:
            raise ValidationError(f"category_inputs missing categories: {missing}")
        unknown = [c for c in self.category_inputs if c not in CATEGORIES]
        if unknown:
            raise ValidationError(f"category_inputs has unknown categories: {unknown}")
        if self.label is not None:
            y = float(self.label)
            if not math.isfinite(y) or not 0.0 <= y <= 1.0:
                raise ValidationError(f"label must lie in [0, 1], got {self.label!r}")
            object.__setattr__(self, "label", y)
        object.__setattr__(self, "category_inputs", dict(self.category_inputs))
        object.__setattr__(self, "metadata", dict(self.metadata))


def category_score(triple: SubComponentTriple) -> float:
    """Score one category: (sum_i weight_i * value_i) / ||values||_2.

    Returns 0 for the all-zero value vector, where the normalization is
    undefined (no measured sub-risk means no category risk). The ratio is
    bounded by ||weights||_2, which can exceed 1 for non-equal weights; the
    result is clamped to [0,1] with a warning when clamping occurs.
    """
    v1, v2, v3 = triple.values
    norm = math.sqrt(v1 * v1 + v2 * v2 + v3 * v3)
    if norm == 0.0:
        return 0.0
    w1, w2, w3 = triple.weights
    score = (w1 * v1 + w2 * v2 + w3 * v3) / norm
    if score > 1.0:
        log.warning("category score %.6f exceeds 1, clamping (weights %s)", score, triple.weights)
        return 1.0
    if score < 0.0:  # unreachable with non-negative inputs, kept for safety
        log.warning("category score %.6f below 0, clamping", score)
        return 0.0
    return score


def assemble_risk_vector(incident: IncidentRecord) -> RiskVector:
    """Build the canonical 7-dimensional risk vector from an incident."""
    entries = []
    for cat in CATEGORIES:
        try:
            entries.append(category_score(incident.category_inputs[cat]))
        except ValidationError as exc:
            raise ValidationError(f"category {cat!r}: {exc}") from exc
    return RiskVector(entries, CATEGORIES)
