"""Deterministic synthetic incident corpora.

Stands in for real historical case reconstructions, which need evidence
curation this repo cannot ship. Records cycle through three severity
profiles that differ in sub-component sparsity:

* low    -- two categories with a single nonzero sub-component (category
            score exactly 1/3), the rest all-zero
* medium -- five categories with two near-equal nonzero sub-components
            (score ~0.47)
* high   -- all seven categories with three near-equal sub-components
            (score ~0.577, the equal-weight maximum)

Severity labels come from a fixed planted polynomial model, so the three
profiles land in the none / moderate / extreme enforcement tiers by
construction, for every seed.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import ValidationError
from .risk_model import CATEGORIES, IncidentRecord, SubComponentTriple, assemble_risk_vector
from .scoring import ModelParams, SimplexWeights, iss_polynomial
from .stakeholders import StakeholderPanel, StakeholderProfile

PROFILES = ("low", "medium", "high")

# Planted model: uniform linear lift with a mild damping interaction.
PLANTED_BIAS = -3.2
PLANTED_LINEAR = 1.8
PLANTED_INTERACTION = -0.06

_EPOCH = datetime(2021, 1, 4, 12, 0, 0, tzinfo=timezone.utc)

_OUTCOME_NOTES = {
    "low": "logged for monitoring; no intervention occurred",
    "medium": "regulator opened a review after public reporting",
    "high": "deployment was suspended after sustained pressure",
}


def planted_params(d: int = len(CATEGORIES)) -> ModelParams:
    """The fixed parameters that label the synthetic corpus."""
    w = np.full(d, PLANTED_LINEAR)
    W = np.full((d, d), PLANTED_INTERACTION)
    return ModelParams(w, W, PLANTED_BIAS)


def _zero_triple() -> SubComponentTriple:
    return SubComponentTriple((0.0, 0.0, 0.0))


def _low_inputs(rng: np.random.Generator) -> dict[str, SubComponentTriple]:
    inputs = {cat: _zero_triple() for cat in CATEGORIES}
    active = rng.choice(len(CATEGORIES), size=2, replace=False)
    for idx in active:
        values = [0.0, 0.0, 0.0]
        values[int(rng.integers(3))] = float(rng.uniform(0.3, 0.9))
        inputs[CATEGORIES[int(idx)]] = SubComponentTriple(tuple(values))
    return inputs


def _medium_inputs(rng: np.random.Generator) -> dict[str, SubComponentTriple]:
    inputs = {cat: _zero_triple() for cat in CATEGORIES}
    active = rng.choice(len(CATEGORIES), size=5, replace=False)
    for idx in active:
        values = [0.0, 0.0, 0.0]
        slots = rng.choice(3, size=2, replace=False)
        for slot in slots:
            values[int(slot)] = float(rng.uniform(0.4, 0.6))
        inputs[CATEGORIES[int(idx)]] = SubComponentTriple(tuple(values))
    return inputs


def _high_inputs(rng: np.random.Generator) -> dict[str, SubComponentTriple]:
    inputs = {}
    for cat in CATEGORIES:
        values = tuple(float(v) for v in rng.uniform(0.7, 0.95, size=3))
        inputs[cat] = SubComponentTriple(values)
    return inputs


_BUILDERS = {"low": _low_inputs, "medium": _medium_inputs, "high": _high_inputs}


def generate_fixtures(seed: int, n: int) -> list[IncidentRecord]:
    """n synthetic incidents cycling low/medium/high, labels from the planted model."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    params = planted_params()
    records = []
    for i in range(n):
        profile = PROFILES[i % len(PROFILES)]
        inputs = _BUILDERS[profile](rng)
        rec = IncidentRecord(
            id=f"syn-{seed:03d}-{i + 1:04d}",
            timestamp=_EPOCH + timedelta(days=17 * i),
            category_inputs=inputs,
            metadata={"profile": profile, "actual_outcome": _OUTCOME_NOTES[profile]},
        )
        label = iss_polynomial(assemble_risk_vector(rec), params)
        records.append(
            IncidentRecord(
                id=rec.id,
                timestamp=rec.timestamp,
                category_inputs=inputs,
                label=label,
                metadata=rec.metadata,
            )
        )
    return records


# Each group leans toward the risk dimensions its mandate emphasizes;
# proposal order is the canonical category order.
_PANEL_SPEC = [
    ("democratic-institutions", (0.10, 0.10, 0.30, 0.15, 0.15, 0.10, 0.10), 0.10, 0.6, 0.5, 1.0, 1.0),
    ("civil-society", (0.10, 0.15, 0.10, 0.10, 0.30, 0.15, 0.10), 0.00, 0.5, 0.7, 0.9, 1.2),
    ("regulatory-bodies", (0.10, 0.10, 0.15, 0.10, 0.10, 0.35, 0.10), 0.05, 0.7, 0.4, 1.1, 0.9),
    ("technical-experts", (0.10, 0.10, 0.10, 0.15, 0.10, 0.10, 0.35), 0.20, 0.9, 0.2, 1.5, 0.8),
    ("affected-communities", (0.25, 0.25, 0.10, 0.10, 0.15, 0.05, 0.10), -0.05, 0.4, 1.0, 0.8, 2.0),
    ("industry-representatives", (1 / 7,) * 7, 0.00, 0.6, 0.3, 1.0, 0.8),
    ("academic-researchers", (0.15, 0.15, 0.10, 0.15, 0.15, 0.10, 0.20), 0.15, 0.8, 0.3, 1.3, 0.9),
]


def fixture_panel() -> StakeholderPanel:
    """A plausible near-consensus seven-group panel used by fixtures and demos."""
    profiles = []
    for group, proposal, evidence, expertise, impact, beta, gamma in _PANEL_SPEC:
        profiles.append(
            StakeholderProfile(
                group=group,
                proposal=SimplexWeights(proposal),
                evidence_score=evidence,
                expertise=expertise,
                impact=impact,
                beta=beta,
                gamma=gamma,
            )
        )
    return StakeholderPanel(profiles)
