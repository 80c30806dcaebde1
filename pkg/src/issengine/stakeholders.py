"""Stakeholder utilities, weight aggregation and conflict resolution.

Seven fixed stakeholder groups each carry a utility (evidence, expertise
and impact terms) and propose a weighting over risk dimensions. Utilities
are softmax-aggregated into stakeholder weights; those blend the proposals
into consensus dimension weights. Disagreement detection, sensitivity
analysis and the precautionary default implement the structured
conflict-resolution protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import DimensionMismatchError, ValidationError
from .risk_model import RiskVector
from .scoring import (
    ModelParams,
    SimplexWeights,
    iss_linear,
    iss_multiplicative,
    iss_polynomial,
)
from .thresholds import (
    EnforcementTier,
    ThresholdSchedule,
    TriggerReport,
    ScoreHistory,
    classify_enforcement,
    evaluate_triggers,
)

# Canonical group ordering; index 4 (0-based) is the affected-communities
# group whose assessment anchors the precautionary default.
GROUPS: tuple[str, ...] = (
    "democratic-institutions",
    "civil-society",
    "regulatory-bodies",
    "technical-experts",
    "affected-communities",
    "industry-representatives",
    "academic-researchers",
)

AFFECTED_COMMUNITIES = "affected-communities"

DEFAULT_DISAGREEMENT_TAU = 0.01

# How stakeholder weights feed the learned 7-dimensional pipeline. The
# canonical score keeps the trained parameters untouched; what-if scoring
# under a proposal p rescales inputs so the uniform proposal is the
# identity. Reports always carry this note.
REWEIGHT_CONVENTION_NOTE = (
    "learned-pipeline what-if scores rescale risk factors as "
    "clamp(d * p_i * f_i, 0, 1), so the uniform proposal leaves the "
    "canonical score unchanged"
)


@dataclass(frozen=True)
class StakeholderProfile:
    """One group's utility inputs and proposed dimension weights."""

    group: str
    proposal: SimplexWeights
    evidence_score: float = 0.0
    expertise: float = 0.0
    impact: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValidationError(f"unknown stakeholder group {self.group!r}")
        if not math.isfinite(self.evidence_score):
            raise ValidationError(f"evidence_score must be finite, got {self.evidence_score!r}")
        if not 0.0 <= self.expertise <= 1.0:
            raise ValidationError(f"expertise must lie in [0, 1], got {self.expertise}")
        if not 0.0 <= self.impact <= 1.0:
            raise ValidationError(f"impact must lie in [0, 1], got {self.impact}")
        if not 0.5 <= self.beta <= 1.5:
            raise ValidationError(f"beta must lie in [0.5, 1.5], got {self.beta}")
        if not 0.8 <= self.gamma <= 2.0:
            raise ValidationError(f"gamma must lie in [0.8, 2.0], got {self.gamma}")

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "proposal": list(self.proposal.entries),
            "evidence_score": self.evidence_score,
            "expertise": self.expertise,
            "impact": self.impact,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "StakeholderProfile":
        try:
            return cls(
                group=obj["group"],
                proposal=SimplexWeights(obj["proposal"]),
                evidence_score=float(obj.get("evidence_score", 0.0)),
                expertise=float(obj.get("expertise", 0.0)),
                impact=float(obj.get("impact", 0.0)),
                alpha=float(obj.get("alpha", 1.0)),
                beta=float(obj.get("beta", 1.0)),
                gamma=float(obj.get("gamma", 1.0)),
            )
        except KeyError as exc:
            raise ValidationError(f"profile missing field {exc}") from exc


@dataclass(frozen=True)
class StakeholderPanel:
    """Exactly one profile per group, all proposals sharing one dimension."""

    profiles: tuple[StakeholderProfile, ...]

    def __init__(self, profiles: Iterable[StakeholderProfile]):
        by_group = {}
        for p in profiles:
            if p.group in by_group:
                raise ValidationError(f"duplicate profile for group {p.group!r}")
            by_group[p.group] = p
        missing = [g for g in GROUPS if g not in by_group]
        if missing:
            raise ValidationError(f"panel missing groups: {missing}")
        ordered = tuple(by_group[g] for g in GROUPS)
        dims = {p.proposal.dimension for p in ordered}
        if len(dims) != 1:
            raise DimensionMismatchError(f"proposals have mixed dimensions: {sorted(dims)}")
        object.__setattr__(self, "profiles", ordered)

    @property
    def dimension(self) -> int:
        return self.profiles[0].proposal.dimension

    def profile(self, group: str) -> StakeholderProfile:
        if group not in GROUPS:
            raise ValidationError(f"unknown stakeholder group {group!r}")
        return self.profiles[GROUPS.index(group)]

    def to_dict(self) -> dict:
        return {"profiles": [p.to_dict() for p in self.profiles]}

    @classmethod
    def from_dict(cls, obj: dict) -> "StakeholderPanel":
        try:
            raw = obj["profiles"]
        except (KeyError, TypeError) as exc:
            raise ValidationError("panel object must have a 'profiles' list") from exc
        return cls([StakeholderProfile.from_dict(p) for p in raw])


def stakeholder_utility(profile: StakeholderProfile) -> float:
    """u = alpha * evidence + beta * expertise + gamma * impact."""
    return (
        profile.alpha * profile.evidence_score
        + profile.beta * profile.expertise
        + profile.gamma * profile.impact
    )


def softmax(utilities: Sequence[float]) -> SimplexWeights:
    """Max-shifted softmax; stable for utilities of large magnitude."""
    u = [float(x) for x in utilities]
    m = max(u)
    exps = [math.exp(x - m) for x in u]
    z = math.fsum(exps)
    return SimplexWeights([e / z for e in exps])


def aggregate_stakeholder_weights(panel: StakeholderPanel) -> SimplexWeights:
    """Softmax over the seven group utilities, in canonical group order."""
    return softmax([stakeholder_utility(p) for p in panel.profiles])


def consensus_dimension_weights(panel: StakeholderPanel, omega: SimplexWeights) -> SimplexWeights:
    """Blend proposals: sum_k omega_k * w^(k); stays on the simplex by convexity."""
    if omega.dimension != len(GROUPS):
        raise DimensionMismatchError(
            f"omega has dimension {omega.dimension}, expected {len(GROUPS)}"
        )
    d = panel.dimension
    out = [0.0] * d
    for wk, p in zip(omega.entries, panel.profiles):
        for i, pi in enumerate(p.proposal.entries):
            out[i] += wk * pi
    return SimplexWeights(out)


@dataclass(frozen=True)
class DisagreementReport:
    per_dimension_variance: tuple[float, ...]
    max_variance: float
    threshold: float
    flagged: bool

    def to_dict(self) -> dict:
        return {
            "per_dimension_variance": list(self.per_dimension_variance),
            "max_variance": self.max_variance,
            "threshold": self.threshold,
            "flagged": self.flagged,
        }


def weight_disagreement(
    panel: StakeholderPanel, tau: float = DEFAULT_DISAGREEMENT_TAU
) -> DisagreementReport:
    """Population variance of proposal entries per dimension, flagged above tau."""
    k = len(panel.profiles)
    variances = []
    for i in range(panel.dimension):
        col = [p.proposal.entries[i] for p in panel.profiles]
        mean = math.fsum(col) / k
        variances.append(math.fsum((x - mean) ** 2 for x in col) / k)
    max_var = max(variances)
    return DisagreementReport(tuple(variances), max_var, tau, max_var > tau)


def reweight_factors(f: RiskVector, proposal: SimplexWeights) -> RiskVector:
    """Apply a weight proposal to the learned pipeline's inputs.

    f~_i = clamp(d * p_i * f_i, 0, 1); the uniform proposal is the identity.
    """
    if f.dimension != proposal.dimension:
        raise DimensionMismatchError(
            f"risk vector dimension {f.dimension} does not match proposal {proposal.dimension}"
        )
    d = f.dimension
    scaled = [min(1.0, max(0.0, d * p * v)) for p, v in zip(proposal.entries, f.entries)]
    return RiskVector(scaled, f.labels)


def _score_under(
    f: RiskVector,
    weights: SimplexWeights,
    params: Optional[ModelParams],
    classic_variant: str,
) -> float:
    if f.dimension == 4:
        if classic_variant == "multiplicative":
            return iss_multiplicative(f, weights)
        return iss_linear(f, weights)
    if params is None:
        raise ValidationError("params are required for the learned pipeline (d != 4)")
    return iss_polynomial(reweight_factors(f, weights), params)


@dataclass(frozen=True)
class StakeholderScore:
    group: str
    score: float
    tier: EnforcementTier

    def to_dict(self) -> dict:
        return {"group": self.group, "score": self.score, "tier": self.tier.name}


@dataclass(frozen=True)
class SensitivityReport:
    per_stakeholder: tuple[StakeholderScore, ...]
    consensus_score: float
    consensus_tier: EnforcementTier
    consensus_weights: SimplexWeights
    omega: SimplexWeights
    score_min: float
    score_max: float
    stable: bool
    disagreement: DisagreementReport
    triggers: TriggerReport
    pipeline: str  # "classic-linear" | "classic-multiplicative" | "learned-reweighted"
    convention_note: str

    def score_for(self, group: str) -> float:
        for entry in self.per_stakeholder:
            if entry.group == group:
                return entry.score
        raise ValidationError(f"report has no score for group {group!r}")

    def to_dict(self) -> dict:
        return {
            "per_stakeholder": [e.to_dict() for e in self.per_stakeholder],
            "consensus": {"score": self.consensus_score, "tier": self.consensus_tier.name},
            "consensus_weights": list(self.consensus_weights.entries),
            "omega": list(self.omega.entries),
            "score_range": {
                "min": self.score_min,
                "max": self.score_max,
                "width": self.score_max - self.score_min,
            },
            "stable": self.stable,
            "disagreement": self.disagreement.to_dict(),
            "triggers": self.triggers.to_dict(),
            "pipeline": self.pipeline,
            "convention_note": self.convention_note,
        }


def sensitivity_analysis(
    f: RiskVector,
    panel: StakeholderPanel,
    params: Optional[ModelParams],
    schedule: ThresholdSchedule,
    t: float,
    history: Optional[ScoreHistory] = None,
    classic_variant: str = "linear",
    disagreement_tau: float = DEFAULT_DISAGREEMENT_TAU,
) -> SensitivityReport:
    """Score the incident under every group's proposal and under consensus.

    The stability flag is true iff every per-stakeholder score lands in the
    same enforcement tier. Triggers are evaluated for the consensus score
    at phase t.
    """
    if classic_variant not in ("linear", "multiplicative"):
        raise ValidationError(f"classic_variant must be linear or multiplicative, got {classic_variant!r}")
    if panel.dimension != f.dimension:
        raise DimensionMismatchError(
            f"panel proposals have dimension {panel.dimension}, risk vector {f.dimension}"
        )
    per = []
    for p in panel.profiles:
        score = _score_under(f, p.proposal, params, classic_variant)
        per.append(StakeholderScore(p.group, score, classify_enforcement(score)))
    omega = aggregate_stakeholder_weights(panel)
    consensus_w = consensus_dimension_weights(panel, omega)
    consensus_score = _score_under(f, consensus_w, params, classic_variant)
    scores = [e.score for e in per]
    tiers = {e.tier.name for e in per}
    if history is None:
        history = ScoreHistory()
    triggers = evaluate_triggers(consensus_score, history, t, schedule)
    pipeline = f"classic-{classic_variant}" if f.dimension == 4 else "learned-reweighted"
    return SensitivityReport(
        per_stakeholder=tuple(per),
        consensus_score=consensus_score,
        consensus_tier=classify_enforcement(consensus_score),
        consensus_weights=consensus_w,
        omega=omega,
        score_min=min(scores),
        score_max=max(scores),
        stable=len(tiers) == 1,
        disagreement=weight_disagreement(panel, disagreement_tau),
        triggers=triggers,
        pipeline=pipeline,
        convention_note=REWEIGHT_CONVENTION_NOTE,
    )


def precautionary_resolution(
    report: SensitivityReport,
    panel: StakeholderPanel,
    resolved: bool = False,
    prior_affected_scores: Sequence[float] = (),
) -> float:
    """Default to the most protective affected-communities assessment.

    Returns the consensus score when deliberation resolved or no
    disagreement was flagged. Otherwise returns the maximum affected-
    communities score seen across deliberation rounds (prior rounds'
    scores may be passed in).
    """
    current = report.score_for(AFFECTED_COMMUNITIES)
    if resolved or not report.disagreement.flagged:
        return report.consensus_score
    candidates = [current, *[float(s) for s in prior_affected_scores]]
    return max(candidates)
