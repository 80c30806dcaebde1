"""Incident severity scoring engine.

Library surface: risk taxonomy and vector assembly, the three severity
scorers, Huber-regression training, stakeholder weight aggregation with
conflict resolution, phase-dependent intervention triggers, corpus I/O and
the retrospective harness. A CLI (``iss``) and HTTP service mirror it.
"""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    NumericError,
    TrainingDivergedError,
    ValidationError,
)
from .risk_model import (
    CATEGORIES,
    IncidentRecord,
    RiskVector,
    SubComponentTriple,
    assemble_risk_vector,
    category_score,
)
from .scoring import (
    FourFactor,
    ModelParams,
    SimplexWeights,
    iss_linear,
    iss_multiplicative,
    iss_polynomial,
    sigmoid,
)
from .learning import (
    TrainingConfig,
    TrainingDataset,
    TrainingTrace,
    evidence_score,
    fit,
    gradient,
    huber_loss,
    objective,
    predict_batch,
)
from .stakeholders import (
    GROUPS,
    DisagreementReport,
    SensitivityReport,
    StakeholderPanel,
    StakeholderProfile,
    aggregate_stakeholder_weights,
    consensus_dimension_weights,
    precautionary_resolution,
    sensitivity_analysis,
    stakeholder_utility,
    weight_disagreement,
)
from .thresholds import (
    LEVELS,
    EnforcementTier,
    ScoreHistory,
    ThresholdSchedule,
    TriggerReport,
    classify_enforcement,
    default_schedule,
    empirical_cdf,
    evaluate_triggers,
    phase_from_months,
    smoothstep,
    threshold_at,
)
from .corpus import load_corpus, load_incident, load_params, load_schedule, save_corpus
from .fixtures import fixture_panel, generate_fixtures, planted_params
from .retrospective import (
    RetrospectiveConfig,
    RetrospectiveReport,
    WeightingConfig,
    retrospective_run,
)
