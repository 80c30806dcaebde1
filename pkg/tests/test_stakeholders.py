import math

import numpy as np
import pytest

from issengine.errors import DimensionMismatchError, ValidationError
from issengine.risk_model import RiskVector
from issengine.scoring import ModelParams, SimplexWeights
from issengine.stakeholders import (
    AFFECTED_COMMUNITIES,
    GROUPS,
    StakeholderPanel,
    StakeholderProfile,
    aggregate_stakeholder_weights,
    consensus_dimension_weights,
    precautionary_resolution,
    reweight_factors,
    sensitivity_analysis,
    softmax,
    stakeholder_utility,
    weight_disagreement,
)
from issengine.thresholds import default_schedule


def make_panel(proposals=None, d=7):
    """Panel where every group shares the same utility inputs."""
    if proposals is None:
        proposals = [SimplexWeights.uniform(d)] * len(GROUPS)
    profiles = [
        StakeholderProfile(
            group=group,
            proposal=proposal,
            evidence_score=0.0,
            expertise=0.5,
            impact=0.5,
            beta=1.0,
            gamma=1.0,
        )
        for group, proposal in zip(GROUPS, proposals)
    ]
    return StakeholderPanel(profiles)


class TestUtility:
    def test_zero_inputs(self):
        p = StakeholderProfile(
            group=GROUPS[0],
            proposal=SimplexWeights.uniform(7),
            evidence_score=0.0,
            expertise=0.0,
            impact=0.0,
            beta=0.5,
            gamma=0.8,
        )
        assert stakeholder_utility(p) == 0.0

    def test_mid_inputs(self):
        p = StakeholderProfile(
            group=GROUPS[1],
            proposal=SimplexWeights.uniform(7),
            evidence_score=0.0,
            expertise=0.5,
            impact=0.5,
            beta=1.0,
            gamma=1.0,
        )
        assert stakeholder_utility(p) == pytest.approx(1.0, abs=1e-15)

    def test_extreme_inputs(self):
        p = StakeholderProfile(
            group=GROUPS[2],
            proposal=SimplexWeights.uniform(7),
            evidence_score=-0.25,
            expertise=1.0,
            impact=1.0,
            beta=1.5,
            gamma=2.0,
        )
        assert stakeholder_utility(p) == pytest.approx(3.25, abs=1e-15)

    def test_coefficient_ranges_enforced(self):
        with pytest.raises(ValidationError, match="beta"):
            StakeholderProfile(group=GROUPS[0], proposal=SimplexWeights.uniform(7), beta=0.4)
        with pytest.raises(ValidationError, match="gamma"):
            StakeholderProfile(group=GROUPS[0], proposal=SimplexWeights.uniform(7), gamma=2.5)


class TestSoftmax:
    def test_equal_utilities_uniform(self):
        omega = softmax([1.3] * 7)
        assert all(w == pytest.approx(1 / 7, abs=1e-15) for w in omega.entries)

    def test_shift_invariance(self):
        u = [0.3, -1.2, 2.0, 0.0, 0.7, -0.5, 1.1]
        a = softmax(u)
        b = softmax([x + 123.456 for x in u])
        assert all(abs(x - y) <= 1e-12 for x, y in zip(a.entries, b.entries))

    def test_log2_example(self):
        omega = softmax([math.log(2), 0, 0, 0, 0, 0, 0])
        assert omega.entries[0] == pytest.approx(0.25, abs=1e-12)
        assert all(w == pytest.approx(0.125, abs=1e-12) for w in omega.entries[1:])

    def test_stability_at_large_magnitude(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            u = rng.uniform(-1e4, 1e4, 7)
            omega = softmax(u)
            assert all(w >= 0 for w in omega.entries)
            assert math.fsum(omega.entries) == pytest.approx(1.0, abs=1e-12)

    def test_argmax_preserved(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            u = rng.uniform(-5, 5, 7)
            u[rng.integers(7)] += 1.0  # ensure a strict max
            omega = softmax(u)
            assert int(np.argmax(omega.entries)) == int(np.argmax(u))


class TestConsensus:
    def test_identical_proposals_passthrough(self):
        p = SimplexWeights([0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1])
        panel = make_panel([p] * 7)
        omega = aggregate_stakeholder_weights(panel)
        out = consensus_dimension_weights(panel, omega)
        assert out.entries == pytest.approx(p.entries, abs=1e-15)

    def test_two_group_toy(self):
        proposals = [SimplexWeights([1.0, 0.0]), SimplexWeights([0.0, 1.0])] + [
            SimplexWeights([0.5, 0.5])
        ] * 5
        panel = make_panel(proposals, d=2)
        omega = SimplexWeights([0.5, 0.5, 0, 0, 0, 0, 0])
        out = consensus_dimension_weights(panel, omega)
        assert out.entries == pytest.approx((0.5, 0.5), abs=1e-15)

    def test_uniform_omega_is_mean(self):
        rng = np.random.default_rng(5)
        props = []
        for _ in range(7):
            raw = rng.uniform(0.01, 1, 7)
            props.append(SimplexWeights(raw / raw.sum()))
        panel = make_panel(props)
        omega = SimplexWeights.uniform(7)
        out = consensus_dimension_weights(panel, omega)
        expected = np.mean([p.entries for p in props], axis=0)
        assert out.entries == pytest.approx(tuple(expected), abs=1e-12)

    def test_convex_combination_bounds(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            props = []
            for _ in range(7):
                raw = rng.uniform(0.01, 1, 5)
                props.append(SimplexWeights(raw / raw.sum()))
            panel = make_panel(props, d=5)
            omega = aggregate_stakeholder_weights(panel)
            out = consensus_dimension_weights(panel, omega)
            mat = np.array([p.entries for p in props])
            assert np.all(np.array(out.entries) >= mat.min(axis=0) - 1e-12)
            assert np.all(np.array(out.entries) <= mat.max(axis=0) + 1e-12)


class TestDisagreement:
    def test_identical_proposals_no_flag(self):
        panel = make_panel([SimplexWeights.uniform(7)] * 7)
        report = weight_disagreement(panel)
        assert report.max_variance == 0.0
        assert not report.flagged

    def test_alternating_proposals(self):
        # 4 groups at (1,0), 3 at (0,1): population variance 12/49 per dimension
        proposals = [
            SimplexWeights([1.0, 0.0]) if i % 2 == 0 else SimplexWeights([0.0, 1.0])
            for i in range(7)
        ]
        panel = make_panel(proposals, d=2)
        report = weight_disagreement(panel)
        assert report.per_dimension_variance[0] == pytest.approx(12 / 49, abs=1e-12)
        assert report.per_dimension_variance[1] == pytest.approx(12 / 49, abs=1e-12)
        assert report.flagged

    def test_infinite_threshold_never_flags(self):
        proposals = [
            SimplexWeights([1.0, 0.0]) if i % 2 == 0 else SimplexWeights([0.0, 1.0])
            for i in range(7)
        ]
        panel = make_panel(proposals, d=2)
        assert not weight_disagreement(panel, tau=math.inf).flagged


class TestSensitivity:
    def test_identical_proposals_stable_zero_width(self):
        panel = make_panel([SimplexWeights.uniform(7)] * 7)
        f = RiskVector([0.4] * 7)
        report = sensitivity_analysis(f, panel, ModelParams.zeros(7), default_schedule(), 0.0)
        assert report.score_max - report.score_min == 0.0
        assert report.stable
        # identical proposals: consensus equals every per-stakeholder score
        assert report.consensus_score == report.per_stakeholder[0].score

    def test_tier_straddle_unstable(self):
        # d=4 classic pipeline with f = (1,0,0,0): linear score equals proposal[0]
        proposals = [
            SimplexWeights([0.55, 0.15, 0.15, 0.15]) if i < 3 else SimplexWeights([0.65, 0.15, 0.1, 0.1])
            for i in range(7)
        ]
        panel = make_panel(proposals, d=4)
        f = RiskVector([1.0, 0.0, 0.0, 0.0], labels=("I", "E", "R", "X"))
        report = sensitivity_analysis(f, panel, None, default_schedule(), 0.0)
        scores = sorted({round(e.score, 10) for e in report.per_stakeholder})
        assert scores == [0.55, 0.65]
        assert not report.stable

    def test_uniform_reweight_is_identity(self):
        f = RiskVector([0.1, 0.5, 0.9, 0.3, 0.2, 0.7, 0.4])
        out = reweight_factors(f, SimplexWeights.uniform(7))
        assert out.entries == pytest.approx(f.entries, abs=1e-15)

    def test_learned_pipeline_uniform_panel_matches_canonical(self):
        from issengine.scoring import iss_polynomial

        rng = np.random.default_rng(8)
        params = ModelParams(rng.uniform(-1, 1, 7), rng.uniform(-0.3, 0.3, (7, 7)), 0.2)
        panel = make_panel([SimplexWeights.uniform(7)] * 7)
        f = RiskVector(rng.uniform(0, 1, 7))
        report = sensitivity_analysis(f, panel, params, default_schedule(), 0.0)
        assert report.consensus_score == pytest.approx(iss_polynomial(f, params), abs=1e-12)

    def test_dimension_mismatch(self):
        panel = make_panel([SimplexWeights.uniform(4)] * 7, d=4)
        with pytest.raises(DimensionMismatchError):
            sensitivity_analysis(
                RiskVector([0.5] * 7), panel, ModelParams.zeros(7), default_schedule(), 0.0
            )

    def test_learned_pipeline_requires_params(self):
        panel = make_panel([SimplexWeights.uniform(7)] * 7)
        with pytest.raises(ValidationError, match="params"):
            sensitivity_analysis(RiskVector([0.5] * 7), panel, None, default_schedule(), 0.0)


def divergent_panel(d=4):
    """A panel whose proposals disagree strongly on dimension 0."""
    proposals = []
    for i in range(7):
        if i == GROUPS.index(AFFECTED_COMMUNITIES):
            proposals.append(SimplexWeights([0.7] + [0.1] * (d - 1)))
        else:
            proposals.append(SimplexWeights([0.4, 0.2, 0.2, 0.2]))
    return make_panel(proposals, d=d)


class TestPrecautionary:
    def _report(self, panel, f):
        return sensitivity_analysis(f, panel, None, default_schedule(), 0.0)

    def test_resolved_returns_consensus(self):
        panel = divergent_panel()
        f = RiskVector([1.0, 0.0, 0.0, 0.0], labels=("I", "E", "R", "X"))
        report = self._report(panel, f)
        assert report.disagreement.flagged
        out = precautionary_resolution(report, panel, resolved=True)
        assert out == report.consensus_score

    def test_unresolved_takes_affected_score(self):
        panel = divergent_panel()
        f = RiskVector([1.0, 0.0, 0.0, 0.0], labels=("I", "E", "R", "X"))
        report = self._report(panel, f)
        affected = report.score_for(AFFECTED_COMMUNITIES)
        assert affected == pytest.approx(0.7, abs=1e-12)
        out = precautionary_resolution(report, panel, resolved=False)
        assert out == affected
        assert out > report.consensus_score

    def test_multiple_rounds_take_maximum(self):
        panel = divergent_panel()
        f = RiskVector([1.0, 0.0, 0.0, 0.0], labels=("I", "E", "R", "X"))
        report = self._report(panel, f)
        out = precautionary_resolution(
            report, panel, resolved=False, prior_affected_scores=[0.6, 0.72]
        )
        assert out == 0.72

    def test_no_disagreement_returns_consensus(self):
        panel = make_panel([SimplexWeights.uniform(7)] * 7)
        f = RiskVector([0.4] * 7)
        report = sensitivity_analysis(f, panel, ModelParams.zeros(7), default_schedule(), 0.0)
        assert not report.disagreement.flagged
        out = precautionary_resolution(report, panel)
        assert out == report.consensus_score


class TestPanelValidation:
    def test_missing_group(self):
        profiles = [
            StakeholderProfile(group=g, proposal=SimplexWeights.uniform(7))
            for g in GROUPS[:-1]
        ]
        with pytest.raises(ValidationError, match="academic-researchers"):
            StakeholderPanel(profiles)

    def test_duplicate_group(self):
        profiles = [
            StakeholderProfile(group=GROUPS[0], proposal=SimplexWeights.uniform(7))
            for _ in range(2)
        ]
        with pytest.raises(ValidationError, match="duplicate"):
            StakeholderPanel(profiles)

    def test_mixed_dimensions(self):
        profiles = [
            StakeholderProfile(
                group=g, proposal=SimplexWeights.uniform(7 if i else 4)
            )
            for i, g in enumerate(GROUPS)
        ]
        with pytest.raises(DimensionMismatchError):
            StakeholderPanel(profiles)

    def test_json_round_trip(self):
        from issengine.fixtures import fixture_panel

        panel = fixture_panel()
        again = StakeholderPanel.from_dict(panel.to_dict())
        assert again == panel

    def test_canonical_group_order(self):
        assert GROUPS.index(AFFECTED_COMMUNITIES) == 4  # fifth group
