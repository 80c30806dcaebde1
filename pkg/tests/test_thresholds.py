import numpy as np
import pytest
from hypothesis import given, strategies as st

from issengine.errors import InsufficientDataError, ValidationError
from issengine.thresholds import (
    LEVELS,
    LevelThresholds,
    ScoreHistory,
    ThresholdSchedule,
    classify_enforcement,
    default_schedule,
    empirical_cdf,
    evaluate_triggers,
    phase_from_months,
    smoothstep,
    threshold_at,
)

SCHEDULE = default_schedule()

# (level, t) -> (s, a): the stock table at the phase endpoints
TABLE = {
    ("L", 0.0): (0.2, 0.1),
    ("L", 1.0): (0.3, 0.15),
    ("M", 0.0): (0.5, 0.05),
    ("M", 1.0): (0.6, 0.1),
    ("H", 0.0): (0.8, 0.01),
    ("H", 1.0): (0.75, 0.05),
}


class TestSmoothstep:
    def test_endpoints(self):
        assert smoothstep(0.0) == 0.0
        assert smoothstep(1.0) == 1.0

    def test_midpoint(self):
        assert smoothstep(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_quarter(self):
        assert smoothstep(0.25) == pytest.approx(0.15625, abs=1e-15)

    def test_monotone_on_grid(self):
        grid = np.linspace(0, 1, 1000)
        vals = [smoothstep(t) for t in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_flat_endpoint_derivatives(self):
        # second-order one-sided stencils; analytic slope is 0 at both ends
        h = 1e-4
        d0 = (-3 * smoothstep(0.0) + 4 * smoothstep(h) - smoothstep(2 * h)) / (2 * h)
        d1 = (3 * smoothstep(1.0) - 4 * smoothstep(1.0 - h) + smoothstep(1.0 - 2 * h)) / (2 * h)
        assert abs(d0) <= 1e-6
        assert abs(d1) <= 1e-6

    def test_out_of_range_clamped_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            assert smoothstep(-0.5) == 0.0
            assert smoothstep(1.5) == 1.0
        assert sum("clamping" in r.message for r in caplog.records) == 2


class TestThresholdAt:
    @pytest.mark.parametrize("level,t", list(TABLE))
    def test_table_fidelity(self, level, t):
        assert threshold_at(level, t, SCHEDULE) == TABLE[(level, t)]

    def test_low_midpoint(self):
        s, a = threshold_at("L", 0.5, SCHEDULE)
        assert s == pytest.approx(0.25, abs=1e-15)
        assert a == pytest.approx(0.125, abs=1e-15)

    def test_unknown_level(self):
        with pytest.raises(ValidationError, match="level"):
            threshold_at("X", 0.0, SCHEDULE)

    def test_continuous_in_t(self):
        ts = np.linspace(0, 1, 200)
        for level in LEVELS:
            vals = [threshold_at(level, t, SCHEDULE)[0] for t in ts]
            diffs = np.abs(np.diff(vals))
            assert diffs.max() < 0.01  # no jumps on a fine grid


class TestPhaseMapping:
    def test_zero_and_cap(self):
        assert phase_from_months(0) == 0.0
        assert phase_from_months(72) == 1.0
        assert phase_from_months(200) == 1.0

    def test_midpoint(self):
        assert phase_from_months(36) == pytest.approx(0.5)


class TestEmpiricalCdf:
    def test_all_equal(self):
        h = ScoreHistory([0.4] * 10)
        assert empirical_cdf(h, 0.4) == 1.0

    def test_half(self):
        h = ScoreHistory([0.1, 0.3, 0.5, 0.7])
        assert empirical_cdf(h, 0.4) == 0.5

    def test_below_minimum(self):
        h = ScoreHistory([0.5, 0.6])
        assert empirical_cdf(h, 0.2) == 0.0

    def test_empty_history_errors(self):
        with pytest.raises(InsufficientDataError):
            empirical_cdf(ScoreHistory(), 0.5)

    def test_right_continuity(self):
        # a query exactly at a stored score counts that score
        h = ScoreHistory([0.2, 0.5, 0.5, 0.9])
        assert empirical_cdf(h, 0.5) == 0.75
        assert empirical_cdf(h, 0.5 - 1e-12) == 0.25

    @given(st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=50))
    def test_monotone_in_s(self, scores):
        h = ScoreHistory(scores)
        qs = np.linspace(0, 1, 21)
        vals = [empirical_cdf(h, q) for q in qs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestScoreHistory:
    def test_window_trim(self):
        h = ScoreHistory(np.linspace(0, 1, 600), window=500)
        assert len(h) == 500
        assert h.scores[0] == pytest.approx(np.linspace(0, 1, 600)[100])

    def test_with_score_returns_new(self):
        h = ScoreHistory([0.1])
        h2 = h.with_score(0.9)
        assert len(h) == 1 and len(h2) == 2
        assert h2.scores[-1] == 0.9

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError, match=r"scores\[0\]"):
            ScoreHistory([1.4])


class TestTriggers:
    def test_cold_start_high_score(self):
        report = evaluate_triggers(0.9, ScoreHistory(), 0.0, SCHEDULE)
        assert report.fired_levels("incident") == ["L", "M", "H"]
        for lt in report.levels:
            assert lt.population_fired is None
            assert lt.to_dict()["population"]["status"] == "insufficient-data"

    def test_population_quiet_history(self):
        h = ScoreHistory([0.1] * 100)
        report = evaluate_triggers(0.1, h, 0.0, SCHEDULE)
        lt = report.levels[0]
        assert lt.level == "L"
        assert lt.population_fired is False  # 1 - F(0.2) = 0 < 0.1

    def test_population_heavy_tail(self):
        scores = [0.95] * 20 + [0.1] * 80
        report = evaluate_triggers(0.1, ScoreHistory(scores), 0.0, SCHEDULE)
        high = report.levels[2]
        assert high.level == "H"
        assert high.population_fired is True  # 0.20 >= 0.01
        assert high.exceedance == pytest.approx(0.2, abs=1e-12)

    def test_incident_trigger_at_exact_threshold(self):
        # the trigger comparison is >=, matching the population rule
        report = evaluate_triggers(0.5, ScoreHistory(), 0.0, SCHEDULE)
        assert report.fired_levels("incident") == ["L", "M"]

    def test_incident_monotone_across_levels(self):
        # whenever s_L(t) <= s_M(t) <= s_H(t), M firing implies L firing
        rng = np.random.default_rng(2)
        for t in np.linspace(0, 1, 21):
            s_l, _ = threshold_at("L", t, SCHEDULE)
            s_m, _ = threshold_at("M", t, SCHEDULE)
            assert s_l <= s_m
            for current in rng.uniform(0, 1, 20):
                report = evaluate_triggers(current, ScoreHistory(), t, SCHEDULE)
                fired = report.fired_levels("incident")
                if "M" in fired:
                    assert "L" in fired

    def test_min_samples_boundary(self):
        h = ScoreHistory([0.5] * 29, min_samples=30)
        report = evaluate_triggers(0.5, h, 0.0, SCHEDULE)
        assert all(lt.population_fired is None for lt in report.levels)
        report2 = evaluate_triggers(0.5, h.with_score(0.5), 0.0, SCHEDULE)
        assert all(lt.population_fired is not None for lt in report2.levels)


class TestEnforcement:
    @pytest.mark.parametrize(
        "score,tier",
        [(0.65, "moderate"), (0.85, "extreme"), (0.6, "none"), (0.8, "moderate"), (0.0, "none"), (1.0, "extreme")],
    )
    def test_boundaries(self, score, tier):
        assert classify_enforcement(score).name == tier

    def test_monotone(self):
        rng = np.random.default_rng(1)
        order = {"none": 0, "moderate": 1, "extreme": 2}
        for _ in range(500):
            a, b = sorted(rng.uniform(0, 1, 2))
            assert order[classify_enforcement(a).name] <= order[classify_enforcement(b).name]

    def test_action_lists(self):
        assert classify_enforcement(0.5).actions == ()
        moderate = classify_enforcement(0.7).actions
        assert any("15-30 day" in a for a in moderate)
        extreme = classify_enforcement(0.9).actions
        assert any("suspension" in a for a in extreme)
        assert set(moderate) < set(extreme)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            classify_enforcement(1.2)


class TestScheduleSerialization:
    def test_round_trip(self):
        blob = SCHEDULE.to_dict()
        again = ThresholdSchedule.from_dict(blob)
        assert again == SCHEDULE

    def test_missing_level(self):
        with pytest.raises(ValidationError, match="missing levels"):
            ThresholdSchedule({"L": LevelThresholds(0.1, 0.2, 0.1, 0.2)})

    def test_rejects_out_of_range_entry(self):
        with pytest.raises(ValidationError, match="s_init"):
            LevelThresholds(1.2, 0.2, 0.1, 0.2)
