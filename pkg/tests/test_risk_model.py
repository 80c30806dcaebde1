import math
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, strategies as st

from issengine.errors import ValidationError
from issengine.risk_model import (
    CATEGORIES,
    IncidentRecord,
    RiskVector,
    SubComponentTriple,
    assemble_risk_vector,
    category_score,
)

EQUAL = (1 / 3, 1 / 3, 1 / 3)
TS = datetime(2021, 3, 1, tzinfo=timezone.utc)


def make_incident(inputs=None, label=None):
    cats = {cat: SubComponentTriple((0.0, 0.0, 0.0)) for cat in CATEGORIES}
    if inputs:
        cats.update(inputs)
    return IncidentRecord(id="t-1", timestamp=TS, category_inputs=cats, label=label)


class TestCategoryScore:
    def test_all_zero_values(self):
        assert category_score(SubComponentTriple((0, 0, 0), EQUAL)) == 0.0

    @pytest.mark.parametrize("c", [0.1, 0.5, 1.0])
    def test_single_nonzero_value(self, c):
        # (c/3) / c == 1/3 regardless of magnitude
        score = category_score(SubComponentTriple((c, 0, 0), EQUAL))
        assert score == pytest.approx(1 / 3, abs=1e-12)

    def test_equal_values(self):
        score = category_score(SubComponentTriple((0.5, 0.5, 0.5), EQUAL))
        assert score == pytest.approx(1 / math.sqrt(3), abs=1e-12)

    def test_value_out_of_range_names_field(self):
        with pytest.raises(ValidationError, match=r"values\[1\]"):
            SubComponentTriple((0.2, 1.4, 0.0), EQUAL)

    def test_negative_weight_names_field(self):
        with pytest.raises(ValidationError, match=r"weights\[2\]"):
            SubComponentTriple((0.2, 0.4, 0.0), (0.5, 0.5, -0.1))

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ValidationError, match="zero"):
            SubComponentTriple((0.2, 0.4, 0.0), (0.0, 0.0, 0.0))

    def test_cauchy_schwarz_bound_random(self):
        rng = np.random.default_rng(11)
        for _ in range(10_000):
            v = rng.uniform(0, 1, 3)
            u = rng.uniform(0, 2, 3)
            if u.sum() == 0:
                continue
            score = category_score(SubComponentTriple(tuple(v), tuple(u)))
            assert score <= np.linalg.norm(u) + 1e-12

    @given(
        c=st.floats(min_value=1e-6, max_value=1e6),
        v=st.tuples(
            st.floats(min_value=0, max_value=1),
            st.floats(min_value=0, max_value=1),
            st.floats(min_value=0, max_value=1),
        ),
    )
    def test_positive_homogeneity(self, c, v):
        # scaling all values by c > 0 leaves the ratio unchanged
        scaled = tuple(min(x * c, 1.0) for x in v)
        if any(x * c > 1.0 for x in v):
            return  # scaling left [0,1]; invariant applies to the raw ratio only
        base = category_score(SubComponentTriple(v, EQUAL))
        assert category_score(SubComponentTriple(scaled, EQUAL)) == pytest.approx(base, abs=1e-12)

    def test_clamp_warns(self, caplog):
        # weights with ||u||_2 > 1 can push the ratio above 1
        triple = SubComponentTriple((0.5, 0.5, 0.5), (2.0, 2.0, 2.0))
        with caplog.at_level("WARNING"):
            score = category_score(triple)
        assert score == 1.0
        assert any("clamp" in rec.message for rec in caplog.records)


class TestRiskVector:
    def test_assemble_all_zero(self):
        f = assemble_risk_vector(make_incident())
        assert f.entries == (0.0,) * 7
        assert f.labels == CATEGORIES

    def test_assemble_single_category(self):
        inc = make_incident({"elec": SubComponentTriple((0.9, 0, 0), EQUAL)})
        f = assemble_risk_vector(inc)
        expected = [0.0] * 7
        expected[CATEGORIES.index("elec")] = 1 / 3
        assert f.entries == pytest.approx(expected, abs=1e-12)

    def test_assemble_all_equal(self):
        inc = make_incident(
            {cat: SubComponentTriple((0.5, 0.5, 0.5), EQUAL) for cat in CATEGORIES}
        )
        f = assemble_risk_vector(inc)
        assert all(v == pytest.approx(1 / math.sqrt(3), abs=1e-12) for v in f.entries)

    def test_canonical_ordering(self):
        assert CATEGORIES == ("disc", "surv", "elec", "manip", "civic", "capture", "emerg")

    def test_error_carries_category_name(self, monkeypatch):
        import issengine.risk_model as rm

        def boom(triple):
            raise ValidationError("values[0] must lie in [0, 1]")

        monkeypatch.setattr(rm, "category_score", boom)
        with pytest.raises(ValidationError, match="disc"):
            rm.assemble_risk_vector(make_incident())

    def test_entry_out_of_range(self):
        with pytest.raises(ValidationError, match=r"entries\[2\]"):
            RiskVector([0.1, 0.2, 1.5])


class TestIncidentRecord:
    def test_missing_category_rejected(self):
        cats = {cat: SubComponentTriple((0, 0, 0)) for cat in CATEGORIES if cat != "manip"}
        with pytest.raises(ValidationError, match="manip"):
            IncidentRecord(id="x", timestamp=TS, category_inputs=cats)

    def test_unknown_category_rejected(self):
        cats = {cat: SubComponentTriple((0, 0, 0)) for cat in CATEGORIES}
        cats["extra"] = SubComponentTriple((0, 0, 0))
        with pytest.raises(ValidationError, match="extra"):
            IncidentRecord(id="x", timestamp=TS, category_inputs=cats)

    def test_label_out_of_range(self):
        with pytest.raises(ValidationError, match="label"):
            make_incident(label=1.2)

    def test_naive_timestamp_becomes_utc(self):
        cats = {cat: SubComponentTriple((0, 0, 0)) for cat in CATEGORIES}
        rec = IncidentRecord(id="x", timestamp=datetime(2021, 3, 1), category_inputs=cats)
        assert rec.timestamp.tzinfo is timezone.utc
