"""Retrospective validation harness.

Replays a corpus of incidents through the full pipeline: assemble each
risk vector, score it under one or more named stakeholder weightings,
evaluate phase-dependent triggers against a rolling score history, and
surface any recorded real-world outcome next to the engine's
recommendation. Reports are deterministic given inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from . import corpus as corpus_io
from .errors import ValidationError
from .risk_model import CATEGORIES, IncidentRecord, assemble_risk_vector
from .scoring import ModelParams, iss_polynomial
from .stakeholders import (
    REWEIGHT_CONVENTION_NOTE,
    StakeholderPanel,
    aggregate_stakeholder_weights,
    consensus_dimension_weights,
    reweight_factors,
)
from .thresholds import (
    ScoreHistory,
    ThresholdSchedule,
    classify_enforcement,
    default_schedule,
    evaluate_triggers,
    phase_from_months,
)

REPORT_SCHEMA = 1

_DAYS_PER_MONTH = 30.4375  # mean Gregorian month


@dataclass(frozen=True)
class WeightingConfig:
    name: str
    panel: StakeholderPanel


@dataclass
class RetrospectiveConfig:
    records: list[IncidentRecord]
    weightings: list[WeightingConfig]
    params: ModelParams
    schedule: ThresholdSchedule = field(default_factory=default_schedule)
    t: Optional[float] = 0.0
    roadmap_start: Optional[datetime] = None

    def __post_init__(self):
        if not self.weightings:
            raise ValidationError("at least one weighting configuration is required")
        names = [w.name for w in self.weightings]
        if len(set(names)) != len(names):
            raise ValidationError(f"weighting names must be unique, got {names}")
        if self.t is None and self.roadmap_start is None:
            raise ValidationError("either a fixed t or a roadmap_start is required")
        if self.t is not None and self.roadmap_start is not None:
            raise ValidationError("fixed t and roadmap_start are mutually exclusive")

    def phase_for(self, rec: IncidentRecord) -> float:
        if self.t is not None:
            return self.t
        months = (rec.timestamp - self.roadmap_start).total_seconds() / 86400.0 / _DAYS_PER_MONTH
        return phase_from_months(months)


@dataclass
class RetrospectiveReport:
    config_summary: dict
    incidents: list[dict]

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "config": self.config_summary,
            "incidents": self.incidents,
            "convention_note": REWEIGHT_CONVENTION_NOTE,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = ["retrospective run", "=" * 60]
        for inc in self.incidents:
            lines.append(f"incident {inc['id']}  ({inc['timestamp']}, t={inc['t']:g})")
            cano = inc["canonical"]
            lines.append(f"  canonical score {cano['score']:.4f}  tier={cano['tier']}")
            for w in inc["weightings"]:
                fired = ",".join(w["triggers"]["incident_fired"]) or "-"
                lines.append(
                    f"  [{w['name']}] score {w['score']:.4f}  tier={w['tier']}"
                    f"  incident-triggers={fired}"
                )
                if w["actual_outcome"] is not None:
                    lines.append(f"    recorded outcome: {w['actual_outcome']}")
            lines.append("")
        return "\n".join(lines)

    def to_csv(self) -> str:
        rows = ["incident_id,timestamp,t,weighting,score,tier,incident_triggers,population_triggers"]
        for inc in self.incidents:
            base = f"{inc['id']},{inc['timestamp']},{inc['t']:g}"
            cano = inc["canonical"]
            fired = ";".join(cano["triggers"]["incident_fired"])
            pop = ";".join(cano["triggers"]["population_fired"] or [])
            rows.append(f"{base},(canonical),{cano['score']!r},{cano['tier']},{fired},{pop}")
            for w in inc["weightings"]:
                fired = ";".join(w["triggers"]["incident_fired"])
                pop = ";".join(w["triggers"]["population_fired"] or [])
                rows.append(f"{base},{w['name']},{w['score']!r},{w['tier']},{fired},{pop}")
        return "\n".join(rows) + "\n"


def _trigger_summary(report) -> dict:
    pop_ok = report.history_size >= report.min_samples
    return {
        "t": report.t,
        "history_size": report.history_size,
        "incident_fired": report.fired_levels("incident"),
        "population_fired": report.fired_levels("population") if pop_ok else None,
        "population_status": "ok" if pop_ok else "insufficient-data",
        "levels": [lt.to_dict() for lt in report.levels],
    }


def retrospective_run(cfg: RetrospectiveConfig) -> RetrospectiveReport:
    """Replay every incident under every weighting; deterministic given inputs."""
    weighting_names = [w.name for w in cfg.weightings]
    consensus: dict[str, list] = {}
    for w in cfg.weightings:
        omega = aggregate_stakeholder_weights(w.panel)
        consensus[w.name] = [omega, consensus_dimension_weights(w.panel, omega)]

    histories: dict[str, ScoreHistory] = {name: ScoreHistory() for name in weighting_names}
    histories["(canonical)"] = ScoreHistory()

    incidents = []
    for rec in cfg.records:
        t = cfg.phase_for(rec)
        try:
            f = assemble_risk_vector(rec)
        except ValidationError as exc:
            raise ValidationError(f"incident {rec.id!r}: {exc}") from exc

        canonical_score = iss_polynomial(f, cfg.params)
        canonical_triggers = evaluate_triggers(
            canonical_score, histories["(canonical)"], t, cfg.schedule
        )
        histories["(canonical)"] = histories["(canonical)"].with_score(canonical_score)

        per_weighting = []
        for w in cfg.weightings:
            omega, cons_w = consensus[w.name]
            score = iss_polynomial(reweight_factors(f, cons_w), cfg.params)
            triggers = evaluate_triggers(score, histories[w.name], t, cfg.schedule)
            histories[w.name] = histories[w.name].with_score(score)
            per_weighting.append(
                {
                    "name": w.name,
                    "omega": list(omega.entries),
                    "consensus_weights": list(cons_w.entries),
                    "score": score,
                    "tier": classify_enforcement(score).name,
                    "triggers": _trigger_summary(triggers),
                    "actual_outcome": rec.metadata.get("actual_outcome"),
                }
            )

        incidents.append(
            {
                "id": rec.id,
                "timestamp": corpus_io.timestamp_to_str(rec.timestamp),
                "t": t,
                "risk_vector": {cat: val for cat, val in zip(CATEGORIES, f.entries)},
                "canonical": {
                    "score": canonical_score,
                    "tier": classify_enforcement(canonical_score).name,
                    "triggers": _trigger_summary(canonical_triggers),
                },
                "weightings": per_weighting,
            }
        )

    config_summary = {
        "phase": {"mode": "fixed", "t": cfg.t}
        if cfg.t is not None
        else {"mode": "timestamp", "roadmap_start": corpus_io.timestamp_to_str(cfg.roadmap_start)},
        "schedule": cfg.schedule.to_dict(),
        "params": cfg.params.to_dict(),
        "weightings": weighting_names,
        "n_incidents": len(cfg.records),
    }
    return RetrospectiveReport(config_summary, incidents)


def config_from_file(path) -> RetrospectiveConfig:
    """Load a retrospective config document; path fields resolve relative to it."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    base = path.parent

    def _resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    if "corpus" not in obj:
        raise ValidationError(f"{path}: config missing 'corpus'")
    records = corpus_io.load_corpus(_resolve(obj["corpus"]))

    raw_weightings = obj.get("weightings")
    if not raw_weightings:
        raise ValidationError(f"{path}: config needs a non-empty 'weightings' list")
    weightings = []
    for entry in raw_weightings:
        name = entry.get("name")
        if not name:
            raise ValidationError(f"{path}: every weighting needs a 'name'")
        panel_spec = entry.get("panel")
        if isinstance(panel_spec, str):
            panel_obj = json.loads(_resolve(panel_spec).read_text(encoding="utf-8"))
        elif isinstance(panel_spec, dict):
            panel_obj = panel_spec
        else:
            raise ValidationError(f"{path}: weighting {name!r} needs a panel path or object")
        weightings.append(WeightingConfig(name, StakeholderPanel.from_dict(panel_obj)))

    params_spec = obj.get("params")
    if params_spec is None:
        params = ModelParams.zeros(len(CATEGORIES))
    elif isinstance(params_spec, str):
        params = corpus_io.load_params(_resolve(params_spec))
    else:
        params = ModelParams.from_dict(params_spec)

    schedule_spec = obj.get("schedule")
    if schedule_spec is None:
        schedule = default_schedule()
    elif isinstance(schedule_spec, str):
        schedule = corpus_io.load_schedule(_resolve(schedule_spec))
    else:
        schedule = ThresholdSchedule.from_dict(schedule_spec)

    roadmap_start = obj.get("roadmap_start")
    if roadmap_start is not None:
        return RetrospectiveConfig(
            records=records,
            weightings=weightings,
            params=params,
            schedule=schedule,
            t=None,
            roadmap_start=corpus_io.timestamp_from_str(roadmap_start),
        )
    return RetrospectiveConfig(
        records=records,
        weightings=weightings,
        params=params,
        schedule=schedule,
        t=float(obj.get("t", 0.0)),
    )
