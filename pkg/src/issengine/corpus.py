"""Incident corpus files and parameter/schedule persistence.

Corpus files are UTF-8, newline-delimited JSON: a header line
``{"iss_corpus":1}`` followed by one incident record per line. Canonical
form uses compact separators and sorted keys, so serialize(parse(file))
round-trips byte-identically.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import ValidationError
from .risk_model import CATEGORIES, IncidentRecord, SubComponentTriple
from .scoring import ModelParams
from .thresholds import ThresholdSchedule

SCHEMA_VERSION = 1
HEADER = '{"iss_corpus":1}'


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def timestamp_to_str(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def timestamp_from_str(raw: str) -> datetime:
    try:
        ts = datetime.strptime(raw, "%Y-%m-%dT%H:%M:%SZ")
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"timestamp: expected YYYY-MM-DDTHH:MM:SSZ, got {raw!r}") from exc
    return ts.replace(tzinfo=timezone.utc)


def incident_to_dict(rec: IncidentRecord) -> dict:
    cats = {}
    for cat in CATEGORIES:
        triple = rec.category_inputs[cat]
        cats[cat] = {"values": list(triple.values), "weights": list(triple.weights)}
    obj = {
        "id": rec.id,
        "timestamp": timestamp_to_str(rec.timestamp),
        "category_inputs": cats,
    }
    if rec.label is not None:
        obj["label"] = rec.label
    if rec.metadata:
        obj["metadata"] = dict(rec.metadata)
    return obj


def incident_from_dict(obj: dict) -> IncidentRecord:
    if not isinstance(obj, dict):
        raise ValidationError(f"record must be a JSON object, got {type(obj).__name__}")
    for name in ("id", "timestamp", "category_inputs"):
        if name not in obj:
            raise ValidationError(f"record missing field {name!r}")
    cats = {}
    raw_cats = obj["category_inputs"]
    if not isinstance(raw_cats, dict):
        raise ValidationError("category_inputs must be a JSON object")
    for cat, entry in raw_cats.items():
        try:
            values = entry["values"]
            weights = entry.get("weights", (1 / 3, 1 / 3, 1 / 3))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"category {cat!r}: missing values") from exc
        try:
            cats[cat] = SubComponentTriple(tuple(values), tuple(weights))
        except ValidationError as exc:
            raise ValidationError(f"category {cat!r}: {exc}") from exc
    return IncidentRecord(
        id=str(obj["id"]),
        timestamp=timestamp_from_str(obj["timestamp"]),
        category_inputs=cats,
        label=obj.get("label"),
        metadata=obj.get("metadata", {}),
    )


def serialize_incident(rec: IncidentRecord) -> str:
    return _canonical(incident_to_dict(rec))


def load_corpus(path) -> list[IncidentRecord]:
    """Parse and validate a corpus file; errors carry line numbers."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file, expected header {HEADER}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:1: header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or "iss_corpus" not in header:
        raise ValidationError(f"{path}:1: missing iss_corpus header")
    if header["iss_corpus"] != SCHEMA_VERSION:
        raise ValidationError(
            f"{path}:1: schema version {header['iss_corpus']} not supported (expected {SCHEMA_VERSION})"
        )
    records: list[IncidentRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            rec = incident_from_dict(obj)
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
        if rec.id in seen:
            raise ValidationError(f"{path}:{lineno}: duplicate incident id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return records


def dump_corpus(records: Iterable[IncidentRecord]) -> str:
    lines = [HEADER]
    lines.extend(serialize_incident(rec) for rec in records)
    return "\n".join(lines) + "\n"


def save_corpus(records: Iterable[IncidentRecord], path) -> None:
    Path(path).write_text(dump_corpus(records), encoding="utf-8")


def load_incident(path) -> IncidentRecord:
    """Read a single-record JSON file (one incident object, not a corpus)."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return incident_from_dict(obj)


def save_params(params: ModelParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_params(path) -> ModelParams:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return ModelParams.from_dict(obj)


def save_schedule(schedule: ThresholdSchedule, path) -> None:
    Path(path).write_text(json.dumps(schedule.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_schedule(path) -> ThresholdSchedule:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return ThresholdSchedule.from_dict(obj)
