"""Access to the data files shipped inside the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .fixtures import fixture_panel
from .retrospective import RetrospectiveConfig, WeightingConfig
from .risk_model import CATEGORIES
from .scoring import ModelParams
from .thresholds import default_schedule


def _data_path(name: str) -> Path:
    return Path(str(resources.files("issengine").joinpath("data", name)))


def fixture_corpus_path() -> Path:
    """The bundled 3-incident synthetic corpus (seed 1)."""
    return _data_path("fixture_corpus.jsonl")


def fixture_panel_path() -> Path:
    return _data_path("fixture_panel.json")


def golden_report_path() -> Path:
    """The reviewed reference report for the bundled corpus."""
    return _data_path("golden_report.json")


def default_schedule_path() -> Path:
    return _data_path("default_schedule.json")


def golden_config() -> RetrospectiveConfig:
    """Bundled corpus + bundled panel + default schedule + zero params at t=0."""
    from .corpus import load_corpus

    return RetrospectiveConfig(
        records=load_corpus(fixture_corpus_path()),
        weightings=[WeightingConfig("fixture", fixture_panel())],
        params=ModelParams.zeros(len(CATEGORIES)),
        schedule=default_schedule(),
        t=0.0,
    )
