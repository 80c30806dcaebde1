"""Figure rendering for reports.

Every CLI report path can drop PNG figures next to its delimited output.
All functions write a file and return its path; rendering is headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .stakeholders import GROUPS, SensitivityReport
from .thresholds import LEVELS, ThresholdSchedule, threshold_at

TIER_BOUNDARIES = (0.6, 0.8)
_LEVEL_COLORS = {"L": "#2a9d8f", "M": "#e9a227", "H": "#d1403f"}


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_loss_curve(trace, path) -> Path:
    """Training loss and gradient norm per accepted iteration."""
    its = [r.iteration for r in trace.rows]
    losses = [r.loss for r in trace.rows]
    gnorms = [r.grad_norm for r in trace.rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(its, losses, color="#1f77b4", label="objective")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective", color="#1f77b4")
    if min(losses) > 0:
        ax.set_yscale("log")
    ax2 = ax.twinx()
    ax2.plot(its, gnorms, color="#aaaaaa", lw=0.9, label="gradient norm")
    ax2.set_ylabel("gradient norm", color="#888888")
    if min(gnorms) > 0:
        ax2.set_yscale("log")
    ax.set_title(f"training trace (stop: {trace.stop_reason})")
    return _finish(fig, path)


def save_threshold_curves(schedule: ThresholdSchedule, path) -> Path:
    """Severity and probability thresholds across the phase parameter."""
    ts = np.linspace(0.0, 1.0, 201)
    fig, (ax_s, ax_a) = plt.subplots(1, 2, figsize=(10, 4))
    for level in LEVELS:
        pairs = [threshold_at(level, t, schedule) for t in ts]
        ax_s.plot(ts, [p[0] for p in pairs], color=_LEVEL_COLORS[level], label=level)
        ax_a.plot(ts, [p[1] for p in pairs], color=_LEVEL_COLORS[level], label=level)
    ax_s.set_xlabel("phase t")
    ax_s.set_ylabel("severity threshold s(t)")
    ax_a.set_xlabel("phase t")
    ax_a.set_ylabel("probability threshold a(t)")
    ax_s.legend(title="level")
    ax_a.legend(title="level")
    fig.suptitle("phase-dependent trigger thresholds")
    return _finish(fig, path)


def save_retrospective_scores(report_dict: dict, path) -> Path:
    """Grouped bars: score per incident under each weighting, tier bands marked."""
    incidents = report_dict["incidents"]
    names = ["(canonical)"] + report_dict["config"]["weightings"]
    ids = [inc["id"] for inc in incidents]
    n_inc, n_w = len(ids), len(names)
    width = 0.8 / n_w
    fig, ax = plt.subplots(figsize=(max(7, 1.8 * n_inc), 4.5))
    x = np.arange(n_inc)
    for j, name in enumerate(names):
        if name == "(canonical)":
            scores = [inc["canonical"]["score"] for inc in incidents]
        else:
            scores = [
                next(w["score"] for w in inc["weightings"] if w["name"] == name)
                for inc in incidents
            ]
        ax.bar(x + (j - (n_w - 1) / 2) * width, scores, width, label=name)
    for b in TIER_BOUNDARIES:
        ax.axhline(b, color="#999999", ls="--", lw=0.8)
    ax.set_xticks(x, ids, rotation=20, ha="right")
    ax.set_ylim(0, 1)
    ax.set_ylabel("severity score")
    ax.legend(fontsize=8)
    ax.set_title("retrospective scores by weighting")
    return _finish(fig, path)


def save_sensitivity_ranges(report: SensitivityReport, path) -> Path:
    """Per-stakeholder scores with the consensus score and tier boundaries."""
    scores = [e.score for e in report.per_stakeholder]
    ys = np.arange(len(GROUPS))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.axvspan(TIER_BOUNDARIES[0], TIER_BOUNDARIES[1], color="#e9a227", alpha=0.12)
    ax.axvspan(TIER_BOUNDARIES[1], 1.0, color="#d1403f", alpha=0.12)
    ax.scatter(scores, ys, color="#1f77b4", zorder=3)
    ax.axvline(report.consensus_score, color="#444444", ls="-", lw=1.2, label="consensus")
    ax.set_yticks(ys, GROUPS)
    ax.set_xlim(0, 1)
    ax.set_xlabel("severity score under the group's proposal")
    ax.invert_yaxis()
    ax.legend(fontsize=8)
    ax.set_title(f"sensitivity (stable={report.stable})")
    return _finish(fig, path)


def save_weight_bars(weights, labels, path, title="consensus dimension weights") -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = np.arange(len(weights))
    ax.bar(xs, list(weights), color="#2a9d8f")
    ax.set_xticks(xs, labels, rotation=20, ha="right")
    ax.set_ylabel("weight")
    ax.set_title(title)
    return _finish(fig, path)
