"""Command-line companion to the HTTP service.

Every computation endpoint has a matching subcommand (see
service.COMPUTATION_ROUTES); report-style subcommands can render figures
next to their delimited output. Exit codes: 0 success, 1 input validation
failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bundled import fixture_panel_path
from .corpus import (
    incident_from_dict,
    load_corpus,
    load_params,
    load_schedule,
    save_corpus,
    save_params,
    save_schedule,
)
from .errors import InsufficientDataError, NumericError, ValidationError
from .fixtures import fixture_panel, generate_fixtures
from .learning import TrainingConfig, TrainingDataset, fit, predict_batch
from .retrospective import config_from_file, retrospective_run
from .risk_model import CATEGORIES, assemble_risk_vector
from .scoring import ModelParams, SimplexWeights, iss_linear, iss_multiplicative, iss_polynomial
from .stakeholders import (
    StakeholderPanel,
    aggregate_stakeholder_weights,
    consensus_dimension_weights,
    sensitivity_analysis,
    stakeholder_utility,
    weight_disagreement,
)
from .thresholds import (
    LEVELS,
    ScoreHistory,
    classify_enforcement,
    default_schedule,
    evaluate_triggers,
    smoothstep,
    threshold_at,
)

# Mirrors service.COMPUTATION_ROUTES; asserted equal in the test suite.
ROUTE_PARITY = {
    "POST /v1/score": "score",
    "POST /v1/weights/aggregate": "weights",
    "POST /v1/sensitivity": "sensitivity",
    "POST /v1/train": "train",
    "GET /v1/thresholds": "thresholds",
    "POST /v1/retrospective": "retrospective",
}


def _load_params_or_zeros(path, d: int = len(CATEGORIES)) -> ModelParams:
    if path is None:
        return ModelParams.zeros(d)
    return load_params(path)


def _load_schedule_or_default(path):
    if path is None:
        return default_schedule()
    return load_schedule(path)


def _load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc


def _load_history(path) -> ScoreHistory:
    if path is None:
        return ScoreHistory()
    return ScoreHistory(_load_json(path))


def _load_incidents(path):
    """A corpus file (header line) or a single-record JSON object."""
    text = Path(path).read_text(encoding="utf-8")
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    if "iss_corpus" in first:
        return load_corpus(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return [incident_from_dict(obj)]


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _fmt_triggers(trigger_dict: dict) -> str:
    parts = []
    for lv in trigger_dict["levels"]:
        pop = lv["population"]
        pop_txt = {True: "yes", False: "no", None: "n/a"}[pop["fired"]]
        parts.append(
            f"{lv['level']}[s={lv['severity_threshold']:.3f} "
            f"incident={'yes' if lv['incident']['fired'] else 'no'} population={pop_txt}]"
        )
    return " ".join(parts)


# ---- subcommands -----------------------------------------------------------


def cmd_score(args) -> int:
    params = _load_params_or_zeros(args.params)
    schedule = _load_schedule_or_default(args.schedule)
    history = _load_history(args.history)
    incidents = _load_incidents(args.incident)
    bodies = []
    for rec in incidents:
        f = assemble_risk_vector(rec)
        weights = (
            SimplexWeights([float(x) for x in args.weights.split(",")])
            if args.weights
            else SimplexWeights.uniform(f.dimension)
        )
        poly = iss_polynomial(f, params)
        triggers = evaluate_triggers(poly, history, args.t, schedule)
        bodies.append(
            {
                "incident_id": rec.id,
                "risk_vector": {c: v for c, v in zip(f.labels, f.entries)},
                "scores": {
                    "linear": iss_linear(f, weights),
                    "multiplicative": iss_multiplicative(f, weights),
                    "polynomial": poly,
                },
                "factor_weights": list(weights.entries),
                "tier": classify_enforcement(poly).to_dict(),
                "triggers": triggers.to_dict(),
            }
        )
    if args.json:
        _print_json(bodies if len(bodies) > 1 else bodies[0])
        return 0
    for rec, body in zip(incidents, bodies):
        s = body["scores"]
        print(f"incident {rec.id}")
        print("  " + "  ".join(f"{c}={v:.4f}" for c, v in body["risk_vector"].items()))
        print(
            f"  linear={s['linear']:.5f}  multiplicative={s['multiplicative']:.5f}"
            f"  polynomial={s['polynomial']:.5f}"
        )
        print(f"  tier={body['tier']['name']}  triggers: {_fmt_triggers(body['triggers'])}")
    return 0


def cmd_train(args) -> int:
    records = load_corpus(args.corpus)
    dataset = TrainingDataset.from_records(records)
    cfg = TrainingConfig(
        huber_delta=args.delta,
        reg_lambda=args.reg_lambda,
        learning_rate=args.lr,
        max_iters=args.max_iters,
        regularize_bias=not args.no_bias_reg,
        init=args.init,
        seed=args.seed,
    )
    held = None
    if args.holdout:
        dataset, held = dataset.split(args.holdout, seed=args.seed)
    params, trace = fit(dataset, cfg)
    save_params(params, args.out_params)
    summary = {
        "rows": dataset.n_rows,
        "iterations": len(trace.rows),
        "final_loss": trace.rows[-1].loss,
        "final_grad_norm": trace.final_grad_norm,
        "stop_reason": trace.stop_reason,
        "params": str(args.out_params),
    }
    if held is not None:
        import numpy as np

        err = predict_batch(held.features, params) - held.labels
        summary["holdout_rows"] = held.n_rows
        summary["holdout_mae"] = float(np.mean(np.abs(err)))
    if args.trace_csv:
        trace.to_csv(args.trace_csv)
        summary["trace_csv"] = str(args.trace_csv)
    if args.fig:
        from .plots import save_loss_curve

        summary["figure"] = str(save_loss_curve(trace, args.fig))
    if args.json:
        _print_json(summary)
    else:
        for k, v in summary.items():
            print(f"{k}: {v}")
    return 0


def cmd_weights(args) -> int:
    panel = StakeholderPanel.from_dict(_load_json(args.panel))
    omega = aggregate_stakeholder_weights(panel)
    consensus = consensus_dimension_weights(panel, omega)
    disagreement = weight_disagreement(panel, args.tau)
    body = {
        "utilities": {p.group: stakeholder_utility(p) for p in panel.profiles},
        "omega": list(omega.entries),
        "consensus_weights": list(consensus.entries),
        "disagreement": disagreement.to_dict(),
    }
    if args.fig:
        from .plots import save_weight_bars

        labels = CATEGORIES if consensus.dimension == len(CATEGORIES) else [
            f"f{i}" for i in range(consensus.dimension)
        ]
        save_weight_bars(consensus.entries, labels, args.fig)
        body["figure"] = str(args.fig)
    if args.json:
        _print_json(body)
        return 0
    print("group utilities and stakeholder weights:")
    for p, w in zip(panel.profiles, omega.entries):
        print(f"  {p.group:<26} u={stakeholder_utility(p):+.4f}  omega={w:.4f}")
    print("consensus dimension weights:")
    labels = CATEGORIES if consensus.dimension == len(CATEGORIES) else range(consensus.dimension)
    print("  " + "  ".join(f"{c}={v:.4f}" for c, v in zip(labels, consensus.entries)))
    print(
        f"disagreement: max variance {disagreement.max_variance:.5f} "
        f"(tau={disagreement.threshold:g}) flagged={disagreement.flagged}"
    )
    return 0


def cmd_sensitivity(args) -> int:
    params = _load_params_or_zeros(args.params)
    schedule = _load_schedule_or_default(args.schedule)
    panel = StakeholderPanel.from_dict(_load_json(args.panel))
    rec = _load_incidents(args.incident)[0]
    f = assemble_risk_vector(rec)
    report = sensitivity_analysis(
        f, panel, params, schedule, args.t, classic_variant=args.variant
    )
    if args.fig:
        from .plots import save_sensitivity_ranges

        save_sensitivity_ranges(report, args.fig)
    if args.json:
        _print_json(report.to_dict())
        return 0
    print(f"sensitivity for incident {rec.id} (pipeline={report.pipeline}, t={args.t:g})")
    for e in report.per_stakeholder:
        print(f"  {e.group:<26} score={e.score:.5f}  tier={e.tier.name}")
    print(f"  consensus score={report.consensus_score:.5f}  tier={report.consensus_tier.name}")
    print(
        f"  range=[{report.score_min:.5f}, {report.score_max:.5f}]  stable={report.stable}"
        f"  disagreement_flagged={report.disagreement.flagged}"
    )
    return 0


def cmd_thresholds(args) -> int:
    schedule = _load_schedule_or_default(args.schedule)
    levels = [args.level] if args.level else list(LEVELS)
    body = {"t": args.t, "phi": smoothstep(args.t), "levels": {}}
    for level in levels:
        s, a = threshold_at(level, args.t, schedule)
        body["levels"][level] = {"s": s, "a": a}
    if args.fig:
        from .plots import save_threshold_curves

        save_threshold_curves(schedule, args.fig)
        body["figure"] = str(args.fig)
    if args.json:
        body["schedule"] = schedule.to_dict()
        _print_json(body)
        return 0
    for level in levels:
        lv = body["levels"][level]
        print(f"{level}: s={lv['s']:g} a={lv['a']:g}")
    return 0


def cmd_retrospective(args) -> int:
    if args.config:
        cfg = config_from_file(args.config)
    else:
        if not args.corpus:
            raise ValidationError("either --config or --corpus is required")
        from .retrospective import RetrospectiveConfig, WeightingConfig

        panel_path = args.panel or fixture_panel_path()
        panel = StakeholderPanel.from_dict(_load_json(panel_path))
        cfg = RetrospectiveConfig(
            records=load_corpus(args.corpus),
            weightings=[WeightingConfig(args.weighting_name, panel)],
            params=_load_params_or_zeros(args.params),
            schedule=_load_schedule_or_default(args.schedule),
            t=args.t,
        )
    report = retrospective_run(cfg)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(report.to_json().encode("utf-8"))
        (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        from .plots import save_retrospective_scores, save_threshold_curves

        save_retrospective_scores(report.to_dict(), out / "figures" / "scores.png")
        save_threshold_curves(cfg.schedule, out / "figures" / "thresholds.png")
        print(f"wrote report.json, report.txt, report.csv and figures/ under {out}")
        return 0
    if args.json:
        print(report.to_json(), end="")
    else:
        print(report.to_text())
    return 0


def cmd_fixtures(args) -> int:
    records = generate_fixtures(args.seed, args.n)
    save_corpus(records, args.out)
    print(f"wrote {len(records)} incidents to {args.out}")
    if args.panel_out:
        Path(args.panel_out).write_text(
            json.dumps(fixture_panel().to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote stakeholder panel to {args.panel_out}")
    if args.schedule_out:
        save_schedule(default_schedule(), args.schedule_out)
        print(f"wrote default schedule to {args.schedule_out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import AppState, create_app

    state = AppState(
        params=_load_params_or_zeros(args.params),
        schedule=_load_schedule_or_default(args.schedule),
        corpus_dir=args.corpus_dir,
        sessions_dir=args.sessions_dir,
        token=args.token,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(create_app(state), host=args.host, port=args.port, log_level="info")
    return 0


# ---- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iss", description="incident severity scoring engine")
    parser.add_argument("--version", action="version", version=f"iss-engine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score incidents from a record or corpus file")
    p.add_argument("incident", help="incident JSON file or corpus file")
    p.add_argument("--params", help="model params JSON (default: zero params)")
    p.add_argument("--schedule", help="threshold schedule JSON (default: stock schedule)")
    p.add_argument("--t", type=float, default=0.0, help="phase parameter in [0,1]")
    p.add_argument("--weights", help="comma-separated simplex weights for the classic scores")
    p.add_argument("--history", help="JSON file with a list of past scores")
    p.add_argument("--json", action="store_true", help="machine output, same shape as the service")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train", help="fit model params on a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-params", required=True)
    p.add_argument("--trace-csv", help="write the per-iteration trace CSV here")
    p.add_argument("--fig", help="write a loss-curve PNG here")
    p.add_argument("--holdout", type=float, help="fraction held out for evaluation")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--reg-lambda", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.1, help="huber transition scale")
    p.add_argument("--no-bias-reg", action="store_true", help="exclude the bias from the penalty")
    p.add_argument("--init", choices=["zeros", "seeded-uniform"], default="zeros")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("weights", help="aggregate a stakeholder panel into weights")
    p.add_argument("--panel", required=True, help="panel JSON file")
    p.add_argument("--tau", type=float, default=0.01, help="disagreement variance threshold")
    p.add_argument("--fig", help="write a consensus-weight bar chart here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("sensitivity", help="per-stakeholder what-if scores for an incident")
    p.add_argument("--incident", required=True)
    p.add_argument("--panel", required=True)
    p.add_argument("--params")
    p.add_argument("--schedule")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--variant", choices=["linear", "multiplicative"], default="linear",
                   help="classic pipeline variant used when d=4")
    p.add_argument("--fig", help="write a score-range PNG here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("thresholds", help="print the trigger thresholds at phase t")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--level", choices=list(LEVELS))
    p.add_argument("--schedule")
    p.add_argument("--fig", help="write threshold-evolution curves here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("retrospective", help="replay a corpus through the full pipeline")
    p.add_argument("--config", help="retrospective config JSON")
    p.add_argument("--corpus", help="corpus file (when no --config)")
    p.add_argument("--panel", help="panel JSON (default: bundled fixture panel)")
    p.add_argument("--weighting-name", default="panel")
    p.add_argument("--params")
    p.add_argument("--schedule")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--out", help="directory for report.json/.txt/.csv and figures/")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_retrospective)

    p = sub.add_parser("fixtures", help="generate a deterministic synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--panel-out", help="also write the bundled stakeholder panel here")
    p.add_argument("--schedule-out", help="also write the default schedule here")
    p.set_defaults(func=cmd_fixtures)

    # flags win over the matching ISS_* environment variables
    env = os.environ
    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=env.get("ISS_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(env.get("ISS_PORT", "8100")))
    p.add_argument("--params", default=env.get("ISS_PARAMS"))
    p.add_argument("--schedule", default=env.get("ISS_SCHEDULE"))
    p.add_argument("--corpus-dir", default=env.get("ISS_CORPUS_DIR"),
                   help="directory for corpus refs in train/retrospective requests")
    p.add_argument("--sessions-dir", default=env.get("ISS_SESSIONS_DIR"),
                   help="directory for per-session audit logs")
    p.add_argument("--token", default=env.get("ISS_TOKEN"),
                   help="static bearer token required on /v1 routes")
    p.add_argument("--ui-dir", default=env.get("ISS_UI_DIR"),
                   help="static workbench assets served under /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, OSError, RuntimeError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
