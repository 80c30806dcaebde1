"""HTTP facade over the scoring engine.

Computation endpoints are stateless: identical request bodies yield
identical responses. Deliberation sessions are the one stateful surface;
each session serializes its mutations under a per-session lock and
appends every revision to an audit log (one JSONL file per session when a
sessions directory is configured).
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .corpus import incident_from_dict, incident_to_dict, load_corpus, timestamp_to_str
from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    NumericError,
    ValidationError,
)
from .learning import TrainingConfig, TrainingDataset, fit
from .retrospective import RetrospectiveConfig, WeightingConfig, retrospective_run
from .risk_model import CATEGORIES, IncidentRecord, RiskVector, assemble_risk_vector
from .scoring import ModelParams, SimplexWeights, iss_linear, iss_multiplicative, iss_polynomial
from .stakeholders import (
    REWEIGHT_CONVENTION_NOTE,
    StakeholderPanel,
    aggregate_stakeholder_weights,
    consensus_dimension_weights,
    precautionary_resolution,
    sensitivity_analysis,
    stakeholder_utility,
    weight_disagreement,
)
from .thresholds import (
    ScoreHistory,
    ThresholdSchedule,
    classify_enforcement,
    default_schedule,
    evaluate_triggers,
    smoothstep,
    threshold_at,
)

# Routes that the CLI must mirror; checked by a parity test.
COMPUTATION_ROUTES = {
    "POST /v1/score": "score",
    "POST /v1/weights/aggregate": "weights",
    "POST /v1/sensitivity": "sensitivity",
    "POST /v1/train": "train",
    "GET /v1/thresholds": "thresholds",
    "POST /v1/retrospective": "retrospective",
}


@dataclass
class DeliberationSession:
    """Server-side state for one deliberation loop over a single incident."""

    id: str
    incident: IncidentRecord
    panel: StakeholderPanel
    t: float
    params: ModelParams
    schedule: ThresholdSchedule
    round: int = 0
    resolved: bool = False
    resolution: Optional[dict] = None
    audit: list[dict] = field(default_factory=list)
    affected_scores: list[float] = field(default_factory=list)
    last_report: Optional[dict] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


@dataclass
class TrainJob:
    id: str
    status: str = "running"  # running | done | failed
    result: Optional[dict] = None
    error: Optional[str] = None


class AppState:
    def __init__(
        self,
        params: Optional[ModelParams] = None,
        schedule: Optional[ThresholdSchedule] = None,
        corpus_dir: Optional[Path] = None,
        sessions_dir: Optional[Path] = None,
        token: Optional[str] = None,
        ui_dir: Optional[Path] = None,
    ):
        self.params = params if params is not None else ModelParams.zeros(len(CATEGORIES))
        self.schedule = schedule if schedule is not None else default_schedule()
        self.corpus_dir = Path(corpus_dir) if corpus_dir else None
        self.sessions_dir = Path(sessions_dir) if sessions_dir else None
        self.token = token
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.sessions: dict[str, DeliberationSession] = {}
        self.jobs: dict[str, TrainJob] = {}
        self.registry_lock = threading.Lock()


def _now() -> str:
    return timestamp_to_str(datetime.now(timezone.utc))


def _require(body: dict, key: str):
    if not isinstance(body, dict) or key not in body:
        raise ValidationError(f"request body missing field {key!r}")
    return body[key]


def _parse_history(raw, window: int = 500, min_samples: int = 30) -> ScoreHistory:
    if raw is None:
        return ScoreHistory(window=window, min_samples=min_samples)
    return ScoreHistory(raw, window=window, min_samples=min_samples)


def _risk_vector_from_body(body: dict) -> RiskVector:
    if "incident" in body:
        return assemble_risk_vector(incident_from_dict(body["incident"]))
    if "risk_vector" in body:
        return RiskVector(body["risk_vector"])
    if "factors" in body:
        return RiskVector(body["factors"], labels=("I", "E", "R", "X"))
    raise ValidationError("request must carry 'incident', 'risk_vector' or 'factors'")


def _session_state_dict(sess: DeliberationSession) -> dict:
    return {
        "session_id": sess.id,
        "incident_id": sess.incident.id,
        "t": sess.t,
        "round": sess.round,
        "resolved": sess.resolved,
        "resolution": sess.resolution,
        "panel": sess.panel.to_dict(),
        "sensitivity": sess.last_report,
        "audit": sess.audit,
    }


def create_app(state: Optional[AppState] = None) -> FastAPI:
    state = state or AppState()
    app = FastAPI(title="iss-engine", version=__version__)

    # ---- error mapping -------------------------------------------------
    def _error_response(status: int, exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
            headers={"X-Engine-Version": __version__},
        )

    @app.exception_handler(DimensionMismatchError)
    async def _dim_handler(request: Request, exc: DimensionMismatchError):
        return _error_response(422, exc)

    @app.exception_handler(ValidationError)
    async def _val_handler(request: Request, exc: ValidationError):
        return _error_response(400, exc)

    @app.exception_handler(InsufficientDataError)
    async def _data_handler(request: Request, exc: InsufficientDataError):
        return _error_response(400, exc)

    @app.exception_handler(NumericError)
    async def _num_handler(request: Request, exc: NumericError):
        return _error_response(400, exc)

    @app.middleware("http")
    async def _version_and_auth(request: Request, call_next):
        if state.token and request.url.path.startswith("/v1") and request.url.path != "/v1/health":
            auth = request.headers.get("authorization", "")
            if auth != f"Bearer {state.token}":
                return JSONResponse(
                    status_code=401,
                    content={"error": "Unauthorized", "detail": "missing or invalid bearer token"},
                    headers={"X-Engine-Version": __version__},
                )
        response = await call_next(request)
        # every response carries the engine version and the reweighting
        # convention applied to the 7-dimensional pipeline
        response.headers["X-Engine-Version"] = __version__
        response.headers["X-Convention-Note"] = REWEIGHT_CONVENTION_NOTE
        return response

    # ---- computation endpoints ------------------------------------------
    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "engine_version": __version__}

    @app.post("/v1/score")
    async def score(body: dict = Body(...)):
        incident = incident_from_dict(_require(body, "incident"))
        f = assemble_risk_vector(incident)
        if "factor_weights" in body and body["factor_weights"] is not None:
            weights = SimplexWeights(body["factor_weights"])
        else:
            weights = SimplexWeights.uniform(f.dimension)
        t = float(body.get("t", 0.0))
        history = _parse_history(body.get("history"))
        poly = iss_polynomial(f, state.params)
        triggers = evaluate_triggers(poly, history, t, state.schedule)
        return {
            "incident_id": incident.id,
            "risk_vector": {cat: v for cat, v in zip(f.labels, f.entries)},
            "scores": {
                "linear": iss_linear(f, weights),
                "multiplicative": iss_multiplicative(f, weights),
                "polynomial": poly,
            },
            "factor_weights": list(weights.entries),
            "tier": classify_enforcement(poly).to_dict(),
            "triggers": triggers.to_dict(),
            "engine_version": __version__,
            "convention_note": REWEIGHT_CONVENTION_NOTE,
        }

    @app.post("/v1/weights/aggregate")
    async def weights_aggregate(body: dict = Body(...)):
        panel = StakeholderPanel.from_dict(_require(body, "panel"))
        tau = float(body.get("tau", 0.01))
        omega = aggregate_stakeholder_weights(panel)
        consensus = consensus_dimension_weights(panel, omega)
        return {
            "utilities": {p.group: stakeholder_utility(p) for p in panel.profiles},
            "omega": list(omega.entries),
            "consensus_weights": list(consensus.entries),
            "disagreement": weight_disagreement(panel, tau).to_dict(),
            "engine_version": __version__,
        }

    @app.post("/v1/sensitivity")
    async def sensitivity(body: dict = Body(...)):
        f = _risk_vector_from_body(body)
        panel = StakeholderPanel.from_dict(_require(body, "panel"))
        report = sensitivity_analysis(
            f,
            panel,
            state.params if f.dimension != 4 else None,
            state.schedule,
            float(body.get("t", 0.0)),
            history=_parse_history(body.get("history")),
            classic_variant=body.get("classic_variant", "linear"),
            disagreement_tau=float(body.get("tau", 0.01)),
        )
        out = report.to_dict()
        out["engine_version"] = __version__
        return out

    @app.post("/v1/train")
    async def train(body: dict = Body(...)):
        dataset = _dataset_from_body(state, body)
        cfg_obj = body.get("config", {})
        cfg = TrainingConfig(**cfg_obj) if cfg_obj else TrainingConfig()
        job = TrainJob(id=uuid.uuid4().hex[:12])
        with state.registry_lock:
            state.jobs[job.id] = job

        def _run():
            try:
                params, trace = fit(dataset, cfg)
                job.result = {
                    "params": params.to_dict(),
                    "iterations": len(trace.rows),
                    "final_loss": trace.rows[-1].loss if trace.rows else None,
                    "stop_reason": trace.stop_reason,
                }
                job.status = "done"
            except Exception as exc:  # surfaced via polling
                job.error = f"{type(exc).__name__}: {exc}"
                job.status = "failed"

        threading.Thread(target=_run, daemon=True).start()
        return {"job_id": job.id, "status": job.status, "poll": f"/v1/train/{job.id}"}

    @app.get("/v1/train/{job_id}")
    async def train_status(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            return _error_response(404, ValidationError(f"unknown training job {job_id!r}"))
        out = {"job_id": job.id, "status": job.status}
        if job.status == "done":
            out.update(job.result)
        elif job.status == "failed":
            out["error"] = job.error
        return out

    @app.get("/v1/thresholds")
    async def thresholds(t: float = Query(0.0)):
        levels = {}
        for level in ("L", "M", "H"):
            s, a = threshold_at(level, t, state.schedule)
            levels[level] = {"s": s, "a": a}
        return {
            "t": t,
            "phi": smoothstep(t),
            "levels": levels,
            "schedule": state.schedule.to_dict(),
            "engine_version": __version__,
        }

    @app.post("/v1/retrospective")
    async def retrospective(body: dict = Body(...)):
        cfg = _retro_config_from_body(state, body)
        report = retrospective_run(cfg)
        out = report.to_dict()
        out["engine_version"] = __version__
        return out

    # ---- deliberation sessions -------------------------------------------
    @app.post("/v1/sessions")
    async def create_session(body: dict = Body(...)):
        incident = incident_from_dict(_require(body, "incident"))
        panel = StakeholderPanel.from_dict(_require(body, "panel"))
        t = float(body.get("t", 0.0))
        sess = DeliberationSession(
            id=uuid.uuid4().hex[:12],
            incident=incident,
            panel=panel,
            t=t,
            params=state.params,
            schedule=state.schedule,
        )
        report = _session_sensitivity(sess, panel)
        sess.last_report = report
        sess.affected_scores.append(_affected_score(report))
        sess.audit.append(
            {"at": _now(), "round": 0, "action": "created", "panel": panel.to_dict()}
        )
        with state.registry_lock:
            state.sessions[sess.id] = sess
        _persist_session(state, sess)
        return _session_state_dict(sess)

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        sess = _load_session(state, session_id)
        if sess is None:
            return _error_response(404, ValidationError(f"unknown session {session_id!r}"))
        return _session_state_dict(sess)

    @app.post("/v1/sessions/{session_id}/rounds")
    async def submit_round(session_id: str, body: dict = Body(...)):
        sess = _load_session(state, session_id)
        if sess is None:
            return _error_response(404, ValidationError(f"unknown session {session_id!r}"))
        with sess.lock:
            if sess.resolved:
                return JSONResponse(
                    status_code=409,
                    content={
                        "error": "SessionResolved",
                        "detail": f"session {session_id} is resolved; no further rounds accepted",
                    },
                )
            action = body.get("action", "revise")
            if action == "revise":
                panel = StakeholderPanel.from_dict(_require(body, "panel"))
                sess.panel = panel
                sess.round += 1
                report = _session_sensitivity(sess, panel)
                sess.last_report = report
                sess.affected_scores.append(_affected_score(report))
                sess.audit.append(
                    {"at": _now(), "round": sess.round, "action": "revise", "panel": panel.to_dict()}
                )
            elif action in ("resolve", "precautionary"):
                report_dict = sess.last_report
                if report_dict is None:
                    raise ValidationError("session has no sensitivity report yet")
                if action == "resolve":
                    final = report_dict["consensus"]["score"]
                else:
                    report = sensitivity_analysis(
                        assemble_risk_vector(sess.incident),
                        sess.panel,
                        sess.params,
                        sess.schedule,
                        sess.t,
                    )
                    final = precautionary_resolution(
                        report, sess.panel, resolved=False,
                        prior_affected_scores=sess.affected_scores,
                    )
                sess.resolved = True
                sess.resolution = {
                    "at": _now(),
                    "mode": "consensus" if action == "resolve" else "precautionary",
                    "score": final,
                    "tier": classify_enforcement(final).name,
                }
            else:
                raise ValidationError(
                    f"unknown action {action!r}; expected revise, resolve or precautionary"
                )
            _persist_session(state, sess)
            return _session_state_dict(sess)

    if state.ui_dir and state.ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(state.ui_dir), html=True), name="ui")

    app.state.engine = state
    return app


def _affected_score(report_dict: dict) -> float:
    for entry in report_dict["per_stakeholder"]:
        if entry["group"] == "affected-communities":
            return entry["score"]
    raise ValidationError("report has no affected-communities score")


def _session_sensitivity(sess: DeliberationSession, panel: StakeholderPanel) -> dict:
    report = sensitivity_analysis(
        assemble_risk_vector(sess.incident), panel, sess.params, sess.schedule, sess.t
    )
    return report.to_dict()


def _persist_session(state: AppState, sess: DeliberationSession) -> None:
    if state.sessions_dir is None:
        return
    state.sessions_dir.mkdir(parents=True, exist_ok=True)
    snapshot = _session_state_dict(sess)
    snapshot["incident"] = incident_to_dict(sess.incident)
    snapshot["affected_scores"] = sess.affected_scores
    with open(state.sessions_dir / f"{sess.id}.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(snapshot, sort_keys=True) + "\n")


def _load_session(state: AppState, session_id: str) -> Optional[DeliberationSession]:
    sess = state.sessions.get(session_id)
    if sess is not None:
        return sess
    if state.sessions_dir is None:
        return None
    path = state.sessions_dir / f"{session_id}.jsonl"
    if not path.is_file():
        return None
    # rebuild from the last persisted snapshot
    last = path.read_text(encoding="utf-8").strip().splitlines()[-1]
    obj = json.loads(last)
    sess = DeliberationSession(
        id=obj["session_id"],
        incident=incident_from_dict(obj["incident"]),
        panel=StakeholderPanel.from_dict(obj["panel"]),
        t=obj["t"],
        params=state.params,
        schedule=state.schedule,
        round=obj["round"],
        resolved=obj["resolved"],
        resolution=obj["resolution"],
        audit=obj["audit"],
        affected_scores=list(obj.get("affected_scores", [])),
        last_report=obj.get("sensitivity"),
    )
    with state.registry_lock:
        state.sessions[sess.id] = sess
    return sess


def _dataset_from_body(state: AppState, body: dict) -> TrainingDataset:
    if "corpus" in body:
        name = body["corpus"]
        path = Path(name)
        if not path.is_absolute():
            if state.corpus_dir is None:
                raise ValidationError("server has no corpus directory configured; pass an absolute path")
            path = state.corpus_dir / name
        return TrainingDataset.from_records(load_corpus(path))
    if "rows" in body:
        rows = body["rows"]
        if not isinstance(rows, list) or not rows:
            raise ValidationError("'rows' must be a non-empty list of {f, y} objects")
        feats, labels = [], []
        for i, row in enumerate(rows):
            try:
                feats.append([float(v) for v in row["f"]])
                labels.append(float(row["y"]))
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"rows[{i}] must carry 'f' and 'y'") from exc
        return TrainingDataset(feats, labels)
    raise ValidationError("request must carry 'corpus' (file) or 'rows' (inline data)")


def _retro_config_from_body(state: AppState, body: dict) -> RetrospectiveConfig:
    if "corpus" in body:
        path = Path(body["corpus"])
        if not path.is_absolute():
            if state.corpus_dir is None:
                raise ValidationError("server has no corpus directory configured; pass an absolute path")
            path = state.corpus_dir / path
        records = load_corpus(path)
    elif "records" in body:
        records = [incident_from_dict(r) for r in body["records"]]
    else:
        raise ValidationError("request must carry 'corpus' or 'records'")

    raw_weightings = body.get("weightings")
    if not raw_weightings:
        raise ValidationError("request needs a non-empty 'weightings' list")
    weightings = [
        WeightingConfig(_require(entry, "name"), StakeholderPanel.from_dict(_require(entry, "panel")))
        for entry in raw_weightings
    ]
    params = ModelParams.from_dict(body["params"]) if body.get("params") else state.params
    schedule = (
        ThresholdSchedule.from_dict(body["schedule"]) if body.get("schedule") else state.schedule
    )
    return RetrospectiveConfig(
        records=records,
        weightings=weightings,
        params=params,
        schedule=schedule,
        t=float(body.get("t", 0.0)),
    )
