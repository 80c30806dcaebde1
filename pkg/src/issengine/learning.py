"""Fitting the polynomial scorer by regularized Huber regression.

Full-batch gradient descent with backtracking line search; deterministic
given dataset, config and seed. The analytic gradient is exact (checked
against central finite differences in the test suite).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatchError,
    NumericError,
    TrainingDivergedError,
    ValidationError,
)
from .risk_model import IncidentRecord, assemble_risk_vector
from .scoring import ModelParams


@dataclass(frozen=True)
class TrainingConfig:
    huber_delta: float = 0.1
    reg_lambda: float = 0.01
    learning_rate: float = 0.05
    max_iters: int = 5000
    tol_loss: float = 1e-9
    tol_grad: float = 1e-7
    regularize_bias: bool = True
    init: str = "zeros"  # "zeros" or "seeded-uniform"
    seed: int = 0

    def __post_init__(self):
        if self.huber_delta <= 0:
            raise ValidationError(f"huber_delta must be > 0, got {self.huber_delta}")
        if self.reg_lambda < 0:
            raise ValidationError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_iters < 0:
            raise ValidationError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.init not in ("zeros", "seeded-uniform"):
            raise ValidationError(f"init must be 'zeros' or 'seeded-uniform', got {self.init!r}")


class TrainingDataset:
    """Rows of (risk vector, severity label)."""

    def __init__(self, features, labels):
        F = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=float)
        if F.ndim != 2:
            raise ValidationError(f"features must be 2-d, got shape {F.shape}")
        if F.shape[0] == 0:
            raise ValidationError("dataset must contain at least one row")
        if y.shape != (F.shape[0],):
            raise DimensionMismatchError(
                f"labels shape {y.shape} does not match {F.shape[0]} rows"
            )
        if not np.all(np.isfinite(F)):
            raise ValidationError("features contain non-finite values")
        if np.any(F < 0) or np.any(F > 1):
            raise ValidationError("features must lie in [0, 1]")
        if np.any(y < 0) or np.any(y > 1) or not np.all(np.isfinite(y)):
            raise ValidationError("labels must lie in [0, 1]")
        self.features = F
        self.labels = y

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_records(cls, records: Iterable[IncidentRecord]) -> "TrainingDataset":
        """Assemble risk vectors from labeled incidents; unlabeled rows are rejected."""
        feats, labels = [], []
        for rec in records:
            if rec.label is None:
                raise ValidationError(f"incident {rec.id!r} has no severity label")
            feats.append(assemble_risk_vector(rec).entries)
            labels.append(rec.label)
        if not feats:
            raise ValidationError("no labeled incidents supplied")
        return cls(np.array(feats), np.array(labels))

    def split(self, holdout_frac: float, seed: int = 0) -> tuple["TrainingDataset", "TrainingDataset"]:
        """Single deterministic train/holdout split."""
        if not 0.0 < holdout_frac < 1.0:
            raise ValidationError(f"holdout_frac must be in (0, 1), got {holdout_frac}")
        n = self.n_rows
        n_hold = max(1, int(round(n * holdout_frac)))
        if n_hold >= n:
            raise ValidationError("holdout fraction leaves no training rows")
        order = np.random.default_rng(seed).permutation(n)
        hold, train = order[:n_hold], order[n_hold:]
        return (
            TrainingDataset(self.features[train], self.labels[train]),
            TrainingDataset(self.features[hold], self.labels[hold]),
        )


def huber_loss(y: float, y_hat: float, delta: float) -> float:
    """Quadratic within |y - y_hat| <= delta, linear outside; C1 at the joint."""
    if delta <= 0:
        raise ValidationError(f"delta must be > 0, got {delta}")
    if not (math.isfinite(y) and math.isfinite(y_hat)):
        raise NumericError(f"non-finite inputs to huber_loss: y={y!r}, y_hat={y_hat!r}")
    r = abs(y - y_hat)
    if r <= delta:
        return 0.5 * r * r
    return delta * r - 0.5 * delta * delta


def _sigmoid_vec(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict_batch(features, params: ModelParams) -> np.ndarray:
    """Vectorized polynomial ISS over an N x d feature matrix."""
    F = np.asarray(features, dtype=float)
    if F.ndim == 1:
        F = F[None, :]
    if F.shape[1] != params.dimension:
        raise DimensionMismatchError(
            f"features have dimension {F.shape[1]}, params {params.dimension}"
        )
    logits = params.bias + F @ params.linear + np.einsum("ni,ij,nj->n", F, params.interaction, F)
    return _sigmoid_vec(logits)


def _check_dims(data: TrainingDataset, params: ModelParams):
    if data.dimension != params.dimension:
        raise DimensionMismatchError(
            f"dataset dimension {data.dimension} does not match params {params.dimension}"
        )


def objective(data: TrainingDataset, params: ModelParams, cfg: TrainingConfig) -> float:
    """Mean Huber loss plus L2 penalty on (w, W, and b when regularize_bias)."""
    _check_dims(data, params)
    y_hat = predict_batch(data.features, params)
    r = np.abs(data.labels - y_hat)
    d = cfg.huber_delta
    losses = np.where(r <= d, 0.5 * r * r, d * r - 0.5 * d * d)
    reg = float(params.linear @ params.linear) + float(np.sum(params.interaction**2))
    if cfg.regularize_bias:
        reg += params.bias**2
    return float(np.mean(losses)) + cfg.reg_lambda * reg


def gradient(data: TrainingDataset, params: ModelParams, cfg: TrainingConfig) -> ModelParams:
    """Analytic gradient of the objective, structured like ModelParams.

    Per row, dL/dlogit = clip(y_hat - y, -delta, delta) * y_hat * (1 - y_hat);
    the logit is linear in b, linear in w with coefficient f, and linear in
    W with coefficient f f'.
    """
    _check_dims(data, params)
    F, y = data.features, data.labels
    y_hat = predict_batch(F, params)
    d = cfg.huber_delta
    g_logit = np.clip(y_hat - y, -d, d) * y_hat * (1.0 - y_hat)
    n = data.n_rows
    lam = cfg.reg_lambda
    grad_w = F.T @ g_logit / n + 2.0 * lam * params.linear
    grad_W = (F * g_logit[:, None]).T @ F / n + 2.0 * lam * params.interaction
    grad_b = float(np.mean(g_logit))
    if cfg.regularize_bias:
        grad_b += 2.0 * lam * params.bias
    return ModelParams(grad_w, grad_W, grad_b)


def params_to_vector(params: ModelParams) -> np.ndarray:
    """Flatten to [w, W row-major, b]; inverse of params_from_vector."""
    return np.concatenate([params.linear, params.interaction.ravel(), [params.bias]])


def params_from_vector(vec, d: int) -> ModelParams:
    v = np.asarray(vec, dtype=float)
    if v.shape != (d + d * d + 1,):
        raise DimensionMismatchError(f"vector length {v.shape} does not match d={d}")
    return ModelParams(v[:d], v[d : d + d * d].reshape(d, d), v[-1])


@dataclass
class TraceRow:
    iteration: int
    loss: float
    grad_norm: float
    step: float


@dataclass
class TrainingTrace:
    rows: list[TraceRow] = field(default_factory=list)
    stop_reason: str = "max_iters"

    @property
    def losses(self) -> list[float]:
        return [r.loss for r in self.rows]

    @property
    def final_grad_norm(self) -> float:
        return self.rows[-1].grad_norm if self.rows else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "loss", "grad_norm", "step"])
            for r in self.rows:
                writer.writerow([r.iteration, repr(r.loss), repr(r.grad_norm), repr(r.step)])


MAX_HALVINGS = 30


def initial_params(cfg: TrainingConfig, d: int) -> ModelParams:
    if cfg.init == "zeros":
        return ModelParams.zeros(d)
    rng = np.random.default_rng(cfg.seed)
    n = d + d * d + 1
    return params_from_vector(rng.uniform(-0.1, 0.1, size=n), d)


def fit(data: TrainingDataset, cfg: TrainingConfig) -> tuple[ModelParams, TrainingTrace]:
    """Minimize the objective by gradient descent with backtracking.

    Each iteration starts from the configured learning rate and halves the
    step (up to 30 times) until the loss does not increase, so the accepted
    loss trace is non-increasing. Stops on max_iters, loss improvement below
    tol_loss, gradient norm below tol_grad, or a fully stalled line search.
    """
    d = data.dimension
    params = initial_params(cfg, d)
    loss = objective(data, params, cfg)
    if not math.isfinite(loss):
        raise TrainingDivergedError(0, "initial loss is non-finite")
    trace = TrainingTrace()
    vec = params_to_vector(params)

    for it in range(1, cfg.max_iters + 1):
        grad = gradient(data, params, cfg)
        gvec = params_to_vector(grad)
        gnorm = float(np.linalg.norm(gvec))
        if it == 1:
            trace.rows.append(TraceRow(0, loss, gnorm, 0.0))
        if gnorm < cfg.tol_grad:
            trace.stop_reason = "grad_tol"
            break

        step = cfg.learning_rate
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            cand_vec = vec - step * gvec
            cand = params_from_vector(cand_vec, d)
            cand_loss = objective(data, cand, cfg)
            if math.isfinite(cand_loss) and cand_loss <= loss:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            trace.stop_reason = "line_search_stalled"
            break

        improvement = loss - cand_loss
        params, vec, loss = cand, cand_vec, cand_loss
        trace.rows.append(TraceRow(it, loss, gnorm, step))
        if improvement < cfg.tol_loss:
            trace.stop_reason = "loss_tol"
            break
    else:
        trace.stop_reason = "max_iters"

    if cfg.max_iters == 0 and not trace.rows:
        grad0 = gradient(data, params, cfg)
        trace.rows.append(TraceRow(0, loss, float(np.linalg.norm(params_to_vector(grad0))), 0.0))
    return params, trace


def evidence_score(params: ModelParams, data: TrainingDataset, delta: float = 0.1) -> float:
    """Negative mean Huber loss of params on a validation slice.

    A monotone proxy for how strongly a stakeholder's labeled evidence
    agrees with the fitted model; used as the evidence term of stakeholder
    utilities when no externally supplied value exists.
    """
    y_hat = predict_batch(data.features, params)
    r = np.abs(data.labels - y_hat)
    losses = np.where(r <= delta, 0.5 * r * r, delta * r - 0.5 * delta * delta)
    return -float(np.mean(losses))
