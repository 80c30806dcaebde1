"""Incident Severity Score computation.

Three scorers over factor vectors in [0,1]^d:

* ``iss_linear``          -- weighted average with simplex weights
* ``iss_multiplicative``  -- 1 - prod (1-f_i)^w_i, superadditive aggregation
* ``iss_polynomial``      -- sigmoid of a learned second-order polynomial

The classic scorers are written for the four-factor form (impact,
exploitability, replicability, exposure) but accept any dimension as long
as factors and weights agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, NumericError, ValidationError

UNIT_TOL = 1e-9


def _check_unit(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class FourFactor:
    """Classic incident attributes: impact, exploitability, replicability, exposure."""

    impact: float
    exploitability: float
    replicability: float
    exposure: float

    def __post_init__(self):
        for name in ("impact", "exploitability", "replicability", "exposure"):
            object.__setattr__(self, name, _check_unit(getattr(self, name), name))

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.impact, self.exploitability, self.replicability, self.exposure]
        )


@dataclass(frozen=True)
class SimplexWeights:
    """Non-negative weights summing to 1 (a point on the probability simplex)."""

    entries: tuple[float, ...]

    def __init__(self, entries: Iterable[float]):
        vals = tuple(float(v) for v in entries)
        if not vals:
            raise ValidationError("entries must be non-empty")
        for i, v in enumerate(vals):
            if not math.isfinite(v):
                raise ValidationError(f"entries[{i}] must be finite, got {v!r}")
            if v < 0:
                raise ValidationError(f"entries[{i}] must be >= 0, got {v}")
        total = math.fsum(vals)
        if abs(total - 1.0) > UNIT_TOL:
            raise ValidationError(f"entries must sum to 1 within {UNIT_TOL}, got {total}")
        object.__setattr__(self, "entries", vals)

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @classmethod
    def uniform(cls, n: int) -> "SimplexWeights":
        if n < 1:
            raise ValidationError(f"dimension must be >= 1, got {n}")
        return cls([1.0 / n] * n)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries)


class ModelParams:
    """Parameters of the learned polynomial scorer.

    Holds linear coefficients w (length d), a symmetric interaction matrix
    W (d x d) and a scalar bias b. W is symmetrized on construction because
    the quadratic form f'Wf only senses the symmetric part.
    """

    __slots__ = ("linear", "interaction", "bias", "_w_list", "_W_rows")

    def __init__(self, linear, interaction, bias: float):
        w = np.asarray(linear, dtype=float)
        W = np.asarray(interaction, dtype=float)
        if w.ndim != 1:
            raise ValidationError(f"linear must be a vector, got shape {w.shape}")
        d = w.shape[0]
        if W.shape != (d, d):
            raise DimensionMismatchError(
                f"interaction must be {d}x{d} to match linear, got {W.shape}"
            )
        b = float(bias)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(W)) and math.isfinite(b)):
            raise ValidationError("linear, interaction and bias must all be finite")
        self.linear = w.copy()
        self.interaction = (W + W.T) / 2.0
        self.bias = b
        self.linear.flags.writeable = False
        self.interaction.flags.writeable = False
        # plain-list mirrors for the scalar scoring path
        self._w_list = self.linear.tolist()
        self._W_rows = self.interaction.tolist()

    @property
    def dimension(self) -> int:
        return self.linear.shape[0]

    @classmethod
    def zeros(cls, d: int) -> "ModelParams":
        return cls(np.zeros(d), np.zeros((d, d)), 0.0)

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return (
            self.bias == other.bias
            and np.array_equal(self.linear, other.linear)
            and np.array_equal(self.interaction, other.interaction)
        )

    def __repr__(self):
        return f"ModelParams(d={self.dimension}, bias={self.bias:.6g})"

    def to_dict(self) -> dict:
        """JSON form: {d, w, W (row-major), b}."""
        return {
            "d": self.dimension,
            "w": [float(v) for v in self.linear],
            "W": [float(v) for v in self.interaction.ravel()],
            "b": self.bias,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelParams":
        try:
            d = int(obj["d"])
            w = obj["w"]
            W_flat = obj["W"]
            b = obj["b"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"params object missing field: {exc}") from exc
        if len(w) != d:
            raise DimensionMismatchError(f"w has length {len(w)}, expected d={d}")
        if len(W_flat) != d * d:
            raise DimensionMismatchError(
                f"W has {len(W_flat)} entries, expected d*d={d * d}"
            )
        W = np.asarray(W_flat, dtype=float).reshape(d, d)
        return cls(np.asarray(w, dtype=float), W, float(b))


def sigmoid(x: float) -> float:
    """Numerically stable logistic function, branch form."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _entries_of(factors) -> Sequence[float]:
    """Pull the ordered factor values out of FourFactor, RiskVector or a sequence."""
    if isinstance(factors, FourFactor):
        return (factors.impact, factors.exploitability, factors.replicability, factors.exposure)
    entries = getattr(factors, "entries", factors)
    vals = [float(v) for v in entries]
    for i, v in enumerate(vals):
        _check_unit(v, f"factors[{i}]")
    return vals


def iss_linear(factors, weights: SimplexWeights) -> float:
    """Weighted average of factors: sum w_i * f_i."""
    vals = _entries_of(factors)
    if len(vals) != weights.dimension:
        raise DimensionMismatchError(
            f"factors have dimension {len(vals)}, weights {weights.dimension}"
        )
    return math.fsum(w * f for w, f in zip(weights.entries, vals))


def iss_multiplicative(factors, weights: SimplexWeights) -> float:
    """Geometric aggregation: 1 - prod (1-f_i)^w_i.

    Uses the convention x**0 == 1 for x in [0,1] (so a zero-weight factor
    never influences the score, even at f_i = 1).
    """
    vals = _entries_of(factors)
    if len(vals) != weights.dimension:
        raise DimensionMismatchError(
            f"factors have dimension {len(vals)}, weights {weights.dimension}"
        )
    prod = 1.0
    for w, f in zip(weights.entries, vals):
        if w == 0.0:
            continue  # x**0 == 1 by convention, including 0**0
        prod *= (1.0 - f) ** w
    return 1.0 - prod


def polynomial_logit(factors, params: ModelParams) -> float:
    """Logit of the learned scorer: b + w'f + f'Wf."""
    vals = _entries_of(factors)
    if len(vals) != params.dimension:
        raise DimensionMismatchError(
            f"factors have dimension {len(vals)}, params {params.dimension}"
        )
    w = params._w_list
    W = params._W_rows
    z = params.bias
    for i, fi in enumerate(vals):
        z += w[i] * fi
        row = W[i]
        acc = 0.0
        for j, fj in enumerate(vals):
            acc += row[j] * fj
        z += fi * acc
    return z


def iss_polynomial(factors, params: ModelParams) -> float:
    """Learned ISS: sigmoid(b + w'f + f'Wf).

    The contract output lives in the open interval (0,1); in floating point
    extreme logits round to exactly 0.0 or 1.0, so only 0 <= out <= 1 is
    asserted here.
    """
    z = polynomial_logit(factors, params)
    if not math.isfinite(z):
        vals = _entries_of(factors)
        linear_term = math.fsum(w * f for w, f in zip(params._w_list, vals))
        quad_term = math.fsum(
            fi * math.fsum(wij * fj for wij, fj in zip(row, vals))
            for fi, row in zip(vals, params._W_rows)
        )
        for name, term in (("bias", params.bias), ("w'f", linear_term), ("f'Wf", quad_term)):
            if not math.isfinite(term):
                raise NumericError(f"polynomial logit term {name} is non-finite: {term!r}")
        raise NumericError(f"polynomial logit is non-finite: {z!r}")
    return sigmoid(z)
