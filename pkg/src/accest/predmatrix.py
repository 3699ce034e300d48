"""Prediction-matrix data model: tempered softmax, probability ingestion, labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidParameter

DEFAULT_TEMPERATURE = 0.4
INGEST_ROW_TOL = 1e-6
ROW_TOL = 1e-9


class ScoreKind(str, enum.Enum):
    LOGITS = "logits"
    PROBABILITIES = "probs"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawScores:
    """Raw classifier output before tempering.

    Attributes:
        values: ``(n, k)`` array of logits or probabilities.
        kind: Whether ``values`` are logits or probabilities.
    """

    values: np.ndarray
    kind: ScoreKind

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidInput(f"scores must be a 2-D matrix, got shape {v.shape}")
        n, k = v.shape
        if n < 1:
            raise InvalidInput("need at least one sample row")
        if k < 2:
            raise InvalidInput(f"need at least 2 classes, got {k}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("scores contain non-finite entries")
        kind = ScoreKind(self.kind)
        if kind is ScoreKind.PROBABILITIES:
            if np.any(v < 0) or np.any(v > 1):
                raise InvalidInput("probabilities must lie in [0, 1]")
            sums = v.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > INGEST_ROW_TOL)
            if bad.size:
                raise InvalidInput(
                    f"row {bad[0]} sums to {sums[bad[0]]!r}, outside 1 +/- {INGEST_ROW_TOL}"
                )
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "kind", kind)

    @property
    def sample_count(self) -> int:
        return self.values.shape[0]

    @property
    def class_count(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PredictionMatrix:
    """Row-stochastic ``(n, k)`` softmax matrix with its provenance."""

    rows: np.ndarray
    temperature: float = 1.0
    source_kind: ScoreKind = ScoreKind.PROBABILITIES

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 2:
            raise InvalidInput(f"prediction matrix must be n x k with n>=1, k>=2; got {rows.shape}")
        if not np.all(np.isfinite(rows)) or np.any(rows < 0) or np.any(rows > 1):
            raise InvalidInput("prediction entries must be finite and in [0, 1]")
        if np.any(np.abs(rows.sum(axis=1) - 1.0) > ROW_TOL):
            raise InvalidInput("prediction rows must sum to 1")
        if not self.temperature > 0:
            raise InvalidParameter("temperature must be positive")
        object.__setattr__(self, "rows", _frozen(rows))
        object.__setattr__(self, "temperature", float(self.temperature))
        object.__setattr__(self, "source_kind", ScoreKind(self.source_kind))

    @property
    def sample_count(self) -> int:
        return self.rows.shape[0]

    @property
    def class_count(self) -> int:
        return self.rows.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape


@dataclass(frozen=True)
class LabeledPredictions:
    matrix: PredictionMatrix
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != self.matrix.sample_count:
            raise InvalidInput(
                f"expected {self.matrix.sample_count} labels, got shape {labels.shape}"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise InvalidInput("labels must be integers")
        labels = labels.astype(np.int64)
        if np.any(labels < 0) or np.any(labels >= self.matrix.class_count):
            raise InvalidInput(f"labels must lie in [0, {self.matrix.class_count})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


def temper_softmax(raw: RawScores, temperature: float = DEFAULT_TEMPERATURE) -> PredictionMatrix:
    """Softmax of ``logits / temperature`` with row-max subtraction."""
    if not (np.isfinite(temperature) and temperature > 0):
        raise InvalidParameter(f"temperature must be positive, got {temperature!r}")
    if raw.kind is not ScoreKind.LOGITS:
        raise InvalidInput("temper_softmax expects logits; use adopt_probabilities")
    return PredictionMatrix(_softmax(raw.values, temperature), temperature, ScoreKind.LOGITS)


def _softmax(z: np.ndarray, temperature: float) -> np.ndarray:
    s = z / temperature
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=1, keepdims=True)


def adopt_probabilities(raw: RawScores, retemper: float | None = None) -> PredictionMatrix:
    """Use stored probabilities as a prediction matrix.

    Rows are renormalized by their sums. With ``retemper`` set, the
    probabilities are mapped back to log space and passed through a tempered
    softmax instead; zero entries stay zero.
    """
    if raw.kind is not ScoreKind.PROBABILITIES:
        raise InvalidInput("adopt_probabilities expects probabilities")
    p = raw.values / raw.values.sum(axis=1, keepdims=True)
    if retemper is None:
        return PredictionMatrix(p, 1.0, ScoreKind.PROBABILITIES)
    if not (np.isfinite(retemper) and retemper > 0):
        raise InvalidParameter(f"temperature must be positive, got {retemper!r}")
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    # exp(-inf) == 0, so zero-probability classes stay at zero.
    return PredictionMatrix(_softmax(logp, retemper), retemper, ScoreKind.PROBABILITIES)


def to_prediction_matrix(raw: RawScores, temperature: float = DEFAULT_TEMPERATURE,
                         retemper_probabilities: bool = False) -> PredictionMatrix:
    """Dispatch on ``raw.kind``: tempered softmax for logits, adoption for probabilities."""
    if raw.kind is ScoreKind.LOGITS:
        return temper_softmax(raw, temperature)
    return adopt_probabilities(raw, temperature if retemper_probabilities else None)


def predicted_labels(P: PredictionMatrix) -> np.ndarray:
    # np.argmax returns the first maximal index, i.e. the lowest class on ties.
    return np.argmax(P.rows, axis=1)


def accuracy(L: LabeledPredictions) -> float:
    return float(np.mean(predicted_labels(L.matrix) == L.labels))
