"""Label-free accuracy estimators computed from a prediction matrix.

All entropies use the natural logarithm with ``0 * log 0 = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InvalidInput, InvalidParameter
from .predmatrix import LabeledPredictions, PredictionMatrix, accuracy, predicted_labels

TEMPERATURE_TOL = 1e-12

# Keys of the per-estimator values, in report order.
ESTIMATOR_NAMES = (
    "nuclear_norm",
    "dispersity_normalized",
    "mutual_information",
    "average_confidence",
    "average_negative_entropy",
    "atc",
    "doc",
)


class ConfidenceScore(str, enum.Enum):
    MAX_CONFIDENCE = "max-conf"
    NEGATIVE_ENTROPY = "neg-entropy"


def _plogp(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def entropy(p: np.ndarray, axis: int = -1) -> np.ndarray:
    """Shannon entropy (nats) along ``axis``."""
    return -np.sum(_plogp(np.asarray(p, dtype=np.float64)), axis=axis)


@dataclass(frozen=True)
class CalibrationProfile:
    """Source-validation statistics consumed by ATC and DoC.

    ``confusion`` optionally keeps the joint count matrix
    ``C[i, j] = #(predicted i, true j)`` so label-shift estimation can run
    later without the validation file.
    """

    atc_threshold: float
    score_kind: ConfidenceScore
    val_accuracy: float
    val_average_confidence: float
    temperature: float
    confusion: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "score_kind", ConfidenceScore(self.score_kind))
        for name in ("val_accuracy", "val_average_confidence"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameter(f"{name} must lie in [0, 1], got {v!r}")
        if not self.temperature > 0:
            raise InvalidParameter("temperature must be positive")
        if self.confusion is not None:
            c = np.array(self.confusion, dtype=np.float64)
            c.setflags(write=False)
            object.__setattr__(self, "confusion", c)

    def to_dict(self) -> dict:
        d = {
            "atc_threshold": self.atc_threshold,
            "score_kind": self.score_kind.value,
            "val_accuracy": self.val_accuracy,
            "val_average_confidence": self.val_average_confidence,
            "temperature": self.temperature,
        }
        if self.confusion is not None:
            d["confusion"] = self.confusion.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationProfile":
        try:
            return cls(
                atc_threshold=float(d["atc_threshold"]),
                score_kind=ConfidenceScore(d["score_kind"]),
                val_accuracy=float(d["val_accuracy"]),
                val_average_confidence=float(d["val_average_confidence"]),
                temperature=float(d["temperature"]),
                confusion=d.get("confusion"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"malformed calibration profile: {e}") from e


@dataclass(frozen=True)
class EstimatorReport:
    nuclear_norm: float
    dispersity: float
    dispersity_normalized: float
    mutual_information: float
    average_confidence: float
    average_negative_entropy: float
    sample_count: int
    class_count: int
    temperature: float
    rectified_nuclear_norm: float | None = None
    k_head: int | None = None
    atc: float | None = None
    doc: float | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def values(self) -> dict[str, float | None]:
        """Estimator name -> value, including the rectified nuclear norm."""
        out = {name: getattr(self, name) for name in ESTIMATOR_NAMES}
        out["rectified_nuclear_norm"] = self.rectified_nuclear_norm
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.sample_count,
            "k": self.class_count,
            "temperature": self.temperature,
            "nuclear_norm": self.nuclear_norm,
            "rectified_nuclear_norm": self.rectified_nuclear_norm,
            "dispersity": self.dispersity,
            "dispersity_normalized": self.dispersity_normalized,
            "mutual_information": self.mutual_information,
            "average_confidence": self.average_confidence,
            "average_negative_entropy": self.average_negative_entropy,
            "atc": self.atc,
            "doc": self.doc,
            "warnings": list(self.warnings),
        }


def _nuclear_norm(P: PredictionMatrix) -> float:
    return linalg.singular_values(P.rows).nuclear_norm


def _normalized(nuc: float, n: int, cols: int) -> float:
    return nuc / math.sqrt(min(n, cols) * n)


def nuclear_norm_score(P: PredictionMatrix) -> float:
    """Nuclear norm divided by its size bound ``sqrt(min(n, k) * n)``."""
    n, k = P.shape
    return _normalized(_nuclear_norm(P), n, k)


def _check_k_head(k_head: int, k: int) -> int:
    if isinstance(k_head, bool) or int(k_head) != k_head or not 1 <= k_head <= k:
        raise InvalidParameter(f"k_head must be an integer in [1, {k}], got {k_head!r}")
    return int(k_head)


def rectified_nuclear_norm_score(P: PredictionMatrix, k_head: int) -> float:
    """Nuclear norm normalized by ``sqrt(min(n, k_head) * n)``; may exceed 1."""
    n, k = P.shape
    return _normalized(_nuclear_norm(P), n, _check_k_head(k_head, k))


def dispersity_score(P: PredictionMatrix) -> tuple[float, float]:
    """Entropy of the predicted-class histogram, raw and divided by ``log k``."""
    n, k = P.shape
    freq = np.bincount(predicted_labels(P), minlength=k) / n
    raw = float(entropy(freq))
    return raw, raw / math.log(k)


def mutual_information_score(P: PredictionMatrix) -> float:
    mean_row = P.rows.mean(axis=0)
    mi = float(entropy(mean_row) - np.mean(entropy(P.rows, axis=1)))
    # Jensen guarantees mi >= 0; tiny negatives are round-off.
    return max(mi, 0.0)


def average_confidence(P: PredictionMatrix) -> float:
    return float(np.mean(P.rows.max(axis=1)))


def average_negative_entropy(P: PredictionMatrix) -> float:
    return float(np.mean(np.sum(_plogp(P.rows), axis=1)))


def confidence_scores(P: PredictionMatrix, score_kind: ConfidenceScore | str) -> np.ndarray:
    if ConfidenceScore(score_kind) is ConfidenceScore.MAX_CONFIDENCE:
        return P.rows.max(axis=1)
    return np.sum(_plogp(P.rows), axis=1)


def confusion_counts(val: LabeledPredictions) -> np.ndarray:
    """``C[i, j]`` = number of validation rows predicted ``i`` with true label ``j``."""
    k = val.matrix.class_count
    c = np.zeros((k, k))
    np.add.at(c, (predicted_labels(val.matrix), val.labels), 1.0)
    return c


def calibrate_atc(val: LabeledPredictions,
                  score_kind: ConfidenceScore | str = ConfidenceScore.MAX_CONFIDENCE) -> CalibrationProfile:
    """Pick the ATC threshold on a labeled source-validation set.

    Scores are sorted ascending and the threshold is the score at index
    ``n_wrong - 1`` (clamped to ``[0, n - 1]``), so with distinct scores
    exactly ``n_correct`` rows score strictly above it.
    """
    n = val.matrix.sample_count
    if n == 0:
        raise InvalidInput("validation set is empty")
    score_kind = ConfidenceScore(score_kind)
    correct = int(np.sum(predicted_labels(val.matrix) == val.labels))
    scores = np.sort(confidence_scores(val.matrix, score_kind))
    idx = min(max(n - correct - 1, 0), n - 1)
    return CalibrationProfile(
        atc_threshold=float(scores[idx]),
        score_kind=score_kind,
        val_accuracy=correct / n,
        val_average_confidence=average_confidence(val.matrix),
        temperature=val.matrix.temperature,
        confusion=confusion_counts(val),
    )


def _check_compatible(P: PredictionMatrix, cal: CalibrationProfile) -> None:
    if abs(P.temperature - cal.temperature) > TEMPERATURE_TOL:
        raise InvalidParameter(
            f"prediction temperature {P.temperature} does not match calibration "
            f"temperature {cal.temperature}"
        )


def atc_score(P: PredictionMatrix, cal: CalibrationProfile) -> float:
    """Fraction of target rows scoring strictly above the calibrated threshold."""
    _check_compatible(P, cal)
    return float(np.mean(confidence_scores(P, cal.score_kind) > cal.atc_threshold))


def doc_score(P: PredictionMatrix, cal: CalibrationProfile) -> float:
    """Validation accuracy shifted by the drop in average confidence. Not clamped."""
    _check_compatible(P, cal)
    return cal.val_accuracy - (cal.val_average_confidence - average_confidence(P))


def full_report(P: PredictionMatrix, cal: CalibrationProfile | None = None,
                k_head: int | None = None, head_constant: float | None = None) -> EstimatorReport:
    """Every estimator in one pass.

    The rectified nuclear norm is filled in when ``k_head`` is given, or when
    ``cal`` carries a confusion matrix, in which case ``k_head`` comes from
    BBSE on this matrix's predicted-class distribution.
    """
    from . import labelshift

    n, k = P.shape
    warnings: list[str] = []
    nuc = _nuclear_norm(P)
    disp, disp_norm = dispersity_score(P)

    if k_head is None and cal is not None and cal.confusion is not None:
        k_head = labelshift.estimate_k_head(P, cal.confusion, head_constant=head_constant).k_head
    rectified = None
    if k_head is not None:
        rectified = _normalized(nuc, n, _check_k_head(k_head, k))

    atc = doc = None
    if cal is not None:
        atc = atc_score(P, cal)
        doc = doc_score(P, cal)
        if not 0.0 <= doc <= 1.0:
            warnings.append(f"doc estimate {doc!r} outside [0, 1] (reported unclamped)")

    return EstimatorReport(
        nuclear_norm=_normalized(nuc, n, k),
        dispersity=disp,
        dispersity_normalized=disp_norm,
        mutual_information=mutual_information_score(P),
        average_confidence=average_confidence(P),
        average_negative_entropy=average_negative_entropy(P),
        sample_count=n,
        class_count=k,
        temperature=P.temperature,
        rectified_nuclear_norm=rectified,
        k_head=k_head,
        atc=atc,
        doc=doc,
        warnings=tuple(warnings),
    )


def unit_interval_value(name: str, value: float, k: int) -> float:
    """Map an estimator value onto [0, 1] by its theoretical range.

    Used before probit scaling: estimators whose natural range is not
    [0, 1] (nuclear norm, MI, ANE, ...) are affinely rescaled so that the
    range endpoints land on 0 and 1.
    """
    lo, hi = estimator_range(name, k)
    return (value - lo) / (hi - lo)


def estimator_range(name: str, k: int) -> tuple[float, float]:
    logk = math.log(k)
    ranges = {
        "nuclear_norm": (1.0 / k, 1.0),
        "rectified_nuclear_norm": (1.0 / k, 1.0),
        "dispersity": (0.0, logk),
        "dispersity_normalized": (0.0, 1.0),
        "mutual_information": (0.0, logk),
        "average_confidence": (1.0 / k, 1.0),
        "average_negative_entropy": (-logk, 0.0),
        "atc": (0.0, 1.0),
        "doc": (0.0, 1.0),
    }
    try:
        return ranges[name]
    except KeyError:
        raise InvalidParameter(f"unknown estimator {name!r}") from None
