"""Label-shift helpers: BBSE class-prior estimation and head-class counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidParameter, NumericalFailure
from .predmatrix import PredictionMatrix, predicted_labels

MAX_CONDITION = 1e8
PRIOR_TOL = 1e-6
# Head-class offset used with k = 1000 classes; other k scale it by 0.08 * k.
K1000_HEAD_OFFSET = 80
HEAD_OFFSET_FRACTION = 0.08


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ClassDistributionEstimate:
    weights: np.ndarray
    target_prior: np.ndarray
    residual: float


@dataclass(frozen=True)
class ImbalanceIntensity:
    r_m: float
    k_head: int


def _check_prior(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1 or not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidInput(f"{name} must be a non-negative finite vector")
    if abs(p.sum() - 1.0) > PRIOR_TOL:
        raise InvalidInput(f"{name} must sum to 1, got {p.sum()!r}")
    return p


def bbse_estimate(confusion, target_pred_prior) -> ClassDistributionEstimate:
    """Black-box shift estimation of the target class prior.

    Args:
        confusion: ``(k, k)`` joint counts on source validation data,
            ``confusion[i, j]`` = #(predicted ``i``, true ``j``).
        target_pred_prior: distribution of predicted classes on the target set.

    Solves ``C w = mu`` in the least-squares sense, where ``C`` is the
    confusion matrix normalized to a joint distribution. Negative weights are
    clamped to zero before forming the target prior.

    Raises:
        InvalidInput: a class has no validation support or shapes disagree.
        NumericalFailure: ``C`` has condition number above 1e8.
    """
    counts = np.asarray(confusion, dtype=np.float64)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise InvalidInput(f"confusion must be square, got shape {counts.shape}")
    if not np.all(np.isfinite(counts)) or np.any(counts < 0):
        raise InvalidInput("confusion counts must be finite and non-negative")
    mu = _check_prior(target_pred_prior, "target_pred_prior")
    k = counts.shape[0]
    if mu.size != k:
        raise InvalidInput(f"target_pred_prior has {mu.size} entries, expected {k}")
    support = counts.sum(axis=0)
    missing = np.flatnonzero(support <= 0)
    if missing.size:
        raise InvalidInput(f"class {missing[0]} has no validation samples")

    C = counts / counts.sum()
    source_prior = C.sum(axis=0)
    w, *_ = np.linalg.lstsq(C, mu, rcond=None)
    residual = float(np.linalg.norm(C @ w - mu))
    cond = np.linalg.cond(C)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NumericalFailure(
            f"confusion matrix is ill-conditioned (cond={cond:.3g}, residual={residual:.3g})"
        )
    w = np.maximum(w, 0.0)
    target = w * source_prior
    total = target.sum()
    if total <= 0:
        raise NumericalFailure("all BBSE weights clamped to zero")
    return ClassDistributionEstimate(weights=w, target_prior=target / total, residual=residual)


def head_offset(k: int) -> int:
    if k == 1000:
        return K1000_HEAD_OFFSET
    return _round_half_up(HEAD_OFFSET_FRACTION * k)


def head_class_count(k: int, r_m: float, head_constant: float | None = None) -> int:
    """``k - (1 - min(r_m, 1)) * offset``, rounded and clamped to ``[1, k]``."""
    if r_m < 0 or not math.isfinite(r_m):
        raise InvalidParameter(f"r_m must be a non-negative finite number, got {r_m!r}")
    offset = head_offset(k) if head_constant is None else head_constant
    k_head = _round_half_up(k - (1.0 - min(r_m, 1.0)) * offset)
    return min(max(k_head, 1), k)


def imbalance_intensity(target_prior, head_count: int = 10, tail_count: int = 10,
                        head_constant: float | None = None) -> ImbalanceIntensity:
    """Tail-to-head mass ratio of a class prior and the implied head-class count.

    The prior is sorted descending; ``r_m`` is the mass of the last
    ``tail_count`` classes over the mass of the first ``head_count``. When
    ``k < head_count + tail_count`` both windows shrink to ``k // 2``.
    """
    p = _check_prior(target_prior, "target_prior")
    k = p.size
    if k < 2:
        raise InvalidInput("need at least 2 classes")
    if head_count < 1 or tail_count < 1:
        raise InvalidParameter("head_count and tail_count must be positive")
    if k < head_count + tail_count:
        head_count = tail_count = k // 2
    s = np.sort(p)[::-1]
    head = s[:head_count].sum()
    tail = s[k - tail_count:].sum()
    r_m = float(tail / head)
    return ImbalanceIntensity(r_m=r_m, k_head=head_class_count(k, r_m, head_constant))


def predicted_class_distribution(P: PredictionMatrix) -> np.ndarray:
    return np.bincount(predicted_labels(P), minlength=P.class_count) / P.sample_count


def estimate_k_head(P: PredictionMatrix, confusion=None, use_bbse: bool = True,
                    head_constant: float | None = None) -> ImbalanceIntensity:
    """Imbalance intensity of a target set from its predictions.

    With ``use_bbse`` (the default) the predicted-class distribution is
    corrected through BBSE using the source ``confusion`` counts; otherwise
    the raw predicted-class distribution is used directly.
    """
    mu = predicted_class_distribution(P)
    if use_bbse:
        if confusion is None:
            raise InvalidInput("BBSE correction needs source confusion counts")
        prior = bbse_estimate(confusion, mu).target_prior
    else:
        prior = mu
    return imbalance_intensity(prior, head_constant=head_constant)
