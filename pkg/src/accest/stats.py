"""Correlation metrics, probit scaling and line fits for estimator benchmarking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, InvalidInput

PROBIT_EPS = 1e-6
HUBER_DELTA = 1.345
MAD_TO_SIGMA = 0.6744897501960817  # probit(0.75)
ROBUST_MAX_ITER = 50
ROBUST_TOL = 1e-10

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, used only as the starting point for Halley refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def probit_clamped(p: float) -> tuple[float, bool]:
    """Inverse normal CDF with clamping to ``[1e-6, 1 - 1e-6]``.

    Returns:
        ``(value, clamped)`` where ``clamped`` tells whether ``p`` was moved.
    """
    p = float(p)
    if not math.isfinite(p):
        raise InvalidInput(f"probit input must be finite, got {p!r}")
    clamped = False
    if p < PROBIT_EPS or p > 1.0 - PROBIT_EPS:
        p = min(max(p, PROBIT_EPS), 1.0 - PROBIT_EPS)
        clamped = True
    if p == 0.5:
        return 0.0, clamped
    x = _acklam(p)
    for _ in range(3):
        # Halley step on Phi(x) - p.
        e = normal_cdf(x) - p
        u = e * _SQRT2PI * math.exp(0.5 * x * x)
        step = u / (1.0 + 0.5 * x * u)
        x -= step
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x, clamped


def probit(p: float) -> float:
    return probit_clamped(p)[0]


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise InvalidInput(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InvalidInput("need at least 2 points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInput("inputs must be finite")
    return x, y


def pearson(x, y) -> float:
    x, y = _as_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("Pearson correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(max(r, -1.0), 1.0)


def average_ranks(v) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    v = np.asarray(v, dtype=np.float64)
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    ranks = np.empty(v.size)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    x, y = _as_pair(x, y)
    return pearson(average_ranks(x), average_ranks(y))


def ols_fit(x, y) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)``."""
    x, y = _as_pair(x, y)
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateInput("cannot fit a line to constant x")
    slope = float(dx @ (y - y.mean())) / sxx
    return slope, float(y.mean() - slope * x.mean())


def _weighted_fit(x, y, w) -> tuple[float, float]:
    sw = w.sum()
    mx = (w @ x) / sw
    my = (w @ y) / sw
    dx = x - mx
    sxx = w @ (dx * dx)
    if sxx <= 0.0:
        raise DegenerateInput("weighted x has zero spread")
    slope = (w @ (dx * (y - my))) / sxx
    return float(slope), float(my - slope * mx)


@dataclass(frozen=True)
class RobustFit:
    slope: float
    intercept: float
    converged: bool
    iterations: int


def robust_fit(x, y, delta: float = HUBER_DELTA, max_iter: int = ROBUST_MAX_ITER,
               tol: float = ROBUST_TOL) -> RobustFit:
    """Huber M-estimate of a line by iteratively reweighted least squares.

    Residuals are scaled by ``MAD / 0.6745``; points with scaled residual
    beyond ``delta`` get weight ``delta / |u|``. Starts from OLS and stops when
    both coefficients move less than ``tol`` or after ``max_iter`` rounds; a
    non-converged fit is returned with ``converged=False``.
    """
    x, y = _as_pair(x, y)
    if x.size < 3:
        raise InvalidInput("robust fit needs at least 3 points")
    slope, intercept = ols_fit(x, y)
    floor = 1e-12 * (1.0 + float(np.max(np.abs(y))))
    for it in range(1, max_iter + 1):
        r = y - (slope * x + intercept)
        scale = float(np.median(np.abs(r - np.median(r)))) / MAD_TO_SIGMA
        if scale <= floor:
            # More than half the points already sit on the line.
            return RobustFit(slope, intercept, True, it - 1)
        u = np.abs(r) / scale
        w = np.where(u <= delta, 1.0, delta / np.maximum(u, delta))
        new_slope, new_intercept = _weighted_fit(x, y, w)
        done = abs(new_slope - slope) < tol and abs(new_intercept - intercept) < tol
        slope, intercept = new_slope, new_intercept
        if done:
            return RobustFit(slope, intercept, True, it)
    return RobustFit(slope, intercept, False, max_iter)


def r_squared(x, y, slope: float, intercept: float) -> float:
    """``1 - SS_res / SS_tot`` for the given line (negative for bad non-OLS lines)."""
    x, y = _as_pair(x, y)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateInput("R^2 undefined for constant y")
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    return 1.0 - ss_res / ss_tot


def _to_unit(value: float, value_range: tuple[float, float] | None) -> float:
    if value_range is None:
        return value
    lo, hi = value_range
    return (value - lo) / (hi - lo)


def predict_accuracy(estimate: float, slope: float, intercept: float, scaled: bool,
                     estimate_range: tuple[float, float] | None = None) -> tuple[float, list[str]]:
    """Read an accuracy off a fitted line.

    In scaled mode the line lives on probit axes: the estimate is mapped to
    [0, 1] by ``estimate_range`` (when given), probit-transformed, and the
    line output is sent back through the normal CDF. Raw-mode predictions
    outside [0, 1] are flagged, not clamped.
    """
    warnings: list[str] = []
    if scaled:
        z, clamped = probit_clamped(_to_unit(estimate, estimate_range))
        if clamped:
            warnings.append(f"estimate {estimate!r} clamped before probit")
        return normal_cdf(slope * z + intercept), warnings
    acc = slope * estimate + intercept
    if not 0.0 <= acc <= 1.0:
        warnings.append(f"predicted accuracy {acc!r} outside [0, 1] (reported unclamped)")
    return acc, warnings


@dataclass(frozen=True)
class CorrelationSummary:
    """Fit of accuracy against one estimator over a set of test sets.

    ``slope``/``intercept`` live on probit axes when ``scaled`` is set, in
    which case estimates are first mapped to [0, 1] with ``estimate_range``.
    """

    pearson_r: float
    spearman_rho: float
    r_squared: float
    slope: float
    intercept: float
    scaled: bool
    residuals: tuple[float, ...]
    method: str = "ols"
    converged: bool = True
    estimate_range: tuple[float, float] | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def predict(self, estimate: float) -> tuple[float, list[str]]:
        return predict_accuracy(estimate, self.slope, self.intercept, self.scaled,
                                self.estimate_range)

    def to_dict(self) -> dict:
        return {
            "pearson_r": self.pearson_r,
            "spearman_rho": self.spearman_rho,
            "r_squared": self.r_squared,
            "slope": self.slope,
            "intercept": self.intercept,
            "scaled": self.scaled,
            "method": self.method,
            "converged": self.converged,
            "estimate_range": None if self.estimate_range is None else list(self.estimate_range),
            "residuals": list(self.residuals),
            "warnings": list(self.warnings),
        }


def transform_axes(estimates, accuracies, scaled: bool,
                   estimate_range: tuple[float, float] | None = None
                   ) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """The (x, y) coordinates a fit is computed on, plus clamping warnings."""
    x = np.asarray(estimates, dtype=np.float64).ravel()
    y = np.asarray(accuracies, dtype=np.float64).ravel()
    warnings: list[str] = []
    if not scaled:
        return x, y, warnings
    xs, ys = np.empty_like(x), np.empty_like(y)
    for i, (a, b) in enumerate(zip(x, y)):
        xs[i], cx = probit_clamped(_to_unit(a, estimate_range))
        ys[i], cy = probit_clamped(b)
        if cx:
            warnings.append(f"point {i}: estimate {a!r} clamped before probit")
        if cy:
            warnings.append(f"point {i}: accuracy {b!r} clamped before probit")
    return xs, ys, warnings


def correlate(estimates, accuracies, scaled: bool = True, robust: bool = False,
              estimate_range: tuple[float, float] | None = None) -> CorrelationSummary:
    """Pearson, Spearman, line fit and R^2 of accuracy against an estimator.

    Pearson, the fit, R^2 and residuals use probit axes when ``scaled``;
    Spearman always uses the raw values (probit is monotone, ranks agree).
    """
    est = np.asarray(estimates, dtype=np.float64).ravel()
    acc = np.asarray(accuracies, dtype=np.float64).ravel()
    if est.size < 3 or est.size != acc.size:
        raise InvalidInput("correlate needs at least 3 (estimate, accuracy) pairs")
    x, y, warnings = transform_axes(est, acc, scaled, estimate_range)
    if robust:
        fit = robust_fit(x, y)
        slope, intercept, converged = fit.slope, fit.intercept, fit.converged
    else:
        slope, intercept = ols_fit(x, y)
        converged = True
    return CorrelationSummary(
        pearson_r=pearson(x, y),
        spearman_rho=spearman(est, acc),
        r_squared=r_squared(x, y, slope, intercept),
        slope=slope,
        intercept=intercept,
        scaled=scaled,
        residuals=tuple(float(v) for v in y - (slope * x + intercept)),
        method="huber" if robust else "ols",
        converged=converged,
        estimate_range=estimate_range if scaled else None,
        warnings=tuple(warnings),
    )
