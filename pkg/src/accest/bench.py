"""Benchmark harness: score every test set in a manifest and fit accuracy lines.

Fits use only ``kind == "synthetic"`` entries with labels; real entries are
scored, plotted and predicted from the synthetic fit, never fitted on.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import estimators as est
from . import files, stats, svgplot
from .errors import DegenerateInput, InvalidInput
from .predmatrix import (
    LabeledPredictions,
    RawScores,
    ScoreKind,
    accuracy,
    to_prediction_matrix,
)

MIN_FIT_POINTS = 3
PROB_TICKS = (0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99)


class InsufficientData(Exception):
    """Fewer labeled synthetic sets than a line fit needs."""


@dataclass(frozen=True)
class SetResult:
    name: str
    kind: str
    group: str
    accuracy: float | None
    report: est.EstimatorReport

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "group": self.group,
            "accuracy": self.accuracy,
            "estimators": self.report.to_dict(),
        }


@dataclass
class BenchReport:
    per_set: list[SetResult]
    per_estimator: dict[str, stats.CorrelationSummary | None]
    predictions: dict[str, dict[str, float]]
    scaled: bool
    robust: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scaled": self.scaled,
            "robust": self.robust,
            "per_set": [r.to_dict() for r in self.per_set],
            "per_estimator": {
                name: None if s is None else s.to_dict() for name, s in self.per_estimator.items()
            },
            "predictions": self.predictions,
            "warnings": list(self.warnings),
        }


def load_calibration(path) -> est.CalibrationProfile:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InvalidInput(f"{path}: cannot read calibration: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
    return est.CalibrationProfile.from_dict(d)


def score_file(path, kind: str, temperature: float, k: int | None = None,
               cal: est.CalibrationProfile | None = None, k_head: int | None = None,
               retemper: bool = False) -> tuple[est.EstimatorReport, float | None]:
    """Estimator report and (when labels are present) true accuracy of one file."""
    pf = files.read_prediction_csv(path)
    if k is not None and pf.values.shape[1] != k:
        raise InvalidInput(f"{path}: has {pf.values.shape[1]} classes, manifest says {k}")
    raw = RawScores(pf.values, ScoreKind(kind))
    P = to_prediction_matrix(raw, temperature, retemper_probabilities=retemper)
    report = est.full_report(P, cal, k_head=k_head)
    acc = None if pf.labels is None else accuracy(LabeledPredictions(P, pf.labels))
    return report, acc


def active_estimators(results: list[SetResult]) -> list[str]:
    names = list(est.ESTIMATOR_NAMES) + ["rectified_nuclear_norm"]
    return [n for n in names if results and all(r.report.values()[n] is not None for r in results)]


def run_bench(manifest: files.BenchmarkManifest, scaled: bool = False,
              robust: bool = False) -> BenchReport:
    cal = None if manifest.calibration is None else load_calibration(manifest.calibration)
    results = []
    for e in manifest.entries:
        report, acc = score_file(e.path, manifest.score_kind, manifest.temperature,
                                 manifest.class_count, cal)
        results.append(SetResult(e.name, e.kind, e.group, acc, report))
    fit_set = [r for r in results if r.kind == "synthetic" and r.accuracy is not None]
    if len(fit_set) < MIN_FIT_POINTS:
        raise InsufficientData(
            f"need at least {MIN_FIT_POINTS} labeled synthetic sets to fit, got {len(fit_set)}"
        )
    k = manifest.class_count
    warnings: list[str] = []
    for r in results:
        warnings.extend(f"{r.name}: {w}" for w in r.report.warnings)
    per_estimator: dict[str, stats.CorrelationSummary | None] = {}
    predictions: dict[str, dict[str, float]] = {}
    acc = np.array([r.accuracy for r in fit_set])
    for name in active_estimators(results):
        x = np.array([r.report.values()[name] for r in fit_set])
        rng = est.estimator_range(name, k) if scaled else None
        try:
            summary = stats.correlate(x, acc, scaled=scaled, robust=robust, estimate_range=rng)
        except DegenerateInput as exc:
            warnings.append(f"{name}: no fit ({exc})")
            per_estimator[name] = None
            continue
        per_estimator[name] = summary
        warnings.extend(f"{name}: {w}" for w in summary.warnings)
        if not summary.converged:
            warnings.append(f"{name}: robust fit did not converge")
        preds = {}
        for r in results:
            if r.kind == "real":
                value, w = summary.predict(r.report.values()[name])
                preds[r.name] = value
                warnings.extend(f"{name}/{r.name}: {m}" for m in w)
        predictions[name] = preds
    return BenchReport(results, per_estimator, predictions, scaled, robust, warnings)


def table_rows(report: BenchReport) -> tuple[list[str], list[list[str]]]:
    names = list(est.ESTIMATOR_NAMES) + ["rectified_nuclear_norm"]
    header = ["name", "kind", "group", "accuracy", *names]
    rows = []
    for r in report.per_set:
        vals = r.report.values()
        cells = [r.name, r.kind, r.group, "" if r.accuracy is None else files.format_float(r.accuracy)]
        cells += ["" if vals[n] is None else files.format_float(vals[n]) for n in names]
        rows.append(cells)
    return header, rows


def _prob_ticks(value_range: tuple[float, float] | None = None) -> list[tuple[float, str]]:
    """Tick positions on a probit axis, labelled in original units."""
    ticks = []
    for p in PROB_TICKS:
        label_value = p if value_range is None else value_range[0] + p * (value_range[1] - value_range[0])
        ticks.append((stats.probit(p), f"{label_value:.3g}"))
    return ticks


def scatter_for(report: BenchReport, name: str, k: int) -> str:
    summary = report.per_estimator.get(name)
    value_range = est.estimator_range(name, k) if report.scaled else None
    pts = []
    for r in report.per_set:
        if r.accuracy is None:
            continue
        x, y, _ = stats.transform_axes([r.report.values()[name]], [r.accuracy],
                                       report.scaled, value_range)
        pts.append(svgplot.Point(float(x[0]), float(y[0]), r.group, r.name, r.kind == "real"))
    line = None if summary is None else (summary.slope, summary.intercept)
    fit = "robust" if report.robust else "OLS"
    axes = "probit axes" if report.scaled else "linear axes"
    ticks = {}
    if report.scaled:
        ticks = {"x_ticks": _prob_ticks(value_range=value_range), "y_ticks": _prob_ticks()}
    return svgplot.scatter_svg(pts, name.replace("_", " "), "accuracy", line,
                               title=f"{name} vs accuracy ({fit} fit, {axes})", **ticks)


def write_outputs(report: BenchReport, out_dir, k: int) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    p = out_dir / "report.json"
    files.dump_json(report.to_dict(), p)
    written.append(p)
    header, rows = table_rows(report)
    p = out_dir / "table.csv"
    with open(p, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    written.append(p)
    for name in report.per_estimator:
        p = out_dir / f"scatter-{name}.svg"
        p.write_text(scatter_for(report, name, k), encoding="utf-8")
        written.append(p)
    return written
