"""Prediction CSV files and benchmark manifests."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput

LABEL_COLUMN = "label"
ENTRY_KINDS = ("synthetic", "real")


def format_float(x: float) -> str:
    """Shortest round-tripping decimal for ``x``."""
    return repr(float(x))


@dataclass(frozen=True)
class PredictionFile:
    values: np.ndarray
    labels: np.ndarray | None
    header: list[str]
    lines: list[str]  # data lines verbatim, without trailing newline


def read_prediction_csv(path, label_column: str = LABEL_COLUMN) -> PredictionFile:
    """Parse ``score_0,...,score_{k-1}[,label]``.

    Raises:
        InvalidInput: with ``path:line:`` prefix for any malformed content.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInput(f"{path}: cannot read file: {e.strerror or e}") from e
    lines = text.splitlines()
    if not lines:
        raise InvalidInput(f"{path}:1: empty file")
    header = next(csv.reader([lines[0]]))
    header = [h.strip() for h in header]
    label_idx = header.index(label_column) if label_column in header else None
    score_cols = [i for i, h in enumerate(header) if i != label_idx]
    expected = [f"score_{j}" for j in range(len(score_cols))]
    if [header[i] for i in score_cols] != expected:
        raise InvalidInput(
            f"{path}:1: header must be score_0..score_{{k-1}} with optional '{label_column}', "
            f"got {','.join(header)}"
        )
    if len(score_cols) < 2:
        raise InvalidInput(f"{path}:1: need at least 2 score columns")

    k = len(score_cols)
    values, labels, data_lines = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = next(csv.reader([line]))
        if len(fields) != len(header):
            raise InvalidInput(f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        row = []
        for i in score_cols:
            try:
                v = float(fields[i])
            except ValueError:
                raise InvalidInput(f"{path}:{lineno}: not a number: {fields[i]!r}") from None
            if not math.isfinite(v):
                raise InvalidInput(f"{path}:{lineno}: non-finite value {fields[i]!r}")
            row.append(v)
        values.append(row)
        if label_idx is not None:
            raw = fields[label_idx].strip()
            try:
                lab = int(raw)
            except ValueError:
                raise InvalidInput(f"{path}:{lineno}: label must be an integer, got {raw!r}") from None
            if not 0 <= lab < k:
                raise InvalidInput(f"{path}:{lineno}: label {lab} outside [0, {k})")
            labels.append(lab)
        data_lines.append(line)
    if not values:
        raise InvalidInput(f"{path}:2: no data rows")
    return PredictionFile(
        values=np.array(values, dtype=np.float64),
        labels=None if label_idx is None else np.array(labels, dtype=np.int64),
        header=header,
        lines=data_lines,
    )


def write_prediction_csv(path, values: np.ndarray, labels: np.ndarray | None = None) -> None:
    values = np.asarray(values, dtype=np.float64)
    k = values.shape[1]
    header = [f"score_{j}" for j in range(k)]
    if labels is not None:
        header.append(LABEL_COLUMN)
    out = [",".join(header)]
    for i, row in enumerate(values):
        fields = [format_float(v) for v in row]
        if labels is not None:
            fields.append(str(int(labels[i])))
        out.append(",".join(fields))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def write_csv_lines(path, header: list[str], lines: list[str]) -> None:
    Path(path).write_text("\n".join([",".join(header), *lines]) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    path: Path
    kind: str
    group: str


@dataclass(frozen=True)
class BenchmarkManifest:
    entries: tuple[ManifestEntry, ...]
    class_count: int
    temperature: float
    calibration: Path | None = None
    score_kind: str = "logits"

    def to_dict(self, base: Path | None = None) -> dict:
        def rel(p: Path) -> str:
            return str(p.relative_to(base)) if base is not None else str(p)

        d = {
            "class_count": self.class_count,
            "temperature": self.temperature,
            "score_kind": self.score_kind,
            "calibration": None if self.calibration is None else rel(self.calibration),
            "entries": [
                {"name": e.name, "path": rel(e.path), "kind": e.kind, "group": e.group}
                for e in self.entries
            ],
        }
        return d


def load_manifest(path) -> BenchmarkManifest:
    """Read a manifest; relative paths resolve against the manifest's directory."""
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InvalidInput(f"{path}: cannot read manifest: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
    if not isinstance(d, dict):
        raise InvalidInput(f"{path}: manifest must be a JSON object")
    base = path.parent
    try:
        k = int(d["class_count"])
        temperature = float(d.get("temperature", 0.4))
        raw_entries = d["entries"]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInput(f"{path}: malformed manifest: {e}") from e
    score_kind = d.get("score_kind", "logits")
    if score_kind not in ("logits", "probs"):
        raise InvalidInput(f"{path}: score_kind must be 'logits' or 'probs'")
    entries, seen = [], set()
    for i, e in enumerate(raw_entries):
        try:
            name, p, kind = str(e["name"]), str(e["path"]), str(e["kind"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"{path}: entry {i} missing field {exc}") from exc
        if kind not in ENTRY_KINDS:
            raise InvalidInput(f"{path}: entry {name!r} has kind {kind!r}, expected one of {ENTRY_KINDS}")
        if name in seen:
            raise InvalidInput(f"{path}: duplicate entry name {name!r}")
        seen.add(name)
        entries.append(ManifestEntry(name, base / p, kind, str(e.get("group", kind))))
    cal = d.get("calibration")
    return BenchmarkManifest(
        entries=tuple(entries),
        class_count=k,
        temperature=temperature,
        calibration=None if cal is None else base / cal,
        score_kind=score_kind,
    )


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
