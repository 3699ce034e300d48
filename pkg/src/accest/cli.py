"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 insufficient data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, files, synth
from . import estimators as est
from .errors import InvalidInput, InvalidParameter, NumericalFailure
from .predmatrix import DEFAULT_TEMPERATURE, LabeledPredictions, RawScores, ScoreKind, to_prediction_matrix

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_INSUFFICIENT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _csv_numbers(text: str, count: int, name: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise UsageError(f"--{name} expects {count} comma-separated values, got {text!r}")
    return parts


def cmd_score(args) -> int:
    cal = bench.load_calibration(args.calibration) if args.calibration else None
    report, _ = bench.score_file(args.input, args.kind, args.temperature, cal=cal,
                                 k_head=args.k_head, retemper=args.retemper)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    pf = files.read_prediction_csv(args.val, label_column=args.labels_col)
    if pf.labels is None:
        raise InvalidInput(f"{args.val}: no '{args.labels_col}' column")
    P = to_prediction_matrix(RawScores(pf.values, ScoreKind(args.kind)), args.temperature)
    profile = est.calibrate_atc(LabeledPredictions(P, pf.labels), args.score)
    files.dump_json(profile.to_dict(), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    manifest = files.load_manifest(args.manifest)
    report = bench.run_bench(manifest, scaled=args.scaled, robust=args.robust)
    for path in bench.write_outputs(report, args.out_dir, manifest.class_count):
        print(path)
    return EXIT_OK


def parse_world(text: str) -> synth.WorldSpec:
    k, d, R, beta, seed = _csv_numbers(text, 5, "world")
    try:
        return synth.WorldSpec(int(k), int(d), float(R), int(seed), float(beta))
    except ValueError as e:
        raise UsageError(f"--world: {e}") from e


def write_synthetic_benchmark(out_dir, spec: synth.WorldSpec, families: int, levels: int,
                              composed: int, samples_per_class: int, imbalance: float | None,
                              temperature: float, validation_samples: int | None = None) -> Path:
    """Generate a benchmark directory: one CSV per scenario, a clean
    validation set, its calibration profile and ``manifest.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    world = synth.build_world(spec)
    scenarios = synth.make_benchmark(world, families, levels, composed, spec.seed,
                                     samples_per_class, imbalance)
    entries = []
    for sc in scenarios:
        gen = synth.generate_set(world, sc)
        path = out_dir / f"{sc.name}.csv"
        files.write_prediction_csv(path, gen.raw.values, gen.labels)
        entries.append(files.ManifestEntry(sc.name, path, "synthetic", sc.group))

    val_scenario = synth.clean_scenario(world, validation_samples or samples_per_class,
                                        synth.derive_seed(spec.seed, 2**32), name="validation")
    val = synth.generate_set(world, val_scenario)
    files.write_prediction_csv(out_dir / "validation.csv", val.raw.values, val.labels)
    profile = est.calibrate_atc(val.labeled(temperature))
    cal_path = out_dir / "calibration.json"
    files.dump_json(profile.to_dict(), cal_path)

    manifest = files.BenchmarkManifest(tuple(entries), spec.class_count, temperature, cal_path, "logits")
    manifest_path = out_dir / "manifest.json"
    files.dump_json(manifest.to_dict(base=out_dir), manifest_path)
    return manifest_path


def cmd_synth(args) -> int:
    spec = parse_world(args.world)
    t, levels = (int(v) for v in _csv_numbers(args.grid, 2, "grid"))
    path = write_synthetic_benchmark(args.out_dir, spec, t, levels, args.composed, args.samples,
                                     args.imbalance, args.temperature)
    print(path)
    return EXIT_OK


def cmd_subsample(args) -> int:
    pf = files.read_prediction_csv(args.input)
    idx = synth.subsample_indices(len(pf.lines), args.fraction, args.seed)
    files.write_csv_lines(args.out, pf.header, [pf.lines[i] for i in idx])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accest", description="Label-free accuracy estimation from prediction matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one prediction file")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=["logits", "probs"], default="logits")
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--calibration")
    p.add_argument("--k-head", type=int, dest="k_head")
    p.add_argument("--retemper", action="store_true",
                   help="re-temper probability inputs instead of using them as-is")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("calibrate", help="fit ATC/DoC statistics on a labeled validation file")
    p.add_argument("--val", required=True)
    p.add_argument("--labels-col", default=files.LABEL_COLUMN, dest="labels_col")
    p.add_argument("--kind", choices=["logits", "probs"], default="logits")
    p.add_argument("--score", choices=[s.value for s in est.ConfidenceScore],
                   default=est.ConfidenceScore.MAX_CONFIDENCE.value)
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="correlate estimators with accuracy over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--scaled", action="store_true", help="fit on probit axes")
    p.add_argument("--robust", action="store_true", help="Huber line fit instead of OLS")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic shift benchmark")
    p.add_argument("--world", default="10,32,4.0,0.25,0", help="k,d,R,beta,seed")
    p.add_argument("--grid", default="3,5", help="families,levels")
    p.add_argument("--composed", type=int, default=0)
    p.add_argument("--imbalance", type=float)
    p.add_argument("--samples", type=int, default=200, help="samples per (head) class")
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("subsample", help="keep a random fraction of a prediction file's rows")
    p.add_argument("--input", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subsample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args)
    except (InvalidInput, InvalidParameter, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except bench.InsufficientData as e:
        print(f"insufficient data: {e}", file=sys.stderr)
        return EXIT_INSUFFICIENT


if __name__ == "__main__":
    sys.exit(main())
