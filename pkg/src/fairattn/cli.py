"""Command-line driver for reproducible experiments.

Commands: gen-data, train, attribute, mitigate, sweep, report, rerun.
Every command resolves its arguments (config file entries override
flags), runs deterministically from its seeds, and writes a manifest
sufficient to reproduce all numeric outputs with `fairattn rerun`.

Exit codes: 0 success, 2 usage, 3 data error, 4 training divergence,
5 infeasible fairness constraint.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .attribution import attribute_global, rank_features, report_to_csv, report_to_json
from .checkpoint import load_checkpoint, save_checkpoint
from .data import (SchemaConfig, SplitSpec, SyntheticSpec, export_csv, generate,
                   load_csv, scenario_schema_config, split)
from .encoding import Encoder
from .errors import (ConstraintInfeasibleError, DataError, FairattnError,
                     TrainingDivergedError)
from .metrics import METRIC_KINDS, GroupedPredictions, accuracy, metric_or_none
from .mitigation import (MitigationPlan, apply_mitigation, curve_to_csv,
                         curve_to_json, identify_unfair_features,
                         select_by_constraint, sweep_tradeoff)
from .model import TrainConfig, train
from .schema import stack_samples
from .svgplot import LabeledPoint, curve_svg, scatter_svg

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4
EXIT_INFEASIBLE = 5

MANIFEST_FORMAT = "fairattn.manifest"
DEFAULT_DECAYS = "1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1,0.0"
DEFAULT_SEEDS = "0,1,2,3,4"


def _output_root() -> Path:
    return Path(os.environ.get("FAIRATTN_OUTPUT_ROOT", "runs"))


def _resolve_out(args, command: str) -> Path:
    out = Path(args.out) if args.out else _output_root() / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise DataError(f"cannot parse float list {text!r}") from None


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise DataError(f"cannot parse integer list {text!r}") from None


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_manifest(out: Path, command: str, args: argparse.Namespace,
                    artifacts: list[str]) -> None:
    doc = {
        "format": MANIFEST_FORMAT,
        "version": 1,
        "command": command,
        "args": {k: v for k, v in vars(args).items() if k not in ("func", "command")},
        "package_version": __version__,
        "created_utc": _utc_now(),
        "artifacts": artifacts,
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- data plumbing

def _dataset_from_args(args):
    """Build the raw dataset plus a provenance record for the manifest."""
    if getattr(args, "data", None):
        if not getattr(args, "schema", None):
            raise DataError("--data requires --schema")
        config = SchemaConfig.from_json_file(args.schema)
        dataset = load_csv(args.data, config)
        source = {"kind": "csv", "data": str(args.data), "schema": str(args.schema)}
    elif getattr(args, "scenario", None):
        spec = SyntheticSpec(scenario=args.scenario, n=args.n, seed=args.data_seed)
        dataset = generate(spec, bins=args.bins)
        source = {"kind": "scenario", "scenario": args.scenario, "n": args.n,
                  "seed": args.data_seed, "bins": args.bins}
    else:
        raise DataError("no dataset source: pass --scenario or --data/--schema")
    return dataset, source


def _split_from_args(args):
    fractions = _parse_floats(args.split)
    if len(fractions) != 3:
        raise DataError(f"--split needs three fractions, got {args.split!r}")
    return SplitSpec(fractions=tuple(fractions), seed=args.split_seed)


def _train_config(args, seed: int) -> TrainConfig:
    anneal_acc = args.anneal_acc
    if anneal_acc is not None and anneal_acc <= 0:
        anneal_acc = None
    return TrainConfig(
        d_e=args.d_e, h=args.hidden, learning_rate=args.lr, epochs=args.epochs,
        batch_size=args.batch_size, seed=seed, init_scale=args.init_scale,
        anneal_acc=anneal_acc, anneal_factor=args.anneal_factor,
        anneal_check_every=args.anneal_check_every,
    )


def _prepare(args):
    """Dataset -> splits -> encoder (fitted on train) -> encoded splits."""
    dataset, source = _dataset_from_args(args)
    split_spec = _split_from_args(args)
    train_ds, val_ds, test_ds = split(dataset, split_spec)
    encoder = Encoder.fit(train_ds)
    enc = {
        "train": encoder.encode_dataset(train_ds),
        "val": encoder.encode_dataset(val_ds),
        "test": encoder.encode_dataset(test_ds),
    }
    provenance = {"source": source,
                  "split": {"fractions": list(split_spec.fractions), "seed": split_spec.seed}}
    return encoder, enc, provenance


def _metrics_summary(y_hat, samples) -> dict:
    _, y, g = stack_samples(samples)
    gp = GroupedPredictions(y_hat, y, g)
    out = {"accuracy": accuracy(gp)}
    for kind in METRIC_KINDS:
        out[kind] = metric_or_none(kind, gp)
    return out


# ---------------------------------------------------------------- commands

def cmd_gen_data(args) -> int:
    out = _resolve_out(args, "gen-data")
    spec = SyntheticSpec(scenario=args.scenario, n=args.n, seed=args.data_seed)
    dataset = generate(spec, bins=args.bins)
    data_path = out / f"scenario{args.scenario}.csv"
    schema_path = out / f"scenario{args.scenario}_schema.json"
    export_csv(dataset, data_path, schema_path)
    _write_manifest(out, "gen-data", args, [data_path.name, schema_path.name])
    print(f"wrote {dataset.n} rows to {data_path}")
    print(f"wrote schema config to {schema_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    out = _resolve_out(args, "train")
    encoder, enc, provenance = _prepare(args)
    config = _train_config(args, args.seed)
    model = train(encoder.schema, enc["train"], config)
    ckpt_path = out / "checkpoint.json"
    save_checkpoint(ckpt_path, model, encoder, config, provenance)

    summary = {}
    for part in ("val", "test"):
        from .model import predict
        y_hat = predict(model, enc[part])
        summary[part] = _metrics_summary(y_hat, enc[part])
    _write_json(out / "metrics.json", summary)
    _write_manifest(out, "train", args, ["checkpoint.json", "metrics.json"])
    print(f"checkpoint: {ckpt_path}")
    print(f"val accuracy: {summary['val']['accuracy']:.4f}")
    print(f"test accuracy: {summary['test']['accuracy']:.4f}")
    for kind in METRIC_KINDS:
        v = summary["test"][kind]
        print(f"test {kind}: {'undefined' if v is None else f'{v:.4f}'}")
    return EXIT_OK


def _provenance_namespace(args, provenance: dict) -> argparse.Namespace:
    """Reconstruct dataset/split flags from a checkpoint's provenance."""
    ns = argparse.Namespace(**vars(args))
    src = provenance["source"]
    if src["kind"] == "scenario":
        ns.scenario, ns.n, ns.data_seed = src["scenario"], src["n"], src["seed"]
        ns.bins = src.get("bins", 10)
        ns.data = ns.schema = None
    else:
        ns.data, ns.schema = src["data"], src["schema"]
        ns.scenario = None
    sp = provenance["split"]
    ns.split = ",".join(repr(f) for f in sp["fractions"])
    ns.split_seed = sp["seed"]
    return ns


def _load_for_checkpoint(args):
    ckpt = load_checkpoint(args.checkpoint)
    has_source = getattr(args, "data", None) or getattr(args, "scenario", None)
    if not has_source:
        if not ckpt.provenance:
            raise DataError("checkpoint has no data provenance; pass --scenario or --data")
        args = _provenance_namespace(args, ckpt.provenance)
    dataset, _ = _dataset_from_args(args)
    split_spec = _split_from_args(args)
    train_ds, val_ds, test_ds = split(dataset, split_spec)
    enc = {
        "train": ckpt.encoder.encode_dataset(train_ds),
        "val": ckpt.encoder.encode_dataset(val_ds),
        "test": ckpt.encoder.encode_dataset(test_ds),
    }
    return ckpt, enc


def cmd_attribute(args) -> int:
    out = _resolve_out(args, "attribute")
    ckpt, enc = _load_for_checkpoint(args)
    samples = enc[args.split_part]
    report = attribute_global(ckpt.model, ckpt.encoder.schema, samples, args.metric,
                              seed=ckpt.config.seed, split=args.split_part,
                              max_workers=args.workers)
    (out / "attribution.json").write_text(report_to_json(report), encoding="utf-8")
    (out / "attribution.csv").write_text(report_to_csv(report), encoding="utf-8")

    # scatter source: absolute (metric, accuracy) per exclusion plus the original
    points_path = out / "points.csv"
    base_metric = report.baseline[args.metric]
    with open(points_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", args.metric, "accuracy"])
        writer.writerow(["original",
                         "" if base_metric is None else repr(base_metric),
                         repr(report.baseline["accuracy"])])
        for e in report.entries_for(args.metric):
            metric_z = None if (e.delta_metric is None or base_metric is None) \
                else base_metric - e.delta_metric
            writer.writerow([e.feature,
                             "" if metric_z is None else repr(metric_z),
                             repr(report.baseline["accuracy"] - e.delta_accuracy)])
    render_points_csv(points_path, out / "attribution.svg",
                      title=f"Per-feature exclusion ({args.metric})")
    _write_manifest(out, "attribute", args,
                    ["attribution.json", "attribution.csv", "points.csv", "attribution.svg"])
    for e in report.entries_for(args.metric):
        d = "undefined" if e.delta_metric is None else f"{e.delta_metric:+.4f}"
        print(f"{e.feature}: delta_{args.metric} {d}, delta_accuracy {e.delta_accuracy:+.4f}")
    return EXIT_OK


def cmd_mitigate(args) -> int:
    out = _resolve_out(args, "mitigate")
    encoder, enc, provenance = _prepare(args)
    schema = encoder.schema
    seeds = _parse_ints(args.seeds)
    if not seeds:
        raise DataError("need at least one seed")
    if not 0.0 <= args.decay < 1.0:
        raise DataError(f"--decay must lie in [0, 1), got {args.decay}")

    per_seed = []
    for seed in seeds:
        model = train(schema, enc["train"], _train_config(args, seed))
        ident = identify_unfair_features(model, schema, enc["val"], args.metric,
                                         threshold=args.threshold)
        plan = MitigationPlan(unfair_features=ident.features, decay_rate=args.decay,
                              metric_kind=args.metric, threshold=args.threshold)
        from .model import predict
        before = _metrics_summary(predict(model, enc["test"]), enc["test"])
        after = _metrics_summary(apply_mitigation(model, schema, enc["test"], plan),
                                 enc["test"])
        per_seed.append({
            "seed": seed,
            "unfair_features": list(ident.features),
            "warnings": list(ident.warnings),
            "degenerate": ident.degenerate,
            "before": before,
            "after": after,
        })

    measures = ["accuracy", *METRIC_KINDS]
    rows = []
    for measure in measures:
        befores = [s["before"][measure] for s in per_seed]
        afters = [s["after"][measure] for s in per_seed]
        b = [v for v in befores if v is not None]
        a = [v for v in afters if v is not None]
        row = {
            "metric": measure,
            "before": float(np.mean(b)) if b else None,
            "after": float(np.mean(a)) if a else None,
        }
        row["delta"] = None if (row["before"] is None or row["after"] is None) \
            else row["after"] - row["before"]
        rows.append(row)

    _write_json(out / "mitigation.json",
                {"metric_kind": args.metric, "decay": args.decay, "seeds": seeds,
                 "per_seed": per_seed, "table": rows})
    with open(out / "table.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "before", "after", "delta"])
        for row in rows:
            writer.writerow([row["metric"]] + [
                "" if row[k] is None else repr(row[k]) for k in ("before", "after", "delta")])
    _write_manifest(out, "mitigate", args, ["mitigation.json", "table.csv"])

    print(f"{'metric':<10}{'before':>10}{'after':>10}{'delta':>10}")
    for row in rows:
        cells = ["   undef" if row[k] is None else f"{row[k]:>10.4f}" for k in ("before", "after", "delta")]
        print(f"{row['metric']:<10}" + "".join(cells))
    return EXIT_OK


def cmd_sweep(args) -> int:
    out = _resolve_out(args, "sweep")
    encoder, enc, provenance = _prepare(args)
    seeds = _parse_ints(args.seeds)
    decays = _parse_floats(args.decays)
    curve = sweep_tradeoff(encoder.schema, enc["train"], enc["val"], enc["test"],
                           _train_config(args, seeds[0] if seeds else 0),
                           args.metric, decays, seeds,
                           threshold=args.threshold, max_workers=args.workers)
    (out / "curve.csv").write_text(curve_to_csv(curve), encoding="utf-8")
    (out / "curve.json").write_text(curve_to_json(curve), encoding="utf-8")
    render_curve_csv(out / "curve.csv", out / "curve.svg",
                     title=f"Accuracy vs {args.metric} trade-off", metric=args.metric)
    artifacts = ["curve.csv", "curve.json", "curve.svg"]

    if args.max_metric is not None:
        point = select_by_constraint(curve, args.max_metric)
        _write_json(out / "selected.json", {
            "max_metric": args.max_metric, "d_r": point.decay_rate,
            "acc_mean": point.acc_mean, "metric_mean": point.metric_mean,
        })
        artifacts.append("selected.json")
        print(f"selected d_r={point.decay_rate:g}: accuracy {point.acc_mean:.4f}, "
              f"{args.metric} {point.metric_mean:.4f}")
    _write_manifest(out, "sweep", args, artifacts)
    for p in curve.points:
        print(f"d_r={p.decay_rate:<4g} accuracy {p.acc_mean:.4f} (±{p.acc_std:.4f})  "
              f"{args.metric} {p.metric_mean:.4f} (±{p.metric_std:.4f})  seeds={p.n_seeds}")
    if curve.dropped_seeds:
        print(f"dropped seeds (diverged): {list(curve.dropped_seeds)}")
    return EXIT_OK


def cmd_report(args) -> int:
    out = _resolve_out(args, "report")
    encoder, enc, provenance = _prepare(args)
    schema = encoder.schema
    seeds = _parse_ints(args.seeds)
    artifacts = []

    reports = []
    for seed in seeds:
        model = train(schema, enc["train"], _train_config(args, seed))
        report = attribute_global(model, schema, enc["test"], METRIC_KINDS, seed=seed)
        name = f"attribution_seed{seed}.json"
        (out / name).write_text(report_to_json(report), encoding="utf-8")
        artifacts.append(name)
        reports.append(report)

    rankings = {}
    for kind in METRIC_KINDS:
        base_vals = [r.baseline[kind] for r in reports if r.baseline[kind] is not None]
        mean_base = float(np.mean(base_vals)) if base_vals else None
        per_feature = []
        for name in schema.names:
            deltas = [r.entry(kind, name).delta_metric for r in reports]
            deltas = [d for d in deltas if d is not None]
            accs = [r.entry(kind, name).delta_accuracy for r in reports]
            if not deltas:
                continue
            mean_delta = float(np.mean(deltas))
            pct = 100.0 * mean_delta / mean_base if mean_base else None
            per_feature.append({
                "feature": name,
                "mean_delta_metric": mean_delta,
                "mean_delta_accuracy": float(np.mean(accs)),
                "improvement_pct": pct,
            })
        per_feature.sort(key=lambda d: (-d["mean_delta_metric"], schema.index_of(d["feature"])))
        rankings[kind] = {"baseline_mean": mean_base, "top": per_feature[:args.top_k]}

    _write_json(out / "rankings.json",
                {"top_k": args.top_k, "seeds": seeds, "rankings": rankings})
    with open(out / "rankings.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric_kind", "rank", "feature", "mean_delta_metric",
                         "mean_delta_accuracy", "improvement_pct"])
        for kind in METRIC_KINDS:
            for rank, row in enumerate(rankings[kind]["top"], start=1):
                writer.writerow([kind, rank, row["feature"],
                                 repr(row["mean_delta_metric"]),
                                 repr(row["mean_delta_accuracy"]),
                                 "" if row["improvement_pct"] is None else repr(row["improvement_pct"])])
    artifacts += ["rankings.json", "rankings.csv"]
    _write_manifest(out, "report", args, artifacts)

    for kind in METRIC_KINDS:
        print(f"top {args.top_k} features for {kind}:")
        for rank, row in enumerate(rankings[kind]["top"], start=1):
            pct = row["improvement_pct"]
            pct_s = "n/a" if pct is None else f"{pct:+.1f}%"
            print(f"  {rank}. {row['feature']}  delta={row['mean_delta_metric']:+.4f}  "
                  f"improvement={pct_s}")
    return EXIT_OK


def cmd_rerun(args) -> int:
    path = Path(args.manifest)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"manifest {path} is not valid JSON: {e}") from e
    if doc.get("format") != MANIFEST_FORMAT:
        raise DataError(f"{path}: not a {MANIFEST_FORMAT} file")
    command = doc["command"]
    handler = COMMANDS.get(command)
    if handler is None:
        raise DataError(f"{path}: unknown command {command!r}")
    ns = argparse.Namespace(**doc["args"])
    if args.out:
        ns.out = args.out
    return handler(ns)


# ---------------------------------------------------------------- plot renderers

def render_points_csv(csv_path, svg_path, title: str) -> None:
    """Scatter of (metric, accuracy) points straight from the emitted CSV."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        points = []
        for row in reader:
            if row[1] == "":
                continue
            points.append(LabeledPoint(
                x=float(row[1]), y=float(row[2]), label=row[0],
                highlight=(row[0] == "original"),
            ))
    svg = scatter_svg(points, title=title, xlabel=header[1], ylabel=header[2])
    Path(svg_path).write_text(svg, encoding="utf-8")


def render_curve_csv(csv_path, svg_path, title: str, metric: str) -> None:
    """Mean trade-off line with a +/- std band straight from the curve CSV."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        xs, ys, stds, labels = [], [], [], []
        for row in reader:
            xs.append(float(row[1]))
            ys.append(float(row[3]))
            stds.append(float(row[4]))
            labels.append(f"d_r={float(row[0]):g}")
    svg = curve_svg(xs, ys, stds, labels, title=title, xlabel="accuracy", ylabel=metric)
    Path(svg_path).write_text(svg, encoding="utf-8")


# ---------------------------------------------------------------- wiring

def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", type=int, choices=(1, 2), help="synthetic scenario")
    p.add_argument("--n", type=int, default=10000, help="synthetic sample count")
    p.add_argument("--data-seed", type=int, default=0, help="synthetic generator seed")
    p.add_argument("--bins", type=int, default=10, help="quantile bins for continuous features")
    p.add_argument("--data", help="CSV data file")
    p.add_argument("--schema", help="schema config JSON for --data")
    p.add_argument("--split", default="0.7,0.15,0.15", help="train,val,test fractions")
    p.add_argument("--split-seed", type=int, default=0, help="split shuffle seed")


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d-e", type=int, default=32, help="embedding width")
    p.add_argument("--hidden", type=int, default=64, help="hidden layer width")
    p.add_argument("--lr", type=float, default=0.05, help="SGD learning rate")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--init-scale", type=float, default=0.45)
    p.add_argument("--anneal-acc", type=float, default=0.878,
                   help="train accuracy that triggers the lr anneal (negative disables)")
    p.add_argument("--anneal-factor", type=float, default=0.85)
    p.add_argument("--anneal-check-every", type=int, default=2)


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output directory (default: $FAIRATTN_OUTPUT_ROOT/<command>)")
    p.add_argument("--config", help="JSON file whose entries override flags")
    p.add_argument("--metric", choices=METRIC_KINDS, default="spd")
    p.add_argument("--workers", type=int, default=None, help="parallel worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairattn",
        description="Attention-based classification with fairness attribution and mitigation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic scenario CSV")
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--seed", type=int, dest="data_seed", help="alias for --data-seed")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--config")

    p = sub.add_parser("train", help="train a classifier and save a checkpoint")
    _add_data_args(p)
    _add_train_args(p)
    _add_common_args(p)
    p.add_argument("--seed", type=int, default=0, help="training seed")

    p = sub.add_parser("attribute", help="per-feature exclusion report and scatter plot")
    p.add_argument("--checkpoint", required=True)
    _add_data_args(p)
    _add_common_args(p)
    p.add_argument("--split-part", choices=("train", "val", "test"), default="test")

    p = sub.add_parser("mitigate", help="identify unfair features and decay their attention")
    _add_data_args(p)
    _add_train_args(p)
    _add_common_args(p)
    p.add_argument("--seeds", default=DEFAULT_SEEDS, help="comma-separated training seeds")
    p.add_argument("--decay", type=float, default=0.0, help="decay rate for the unfair set")
    p.add_argument("--threshold", type=float, default=0.0, help="inclusion threshold on delta")

    p = sub.add_parser("sweep", help="trace the accuracy-vs-fairness trade-off curve")
    _add_data_args(p)
    _add_train_args(p)
    _add_common_args(p)
    p.add_argument("--seeds", default=DEFAULT_SEEDS)
    p.add_argument("--decays", default=DEFAULT_DECAYS, help="comma-separated decay grid; 1.0 is the baseline")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--max-metric", type=float, default=None,
                   help="also select the best point with metric mean <= this bound")

    p = sub.add_parser("report", help="top-k feature rankings for every fairness measure")
    _add_data_args(p)
    _add_train_args(p)
    _add_common_args(p)
    p.add_argument("--seeds", default=DEFAULT_SEEDS)
    p.add_argument("--top-k", type=int, default=3)

    p = sub.add_parser("rerun", help="re-execute a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="override the output directory")

    return parser


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "attribute": cmd_attribute,
    "mitigate": cmd_mitigate,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "rerun": cmd_rerun,
}


def _apply_config_file(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    try:
        overrides = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(overrides, dict):
        raise DataError(f"config file {path} must hold a JSON object")
    known = vars(args)
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise DataError(f"config file {path}: unknown option {key!r}")
        setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(args)
        return COMMANDS[args.command](args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except TrainingDivergedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except ConstraintInfeasibleError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FairattnError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
