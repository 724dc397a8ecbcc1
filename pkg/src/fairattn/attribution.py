"""Intervention-based feature attribution.

For each feature, zero its post-softmax attention weight, re-predict, and
record the change in a fairness metric and in accuracy against baseline
predictions. Positive delta_metric means the feature contributes to
unfairness (excluding it makes the outcome fairer); positive
delta_accuracy means excluding it costs accuracy.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .metrics import (METRIC_KINDS, GroupedPredictions, accuracy, metric_or_none)
from .model import AttentionClassifier, AttentionMask, forward, predict
from .schema import EncodedSample, FeatureSchema, stack_samples


@dataclass(frozen=True)
class AttributionEntry:
    feature: str
    metric_kind: str
    delta_metric: float | None  # metric(baseline) - metric(feature zeroed); None if undefined
    delta_accuracy: float
    n_flipped: int              # predictions changed by zeroing the feature

    @property
    def undefined(self) -> bool:
        return self.delta_metric is None


@dataclass
class AttributionReport:
    feature_names: tuple[str, ...]
    metric_kinds: tuple[str, ...]
    entries: list[AttributionEntry]
    baseline: dict[str, float | None]  # accuracy, spd, eqopp, eqodd of the unmasked model
    eval_size: int
    seed: int | None = None
    split: str = "test"
    predictions: dict[str, np.ndarray] | None = field(default=None, repr=False)

    def entries_for(self, kind: str) -> list[AttributionEntry]:
        return [e for e in self.entries if e.metric_kind == kind]

    def entry(self, kind: str, feature: str) -> AttributionEntry:
        for e in self.entries:
            if e.metric_kind == kind and e.feature == feature:
                return e
        raise DataError(f"no entry for feature {feature!r} under {kind!r}")


@dataclass(frozen=True)
class LocalFeatureEffect:
    feature: str
    alpha: float
    prob_zeroed: float
    pred_zeroed: int
    flip: bool


@dataclass(frozen=True)
class LocalAttribution:
    baseline_prob: float
    baseline_pred: int
    effects: tuple[LocalFeatureEffect, ...]


@dataclass(frozen=True)
class RankedFeature:
    feature: str
    delta_metric: float
    delta_accuracy: float
    improvement_pct: float | None  # None when the baseline metric is 0 or undefined


def _sort_entries(entries: list[AttributionEntry], order: dict[str, int]) -> list[AttributionEntry]:
    # descending delta; undefined entries last; ties broken by schema order
    return sorted(entries, key=lambda e: (
        e.delta_metric is None,
        -(e.delta_metric if e.delta_metric is not None else 0.0),
        order[e.feature],
    ))


def masked_predictions(model: AttentionClassifier, schema: FeatureSchema,
                       samples: list[EncodedSample], threshold: float = 0.5,
                       max_workers: int | None = None) -> dict[str, np.ndarray]:
    """Baseline predictions plus one vector per single-feature exclusion.

    Per-feature jobs are independent and read-only; results are keyed by
    feature name so aggregation order never depends on scheduling.
    """
    m = schema.m
    baseline = predict(model, samples, threshold=threshold)

    def zeroed(k: int) -> np.ndarray:
        return predict(model, samples, AttentionMask.zero_feature(m, k), threshold=threshold)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_feature = list(pool.map(zeroed, range(m)))
    else:
        per_feature = [zeroed(k) for k in range(m)]
    out = {"__baseline__": baseline}
    for k, name in enumerate(schema.names):
        out[name] = per_feature[k]
    return out


def attribute_global(model: AttentionClassifier, schema: FeatureSchema,
                     samples: list[EncodedSample], metric_kind: str | tuple[str, ...],
                     *, seed: int | None = None, split: str = "test",
                     threshold: float = 0.5, max_workers: int | None = None,
                     keep_predictions: bool = True) -> AttributionReport:
    """One-feature-at-a-time exclusion report, sorted by delta per metric.

    The model is never mutated; repeated calls return identical reports.
    Metrics undefined on a masked run yield entries marked undefined
    rather than being dropped.
    """
    kinds = (metric_kind,) if isinstance(metric_kind, str) else tuple(metric_kind)
    for kind in kinds:
        if kind not in METRIC_KINDS:
            raise DataError(f"unknown metric kind {kind!r}")
    _, y, g = stack_samples(samples)
    preds = masked_predictions(model, schema, samples, threshold, max_workers)
    y_o = preds["__baseline__"]
    gp_o = GroupedPredictions(y_o, y, g)
    acc_o = accuracy(gp_o)
    baseline = {"accuracy": acc_o}
    for kind in METRIC_KINDS:
        baseline[kind] = metric_or_none(kind, gp_o)

    order = {name: k for k, name in enumerate(schema.names)}
    entries: list[AttributionEntry] = []
    for kind in kinds:
        kind_entries = []
        for name in schema.names:
            y_z = preds[name]
            gp_z = GroupedPredictions(y_z, y, g)
            metric_z = metric_or_none(kind, gp_z)
            if baseline[kind] is None or metric_z is None:
                delta = None
            else:
                delta = baseline[kind] - metric_z
            kind_entries.append(AttributionEntry(
                feature=name,
                metric_kind=kind,
                delta_metric=delta,
                delta_accuracy=acc_o - accuracy(gp_z),
                n_flipped=int((y_z != y_o).sum()),
            ))
        entries.extend(_sort_entries(kind_entries, order))

    return AttributionReport(
        feature_names=schema.names,
        metric_kinds=kinds,
        entries=entries,
        baseline=baseline,
        eval_size=len(samples),
        seed=seed,
        split=split,
        predictions=preds if keep_predictions else None,
    )


def attribute_local(model: AttentionClassifier, schema: FeatureSchema,
                    sample: EncodedSample, threshold: float = 0.5) -> LocalAttribution:
    """Per-feature masked re-prediction for a single sample."""
    base = forward(model, sample)
    base_pred = int(base.prob >= threshold)
    effects = []
    for k, name in enumerate(schema.names):
        trace = forward(model, sample, AttentionMask.zero_feature(schema.m, k))
        pred = int(trace.prob >= threshold)
        effects.append(LocalFeatureEffect(
            feature=name,
            alpha=float(base.alpha[k]),
            prob_zeroed=trace.prob,
            pred_zeroed=pred,
            flip=(pred != base_pred),
        ))
    return LocalAttribution(
        baseline_prob=base.prob, baseline_pred=base_pred, effects=tuple(effects),
    )


def rank_features(report: AttributionReport, top_n: int,
                  metric_kind: str | None = None) -> list[RankedFeature]:
    """Top features by delta_metric with improvement percentages."""
    if metric_kind is None:
        if len(report.metric_kinds) != 1:
            raise DataError("report covers several metric kinds; pass metric_kind")
        metric_kind = report.metric_kinds[0]
    base = report.baseline.get(metric_kind)
    ranked = []
    for e in report.entries_for(metric_kind):
        if e.delta_metric is None:
            continue
        pct = 100.0 * e.delta_metric / base if base else None
        ranked.append(RankedFeature(
            feature=e.feature, delta_metric=e.delta_metric,
            delta_accuracy=e.delta_accuracy, improvement_pct=pct,
        ))
    return ranked[:top_n]


def report_to_dict(report: AttributionReport, include_predictions: bool = False) -> dict:
    doc = {
        "feature_names": list(report.feature_names),
        "metric_kinds": list(report.metric_kinds),
        "baseline": dict(report.baseline),
        "eval_size": report.eval_size,
        "seed": report.seed,
        "split": report.split,
        "entries": [
            {
                "feature": e.feature,
                "metric_kind": e.metric_kind,
                "delta_metric": e.delta_metric,
                "delta_accuracy": e.delta_accuracy,
                "n_flipped": e.n_flipped,
            }
            for e in report.entries
        ],
    }
    if include_predictions and report.predictions is not None:
        doc["predictions"] = {k: v.tolist() for k, v in report.predictions.items()}
    return doc


def report_from_dict(doc: dict) -> AttributionReport:
    preds = None
    if "predictions" in doc:
        preds = {k: np.asarray(v, dtype=np.int64) for k, v in doc["predictions"].items()}
    return AttributionReport(
        feature_names=tuple(doc["feature_names"]),
        metric_kinds=tuple(doc["metric_kinds"]),
        entries=[AttributionEntry(**e) for e in doc["entries"]],
        baseline=dict(doc["baseline"]),
        eval_size=doc["eval_size"],
        seed=doc.get("seed"),
        split=doc.get("split", "test"),
        predictions=preds,
    )


def report_to_json(report: AttributionReport, include_predictions: bool = False) -> str:
    return json.dumps(report_to_dict(report, include_predictions), indent=2) + "\n"


def report_from_json(text: str) -> AttributionReport:
    return report_from_dict(json.loads(text))


def report_to_csv(report: AttributionReport) -> str:
    """Flat CSV: feature, metric_kind, delta_metric, delta_accuracy."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["feature", "metric_kind", "delta_metric", "delta_accuracy"])
    for e in report.entries:
        writer.writerow([
            e.feature, e.metric_kind,
            "" if e.delta_metric is None else repr(e.delta_metric),
            repr(e.delta_accuracy),
        ])
    return buf.getvalue()
