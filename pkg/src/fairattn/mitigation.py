"""Post-processing bias mitigation by decaying attention weights.

A feature belongs to the unfair set when excluding it does not increase
the chosen fairness metric (delta >= threshold, default 0). Mitigation
multiplies the post-softmax attention weights of that set by a decay rate
in [0, 1) at prediction time; model parameters are never touched.
Sweeping the decay rate over independently seeded trainings traces the
accuracy-vs-fairness trade-off curve.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .attribution import AttributionReport, attribute_global
from .errors import ConstraintInfeasibleError, DataError, TrainingDivergedError
from .metrics import GroupedPredictions, accuracy, metric_or_none
from .model import (AttentionClassifier, AttentionMask, TrainConfig, predict, train)
from .schema import EncodedSample, FeatureSchema, stack_samples


@dataclass(frozen=True)
class MitigationPlan:
    unfair_features: tuple[str, ...]
    decay_rate: float          # in [0, 1); 0 removes the set entirely
    metric_kind: str
    threshold: float = 0.0     # inclusion threshold on delta_metric

    def __post_init__(self):
        object.__setattr__(self, "unfair_features", tuple(self.unfair_features))
        if not 0.0 <= self.decay_rate < 1.0:
            raise DataError(f"decay rate must lie in [0, 1), got {self.decay_rate}")


@dataclass(frozen=True)
class IdentificationResult:
    features: tuple[str, ...]      # schema order
    metric_kind: str
    threshold: float
    report: AttributionReport
    warnings: tuple[str, ...]
    degenerate: bool               # no feature changes any prediction


@dataclass(frozen=True)
class TradeoffPoint:
    decay_rate: float
    acc_mean: float
    acc_std: float
    metric_mean: float
    metric_std: float
    n_seeds: int
    acc_by_seed: tuple[float, ...]
    metric_by_seed: tuple[float | None, ...]


@dataclass(frozen=True)
class TradeoffCurve:
    metric_kind: str
    points: tuple[TradeoffPoint, ...]   # decay rate descending, baseline first
    seeds: tuple[int, ...]              # seeds that trained successfully
    dropped_seeds: tuple[int, ...]
    unfair_sets: dict[int, tuple[str, ...]]


def identify_unfair_features(model: AttentionClassifier, schema: FeatureSchema,
                             samples: list[EncodedSample], metric_kind: str,
                             threshold: float = 0.0,
                             max_workers: int | None = None) -> IdentificationResult:
    """Features whose exclusion does not raise the metric (delta >= threshold).

    Features with a delta of exactly 0 that also change no prediction are
    pruned: decaying them is provably a no-op. Features whose masked run
    leaves the metric undefined are excluded with a warning.
    """
    report = attribute_global(model, schema, samples, metric_kind,
                              split="validation", max_workers=max_workers)
    warnings = []
    chosen = []
    for name in schema.names:
        e = report.entry(metric_kind, name)
        if e.delta_metric is None:
            warnings.append(f"{name}: {metric_kind} undefined when the feature is excluded")
            continue
        if e.delta_metric == 0.0 and e.n_flipped == 0:
            continue  # exact no-op under any decay
        if e.delta_metric >= threshold:
            chosen.append(name)
    degenerate = all(e.n_flipped == 0 for e in report.entries_for(metric_kind))
    return IdentificationResult(
        features=tuple(chosen), metric_kind=metric_kind, threshold=threshold,
        report=report, warnings=tuple(warnings), degenerate=degenerate,
    )


def plan_mask(schema: FeatureSchema, features, decay_rate: float) -> AttentionMask:
    indices = [schema.index_of(name) for name in features]
    return AttentionMask.decay(schema.m, indices, decay_rate)


def apply_mitigation(model: AttentionClassifier, schema: FeatureSchema,
                     samples: list[EncodedSample], plan: MitigationPlan,
                     threshold: float = 0.5) -> np.ndarray:
    """Predictions with the plan's decay applied; pure post-processing."""
    mask = plan_mask(schema, plan.unfair_features, plan.decay_rate)
    return predict(model, samples, mask, threshold=threshold)


def _aggregate(decay: float, accs: list[float], mets: list[float | None]) -> TradeoffPoint:
    usable = [m for m in mets if m is not None]
    if not usable:
        raise DataError(f"metric undefined for every seed at decay {decay}")
    return TradeoffPoint(
        decay_rate=decay,
        acc_mean=float(np.mean(accs)),
        acc_std=float(np.std(accs)),
        metric_mean=float(np.mean(usable)),
        metric_std=float(np.std(usable)),
        n_seeds=len(usable),
        acc_by_seed=tuple(accs),
        metric_by_seed=tuple(mets),
    )


def sweep_tradeoff(schema: FeatureSchema, train_samples: list[EncodedSample],
                   val_samples: list[EncodedSample], test_samples: list[EncodedSample],
                   base_config: TrainConfig, metric_kind: str, decays, seeds,
                   *, threshold: float = 0.0,
                   max_workers: int | None = None) -> TradeoffCurve:
    """Train one model per seed, identify its unfair set on validation
    data, then evaluate (accuracy, metric) on test data at every decay.

    A decay of 1.0 is the untouched baseline; the grid is evaluated in
    descending order. Seeds whose training diverges are dropped and
    recorded on the curve.
    """
    decays = sorted({float(d) for d in decays}, reverse=True)
    if not decays:
        raise DataError("need at least one decay rate")
    if any(d < 0 or d > 1 for d in decays):
        raise DataError("decay rates must lie in [0, 1]")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise DataError("need at least one seed")

    _, y_test, g_test = stack_samples(test_samples)

    def run_seed(seed: int):
        config = replace(base_config, seed=seed)
        model = train(schema, train_samples, config)
        ident = identify_unfair_features(model, schema, val_samples, metric_kind,
                                         threshold=threshold)
        per_decay = []
        for d in decays:
            mask = plan_mask(schema, ident.features, d)
            y_hat = predict(model, test_samples, mask)
            gp = GroupedPredictions(y_hat, y_test, g_test)
            per_decay.append((accuracy(gp), metric_or_none(metric_kind, gp)))
        return ident.features, per_decay

    results: dict[int, tuple] = {}
    dropped: list[int] = []
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {seed: pool.submit(run_seed, seed) for seed in seeds}
            for seed in seeds:
                try:
                    results[seed] = futures[seed].result()
                except TrainingDivergedError:
                    dropped.append(seed)
    else:
        for seed in seeds:
            try:
                results[seed] = run_seed(seed)
            except TrainingDivergedError:
                dropped.append(seed)
    if not results:
        raise TrainingDivergedError(-1, "training diverged for every seed in the sweep")

    kept = [s for s in seeds if s in results]
    points = []
    for j, d in enumerate(decays):
        accs = [results[s][1][j][0] for s in kept]
        mets = [results[s][1][j][1] for s in kept]
        points.append(_aggregate(d, accs, mets))
    return TradeoffCurve(
        metric_kind=metric_kind,
        points=tuple(points),
        seeds=tuple(kept),
        dropped_seeds=tuple(dropped),
        unfair_sets={s: results[s][0] for s in kept},
    )


def select_by_constraint(curve: TradeoffCurve, max_metric: float) -> TradeoffPoint:
    """Highest-mean-accuracy point whose metric mean satisfies the bound."""
    feasible = [p for p in curve.points if p.metric_mean <= max_metric]
    if not feasible:
        raise ConstraintInfeasibleError(
            f"no point on the curve has {curve.metric_kind} mean <= {max_metric}")
    return max(feasible, key=lambda p: p.acc_mean)


def curve_to_csv(curve: TradeoffCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["d_r", "acc_mean", "acc_std", "metric_mean", "metric_std", "n_seeds"])
    for p in curve.points:
        writer.writerow([repr(p.decay_rate), repr(p.acc_mean), repr(p.acc_std),
                         repr(p.metric_mean), repr(p.metric_std), p.n_seeds])
    return buf.getvalue()


def curve_to_dict(curve: TradeoffCurve) -> dict:
    return {
        "metric_kind": curve.metric_kind,
        "seeds": list(curve.seeds),
        "dropped_seeds": list(curve.dropped_seeds),
        "unfair_sets": {str(s): list(v) for s, v in curve.unfair_sets.items()},
        "points": [
            {
                "d_r": p.decay_rate,
                "acc_mean": p.acc_mean, "acc_std": p.acc_std,
                "metric_mean": p.metric_mean, "metric_std": p.metric_std,
                "n_seeds": p.n_seeds,
                "acc_by_seed": list(p.acc_by_seed),
                "metric_by_seed": list(p.metric_by_seed),
            }
            for p in curve.points
        ],
    }


def curve_from_dict(doc: dict) -> TradeoffCurve:
    points = tuple(
        TradeoffPoint(
            decay_rate=p["d_r"], acc_mean=p["acc_mean"], acc_std=p["acc_std"],
            metric_mean=p["metric_mean"], metric_std=p["metric_std"],
            n_seeds=p["n_seeds"], acc_by_seed=tuple(p["acc_by_seed"]),
            metric_by_seed=tuple(p["metric_by_seed"]),
        )
        for p in doc["points"]
    )
    return TradeoffCurve(
        metric_kind=doc["metric_kind"],
        points=points,
        seeds=tuple(doc["seeds"]),
        dropped_seeds=tuple(doc["dropped_seeds"]),
        unfair_sets={int(k): tuple(v) for k, v in doc["unfair_sets"].items()},
    )


def curve_to_json(curve: TradeoffCurve) -> str:
    return json.dumps(curve_to_dict(curve), indent=2) + "\n"
