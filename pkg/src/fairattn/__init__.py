"""Attention-based tabular classification with fairness attribution and
post-processing bias mitigation."""

__version__ = "0.1.0"

from .attribution import (AttributionEntry, AttributionReport, LocalAttribution,
                          attribute_global, attribute_local, rank_features)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import (Dataset, SchemaConfig, SplitSpec, SyntheticSpec, export_csv,
                   generate_scenario1, generate_scenario2, load_csv, split)
from .encoding import Encoder
from .errors import (ConstraintInfeasibleError, DataError, FairattnError,
                     TrainingDivergedError, UndefinedMetricError)
from .metrics import (METRIC_KINDS, GroupedPredictions, accuracy, eqodd, eqopp,
                      group_rate_table, spd)
from .mitigation import (MitigationPlan, TradeoffCurve, TradeoffPoint,
                         apply_mitigation, identify_unfair_features,
                         select_by_constraint, sweep_tradeoff)
from .model import (AttentionClassifier, AttentionMask, ForwardTrace, TrainConfig,
                    forward, loss_and_grad, predict, predict_proba, sgd_step, train)
from .schema import EncodedSample, FeatureSchema, FeatureSpec

__all__ = [
    "AttentionClassifier", "AttentionMask", "AttributionEntry", "AttributionReport",
    "Checkpoint", "ConstraintInfeasibleError", "DataError", "Dataset", "EncodedSample",
    "Encoder", "FairattnError", "FeatureSchema", "FeatureSpec", "ForwardTrace",
    "GroupedPredictions", "LocalAttribution", "METRIC_KINDS", "MitigationPlan",
    "SchemaConfig", "SplitSpec", "SyntheticSpec", "TradeoffCurve", "TradeoffPoint",
    "TrainConfig", "TrainingDivergedError", "UndefinedMetricError",
    "accuracy", "apply_mitigation", "attribute_global", "attribute_local",
    "eqodd", "eqopp", "export_csv", "forward", "generate_scenario1",
    "generate_scenario2", "group_rate_table", "identify_unfair_features",
    "load_checkpoint", "load_csv", "loss_and_grad", "predict", "predict_proba",
    "rank_features", "save_checkpoint", "select_by_constraint", "sgd_step",
    "spd", "split", "sweep_tradeoff", "train",
]
