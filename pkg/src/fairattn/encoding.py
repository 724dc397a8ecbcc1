"""Raw-value to embedding-row encoding, fitted on training data only.

Categorical vocabularies map each distinct training value to a stable
local id (sorted order, starting at 1; 0 is the reserved unknown id).
Continuous columns get quantile bin edges from the training values and
clamp out-of-range values into the edge bins.
"""
from __future__ import annotations

import numpy as np

from .data import DEFAULT_BINS, Dataset
from .errors import DataError
from .schema import CATEGORICAL, CONTINUOUS, EncodedSample, FeatureSchema, FeatureSpec


class Encoder:
    def __init__(self, schema: FeatureSchema, vocabs: dict[str, dict[str, int]],
                 edges: dict[str, np.ndarray]):
        self.schema = schema
        self.vocabs = vocabs
        self.edges = {k: np.asarray(v, dtype=np.float64) for k, v in edges.items()}

    @classmethod
    def fit(cls, dataset: Dataset, default_bins: int = DEFAULT_BINS) -> "Encoder":
        """Fit vocabularies and bin edges on `dataset` (pass the train split)."""
        cfg = dataset.config
        vocabs: dict[str, dict[str, int]] = {}
        edges: dict[str, np.ndarray] = {}
        specs = []
        for col in cfg.columns:
            values = dataset.columns[col.name]
            if col.kind == CATEGORICAL:
                vocab = {str(v): i + 1 for i, v in enumerate(np.unique(values))}
                if len(vocab) < 2:
                    raise DataError(f"feature {col.name!r} has fewer than 2 values in training data")
                vocabs[col.name] = vocab
                specs.append(FeatureSpec(
                    name=col.name, kind=CATEGORICAL, cardinality=len(vocab),
                    is_sensitive=(cfg.sensitive_is_feature and col.name == cfg.sensitive),
                ))
            else:
                bins = col.bins or default_bins
                qs = np.arange(1, bins) / bins
                edges[col.name] = np.quantile(values.astype(np.float64), qs)
                specs.append(FeatureSpec(name=col.name, kind=CONTINUOUS, bins=bins))
        schema = FeatureSchema(
            features=tuple(specs),
            external_sensitive=None if cfg.sensitive_is_feature else cfg.sensitive,
        )
        return cls(schema, vocabs, edges)

    def encode_arrays(self, dataset: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Encode a dataset to (ids, labels, groups) arrays."""
        if dataset.config.feature_names != tuple(f.name for f in self.schema.features):
            raise DataError("dataset columns do not match the fitted schema")
        n = dataset.n
        ids = np.empty((n, self.schema.m), dtype=np.int64)
        for k, spec in enumerate(self.schema.features):
            offset = self.schema.block_offsets[k]
            raw = dataset.columns[spec.name]
            if spec.kind == CATEGORICAL:
                vocab = self.vocabs[spec.name]
                local = np.asarray([vocab.get(str(v), 0) for v in raw], dtype=np.int64)
            else:
                local = np.searchsorted(self.edges[spec.name], raw.astype(np.float64), side="right")
            ids[:, k] = offset + local
        return ids, dataset.labels.copy(), dataset.groups.copy()

    def encode_dataset(self, dataset: Dataset) -> list[EncodedSample]:
        ids, y, g = self.encode_arrays(dataset)
        return [
            EncodedSample(entity_ids=tuple(int(e) for e in ids[i]), label=int(y[i]), group=int(g[i]))
            for i in range(len(y))
        ]

    def state_dict(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "vocabs": {k: dict(v) for k, v in self.vocabs.items()},
            "edges": {k: [float(x) for x in v] for k, v in self.edges.items()},
        }

    @classmethod
    def from_state(cls, state: dict) -> "Encoder":
        schema = FeatureSchema.from_dict(state["schema"])
        return cls(
            schema,
            {k: {str(kk): int(vv) for kk, vv in v.items()} for k, v in state["vocabs"].items()},
            {k: np.asarray(v, dtype=np.float64) for k, v in state["edges"].items()},
        )
