"""Feature schemas and encoded samples shared by the data and model layers.

Each feature value is modeled as its own entity with an embedding row.
A feature owns a contiguous block of rows in the embedding table:
categorical blocks reserve local id 0 for unknown values seen only at
prediction time, continuous blocks hold one row per quantile bin.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class FeatureSpec:
    """One input feature: a categorical vocabulary or a binned continuous column."""

    name: str
    kind: str
    cardinality: int | None = None  # categorical: number of known values
    bins: int | None = None         # continuous: quantile bin count
    is_sensitive: bool = False

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, CONTINUOUS):
            raise DataError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if self.cardinality is None or self.cardinality < 2:
                raise DataError(f"feature {self.name!r}: categorical cardinality must be >= 2")
            if self.bins is not None:
                raise DataError(f"feature {self.name!r}: categorical feature cannot set bins")
        else:
            if self.bins is None or self.bins < 2:
                raise DataError(f"feature {self.name!r}: continuous bins must be >= 2")
            if self.cardinality is not None:
                raise DataError(f"feature {self.name!r}: continuous feature cannot set cardinality")

    @property
    def n_rows(self) -> int:
        """Embedding rows allotted to this feature's block."""
        if self.kind == CATEGORICAL:
            return self.cardinality + 1  # row 0 reserved for unknown values
        return self.bins


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature specs plus the sensitive-attribute designation.

    Exactly one feature is flagged sensitive, or `external_sensitive`
    names a group column that is not part of the model inputs.
    """

    features: tuple[FeatureSpec, ...]
    external_sensitive: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise DataError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        flagged = [f.name for f in self.features if f.is_sensitive]
        if self.external_sensitive is not None:
            if flagged:
                raise DataError("cannot combine an external sensitive column with a flagged feature")
            if self.external_sensitive in names:
                raise DataError("external sensitive column clashes with a feature name")
        elif len(flagged) != 1:
            raise DataError(f"exactly one feature must be sensitive, got {flagged or 'none'}")

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def sensitive_name(self) -> str:
        if self.external_sensitive is not None:
            return self.external_sensitive
        return next(f.name for f in self.features if f.is_sensitive)

    @property
    def block_offsets(self) -> tuple[int, ...]:
        offsets, total = [], 0
        for f in self.features:
            offsets.append(total)
            total += f.n_rows
        return tuple(offsets)

    @property
    def total_entities(self) -> int:
        return sum(f.n_rows for f in self.features)

    def index_of(self, name: str) -> int:
        for k, f in enumerate(self.features):
            if f.name == name:
                return k
        raise DataError(f"unknown feature {name!r}")

    def block_range(self, k: int) -> tuple[int, int]:
        lo = self.block_offsets[k]
        return lo, lo + self.features[k].n_rows

    def to_dict(self) -> dict:
        return {
            "features": [
                {
                    "name": f.name,
                    "kind": f.kind,
                    "cardinality": f.cardinality,
                    "bins": f.bins,
                    "is_sensitive": f.is_sensitive,
                }
                for f in self.features
            ],
            "external_sensitive": self.external_sensitive,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        feats = tuple(FeatureSpec(**f) for f in d["features"])
        return cls(features=feats, external_sensitive=d.get("external_sensitive"))

    def digest(self) -> str:
        """Stable content hash of the schema."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EncodedSample:
    """One row after encoding: a global embedding-row id per feature."""

    entity_ids: tuple[int, ...]
    label: int
    group: int


def validate_sample(schema: FeatureSchema, sample: EncodedSample) -> None:
    if len(sample.entity_ids) != schema.m:
        raise DataError(f"sample has {len(sample.entity_ids)} ids, schema expects {schema.m}")
    for k, eid in enumerate(sample.entity_ids):
        lo, hi = schema.block_range(k)
        if not lo <= eid < hi:
            raise DataError(
                f"entity id {eid} outside block [{lo},{hi}) of feature {schema.features[k].name!r}"
            )
    if sample.label not in (0, 1):
        raise DataError(f"label must be 0 or 1, got {sample.label}")
    if sample.group < 0:
        raise DataError(f"group index must be nonnegative, got {sample.group}")


def stack_samples(samples) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pack a list of EncodedSample into (ids, labels, groups) arrays."""
    if len(samples) == 0:
        raise DataError("empty sample list")
    ids = np.asarray([s.entity_ids for s in samples], dtype=np.int64)
    y = np.asarray([s.label for s in samples], dtype=np.int64)
    g = np.asarray([s.group for s in samples], dtype=np.int64)
    return ids, y, g
