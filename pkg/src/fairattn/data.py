"""Synthetic scenario generators, CSV ingestion, and seeded splitting.

Datasets are column-major and immutable: categorical columns hold strings,
continuous columns hold float64, labels are already binarized, and the
group index is assigned from the sensitive column over the whole dataset
(groups are observable metadata, not fitted state).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .errors import DataError
from .schema import CATEGORICAL, CONTINUOUS

DEFAULT_BINS = 10
DEFAULT_MISSING = ("?", "")


@dataclass(frozen=True)
class ColumnConfig:
    name: str
    kind: str
    bins: int | None = None  # continuous only; None means the loader default

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, CONTINUOUS):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL and self.bins is not None:
            raise DataError(f"column {self.name!r}: categorical column cannot set bins")
        if self.bins is not None and self.bins < 2:
            raise DataError(f"column {self.name!r}: bins must be >= 2")


@dataclass(frozen=True)
class SchemaConfig:
    """Declares how a tabular source maps onto features, label, and groups."""

    columns: tuple[ColumnConfig, ...]
    sensitive: str
    label_column: str
    label_mapping: dict[str, int]
    missing_values: tuple[str, ...] = DEFAULT_MISSING

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "missing_values", tuple(self.missing_values))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names in schema config")
        if self.label_column in names:
            raise DataError("label column must not be listed among feature columns")
        if not self.label_mapping:
            raise DataError("label mapping must not be empty")
        if set(self.label_mapping.values()) - {0, 1}:
            raise DataError("label mapping values must be 0 or 1")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def sensitive_is_feature(self) -> bool:
        return self.sensitive in self.feature_names

    def column(self, name: str) -> ColumnConfig:
        for c in self.columns:
            if c.name == name:
                return c
        raise DataError(f"unknown column {name!r}")

    def to_dict(self) -> dict:
        return {
            "columns": [
                {"name": c.name, "kind": c.kind, **({"bins": c.bins} if c.bins is not None else {})}
                for c in self.columns
            ],
            "sensitive": self.sensitive,
            "label_column": self.label_column,
            "label_mapping": dict(self.label_mapping),
            "missing_values": list(self.missing_values),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SchemaConfig":
        try:
            cols = tuple(
                ColumnConfig(name=c["name"], kind=c["kind"], bins=c.get("bins"))
                for c in d["columns"]
            )
            return cls(
                columns=cols,
                sensitive=d["sensitive"],
                label_column=d["label_column"],
                label_mapping={str(k): int(v) for k, v in d["label_mapping"].items()},
                missing_values=tuple(d.get("missing_values", DEFAULT_MISSING)),
            )
        except KeyError as e:
            raise DataError(f"schema config missing key: {e}") from e

    @classmethod
    def from_json_file(cls, path) -> "SchemaConfig":
        path = Path(path)
        if not path.exists():
            raise DataError(f"schema config not found: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise DataError(f"schema config {path} is not valid JSON: {e}") from e

    def to_json_file(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SyntheticSpec:
    scenario: int
    n: int
    seed: int

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise DataError(f"scenario must be 1 or 2, got {self.scenario}")
        if self.n < 1:
            raise DataError("n must be >= 1")


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise DataError("split needs three positive fractions")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(self.fractions)}")


@dataclass(frozen=True)
class Dataset:
    config: SchemaConfig
    columns: dict[str, np.ndarray] = field(repr=False)
    labels: np.ndarray = field(repr=False)
    groups: np.ndarray = field(repr=False)
    group_names: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_groups(self) -> int:
        return len(self.group_names)

    def subset(self, indices: np.ndarray) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            config=self.config,
            columns={k: v[indices] for k, v in self.columns.items()},
            labels=self.labels[indices],
            groups=self.groups[indices],
            group_names=self.group_names,
        )


def _assemble(config: SchemaConfig, columns: dict[str, np.ndarray], labels: np.ndarray) -> Dataset:
    sensitive_raw = columns[config.sensitive]
    if config.sensitive_is_feature and config.column(config.sensitive).kind != CATEGORICAL:
        raise DataError("sensitive feature must be categorical")
    group_names = tuple(str(v) for v in np.unique(sensitive_raw))
    lookup = {name: i for i, name in enumerate(group_names)}
    groups = np.asarray([lookup[str(v)] for v in sensitive_raw], dtype=np.int64)
    feature_cols = {c.name: columns[c.name] for c in config.columns}
    if not config.sensitive_is_feature:
        feature_cols[config.sensitive] = columns[config.sensitive]
    return Dataset(
        config=config,
        columns=feature_cols,
        labels=np.asarray(labels, dtype=np.int64),
        groups=groups,
        group_names=group_names,
    )


def scenario_schema_config(bins: int = DEFAULT_BINS) -> SchemaConfig:
    """Shared layout of both synthetic scenarios: f1, f2 binary, f3 continuous."""
    return SchemaConfig(
        columns=(
            ColumnConfig("f1", CATEGORICAL),
            ColumnConfig("f2", CATEGORICAL),
            ColumnConfig("f3", CONTINUOUS, bins=bins),
        ),
        sensitive="f1",
        label_column="label",
        label_mapping={"0": 0, "1": 1},
    )


def generate_scenario1(spec: SyntheticSpec, bins: int = DEFAULT_BINS) -> Dataset:
    """Skewed-sensitive scenario: f1~Ber(0.9) independent of everything,
    f2~Ber(0.5) drives the label (0.9/0.1), f3~N(0,1) irrelevant."""
    if spec.scenario != 1:
        raise DataError(f"expected scenario 1 spec, got {spec.scenario}")
    gen = rng.substream(spec.seed, rng.DATA_STREAM)
    n = spec.n
    f1 = (gen.random(n) < 0.9).astype(np.int64)
    f2 = (gen.random(n) < 0.5).astype(np.int64)
    f3 = gen.standard_normal(n)
    y = (gen.random(n) < np.where(f2 == 1, 0.9, 0.1)).astype(np.int64)
    cols = {
        "f1": f1.astype(str),
        "f2": f2.astype(str),
        "f3": f3.astype(np.float64),
    }
    return _assemble(scenario_schema_config(bins), cols, y)


def generate_scenario2(spec: SyntheticSpec, bins: int = DEFAULT_BINS) -> Dataset:
    """Indirect-discrimination scenario: f2~Ber(0.5) drives both the label
    (0.7/0.3) and the sensitive f1 (0.9/0.1); f3~N(0,1) irrelevant."""
    if spec.scenario != 2:
        raise DataError(f"expected scenario 2 spec, got {spec.scenario}")
    gen = rng.substream(spec.seed, rng.DATA_STREAM)
    n = spec.n
    f2 = (gen.random(n) < 0.5).astype(np.int64)
    f1 = (gen.random(n) < np.where(f2 == 1, 0.9, 0.1)).astype(np.int64)
    f3 = gen.standard_normal(n)
    y = (gen.random(n) < np.where(f2 == 1, 0.7, 0.3)).astype(np.int64)
    cols = {
        "f1": f1.astype(str),
        "f2": f2.astype(str),
        "f3": f3.astype(np.float64),
    }
    return _assemble(scenario_schema_config(bins), cols, y)


def generate(spec: SyntheticSpec, bins: int = DEFAULT_BINS) -> Dataset:
    return generate_scenario1(spec, bins) if spec.scenario == 1 else generate_scenario2(spec, bins)


def _fmt_float(v: float) -> str:
    # repr of a Python float round-trips exactly through float()
    return repr(float(v))


def export_csv(dataset: Dataset, csv_path, config_path=None) -> None:
    """Write the dataset as a header CSV; reloading with the paired config
    (written when `config_path` is given) reproduces identical samples."""
    cfg = dataset.config
    header = list(cfg.feature_names)
    if not cfg.sensitive_is_feature:
        header.append(cfg.sensitive)
    header.append(cfg.label_column)
    kinds = {c.name: c.kind for c in cfg.columns}
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        label_strings = dataset.labels.astype(str)
        cols = []
        for name in header[:-1]:
            raw = dataset.columns[name]
            if kinds.get(name, CATEGORICAL) == CONTINUOUS:
                cols.append([_fmt_float(v) for v in raw])
            else:
                cols.append([str(v) for v in raw])
        cols.append(list(label_strings))
        for row in zip(*cols):
            writer.writerow(row)
    if config_path is not None:
        # exported labels are already 0/1, so pair with an identity mapping
        exported = SchemaConfig(
            columns=cfg.columns,
            sensitive=cfg.sensitive,
            label_column=cfg.label_column,
            label_mapping={"0": 0, "1": 1},
            missing_values=cfg.missing_values,
        )
        exported.to_json_file(config_path)


def load_csv(path, config: SchemaConfig) -> Dataset:
    """Load a header CSV into a typed Dataset.

    Rows containing a configured missing marker are dropped; any other
    malformed cell is an error reported with its 1-based data row index.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        col_idx = {}
        needed = list(config.feature_names) + [config.label_column]
        if not config.sensitive_is_feature:
            needed.insert(-1, config.sensitive)
        for name in needed:
            if name not in header:
                raise DataError(f"{path}: missing column {name!r}")
            col_idx[name] = header.index(name)
        missing = set(config.missing_values)
        kinds = {c.name: c.kind for c in config.columns}
        raw_cols: dict[str, list] = {name: [] for name in needed[:-1]}
        labels: list[int] = []
        n_dropped = 0
        for i, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(f"{path}: row {i}: expected {len(header)} cells, got {len(row)}")
            cells = {name: row[idx].strip() for name, idx in col_idx.items()}
            if any(cells[name] in missing for name in needed):
                n_dropped += 1
                continue
            label_raw = cells[config.label_column]
            if label_raw not in config.label_mapping:
                raise DataError(f"{path}: row {i}: label {label_raw!r} outside mapping")
            parsed = {}
            for name in needed[:-1]:
                if kinds.get(name, CATEGORICAL) == CONTINUOUS:
                    try:
                        v = float(cells[name])
                    except ValueError:
                        raise DataError(f"{path}: row {i}: cannot parse {name}={cells[name]!r} as number") from None
                    if not np.isfinite(v):
                        raise DataError(f"{path}: row {i}: non-finite value for {name}")
                    parsed[name] = v
                else:
                    parsed[name] = cells[name]
            for name, v in parsed.items():
                raw_cols[name].append(v)
            labels.append(config.label_mapping[label_raw])
    if not labels:
        raise DataError(f"{path}: no usable rows ({n_dropped} dropped)")
    columns = {}
    for name, values in raw_cols.items():
        if kinds.get(name, CATEGORICAL) == CONTINUOUS:
            columns[name] = np.asarray(values, dtype=np.float64)
        else:
            columns[name] = np.asarray(values, dtype=str)
    return _assemble(config, columns, np.asarray(labels, dtype=np.int64))


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint, exhaustive, seed-deterministic index split."""
    if n < 3:
        raise DataError("need at least 3 rows to split")
    perm = rng.substream(spec.seed, rng.SPLIT_STREAM).permutation(n)
    n_train = int(n * spec.fractions[0])
    n_val = int(n * spec.fractions[1])
    if n_train == 0 or n_val == 0 or n_train + n_val >= n:
        raise DataError(f"split fractions {spec.fractions} degenerate for n={n}")
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    tr, va, te = split_indices(dataset.n, spec)
    return dataset.subset(tr), dataset.subset(va), dataset.subset(te)
