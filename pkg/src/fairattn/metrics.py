"""Group fairness measures over binary predictions.

Every metric is the maximum absolute gap of an empirical rate over all
pairs of sensitive groups. Groups missing the required label stratum are
excluded from the pairwise max; if fewer than two usable groups remain
the metric is undefined and raises UndefinedMetricError.

All functions are pure in (y_hat, y, group) and safe to call concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, UndefinedMetricError

METRIC_KINDS = ("spd", "eqopp", "eqodd")


@dataclass(frozen=True)
class GroupedPredictions:
    y_hat: np.ndarray
    y: np.ndarray
    group: np.ndarray

    def __post_init__(self):
        yh = np.asarray(self.y_hat, dtype=np.int64)
        yy = np.asarray(self.y, dtype=np.int64)
        gg = np.asarray(self.group, dtype=np.int64)
        if not (len(yh) == len(yy) == len(gg)):
            raise DataError("y_hat, y, group must have equal length")
        if len(yh) == 0:
            raise DataError("empty predictions")
        for name, arr in (("y_hat", yh), ("y", yy)):
            if np.any((arr != 0) & (arr != 1)):
                raise DataError(f"{name} must be binary")
        if np.any(gg < 0):
            raise DataError("group indices must be nonnegative")
        object.__setattr__(self, "y_hat", yh)
        object.__setattr__(self, "y", yy)
        object.__setattr__(self, "group", gg)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def n_groups(self) -> int:
        return int(self.group.max()) + 1


@dataclass(frozen=True)
class GroupRates:
    group: int
    count: int
    base_rate: float | None  # P(y_hat=1 | group); None when the group is empty
    tpr: float | None        # None when the group has no positives
    fpr: float | None        # None when the group has no negatives


def _gap(rates: list[float], what: str) -> float:
    if len(rates) < 2:
        raise UndefinedMetricError(f"{what} needs at least two usable groups, got {len(rates)}")
    return float(max(rates) - min(rates))


def spd(gp: GroupedPredictions) -> float:
    """Statistical parity difference: max pairwise gap in positive rate."""
    rates = []
    for g in range(gp.n_groups):
        sel = gp.group == g
        if sel.any():
            rates.append(float(gp.y_hat[sel].mean()))
    return _gap(rates, "statistical parity")


def eqopp(gp: GroupedPredictions) -> float:
    """Equality of opportunity difference: max pairwise TPR gap."""
    rates = []
    for g in range(gp.n_groups):
        sel = (gp.group == g) & (gp.y == 1)
        if sel.any():
            rates.append(float(gp.y_hat[sel].mean()))
    return _gap(rates, "equality of opportunity")


def eqodd(gp: GroupedPredictions) -> float:
    """Equalized odds difference: max of the TPR gap and the FPR gap."""
    gaps = []
    for label in (0, 1):
        rates = []
        for g in range(gp.n_groups):
            sel = (gp.group == g) & (gp.y == label)
            if sel.any():
                rates.append(float(gp.y_hat[sel].mean()))
        if len(rates) >= 2:
            gaps.append(max(rates) - min(rates))
    if not gaps:
        raise UndefinedMetricError("equalized odds needs two usable groups in some label stratum")
    return float(max(gaps))


def accuracy(gp: GroupedPredictions) -> float:
    return float((gp.y_hat == gp.y).mean())


def group_rate_table(gp: GroupedPredictions) -> tuple[GroupRates, ...]:
    """Per-group empirical rates; missing strata are None, never NaN."""
    rows = []
    for g in range(gp.n_groups):
        sel = gp.group == g
        count = int(sel.sum())
        base = float(gp.y_hat[sel].mean()) if count else None
        pos = sel & (gp.y == 1)
        neg = sel & (gp.y == 0)
        tpr = float(gp.y_hat[pos].mean()) if pos.any() else None
        fpr = float(gp.y_hat[neg].mean()) if neg.any() else None
        rows.append(GroupRates(group=g, count=count, base_rate=base, tpr=tpr, fpr=fpr))
    return tuple(rows)


_METRIC_FNS = {"spd": spd, "eqopp": eqopp, "eqodd": eqodd}


def metric_fn(kind: str):
    try:
        return _METRIC_FNS[kind]
    except KeyError:
        raise DataError(f"unknown metric kind {kind!r}; expected one of {METRIC_KINDS}") from None


def metric_or_none(kind: str, gp: GroupedPredictions) -> float | None:
    """Metric value, or None where it is undefined."""
    try:
        return metric_fn(kind)(gp)
    except UndefinedMetricError:
        return None
