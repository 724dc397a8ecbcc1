"""Exception types shared across the package."""


class FairattnError(Exception):
    """Base class for all package errors."""


class DataError(FairattnError):
    """Malformed input data, schema configuration, or file contents."""


class UndefinedMetricError(FairattnError):
    """A fairness metric has no value on the given predictions,
    e.g. fewer than two groups carry the required label stratum."""


class TrainingDivergedError(FairattnError):
    """Training produced a non-finite loss or parameters."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class ConstraintInfeasibleError(FairattnError):
    """No trade-off point satisfies the requested fairness constraint."""
