"""Exception hierarchy.

The three branches map onto CLI exit codes: ConfigError -> 1,
DataError -> 2, ModelError -> 3.
"""

from __future__ import annotations


class DemandcastError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DemandcastError):
    """Invalid or inconsistent run configuration."""


class EmptySchedule(ConfigError):
    """The requested evaluation span cannot fit a single 91-day horizon."""


class DataError(DemandcastError):
    """Invalid input data."""


class MissingColumn(DataError):
    pass


class UnparseableDate(DataError):
    pass


class NegativeCount(DataError):
    pass


class DuplicateDate(DataError):
    pass


class GapInSeries(DataError):
    pass


class InsufficientHistory(DataError):
    """Series does not reach far enough back to resolve the longest lag."""


class MissingLag(DataError):
    """A lag offset could not be resolved from history or injected predictions."""

    def __init__(self, offset: int, message: str | None = None):
        self.offset = offset
        super().__init__(message or f"cannot resolve lag offset of {offset} days")


class ModelError(DemandcastError):
    """Model fitting or evaluation failure."""


class SingularDesign(ModelError):
    pass


class WeightsNotNormalized(ModelError):
    pass


class KTooLarge(ModelError):
    pass


class TooFewBases(ModelError):
    pass


class InsufficientRows(ModelError):
    pass


class TooManyFeatures(ModelError):
    pass


class DegenerateDifferential(ModelError):
    """Loss differential carries no information; the DM test is undefined."""


class DegenerateSamples(ModelError):
    """All local-surrogate sample weights are zero."""


class MissingCell(ModelError):
    """A model is missing a metric for a vintage required by ranking."""
