"""Exception types shared across the package."""


class TsrgError(Exception):
    """Base class for all package errors."""


class DimensionError(TsrgError):
    """Shapes or dimensions of inputs do not line up."""


class NumericalError(TsrgError):
    """A numerical routine failed (e.g. factorization after jitter escalation)."""


class NonFiniteError(TsrgError):
    """An iterate or input contains NaN/Inf."""


class EmptyClassError(TsrgError):
    """A training class has no samples."""


class ClipTooSmall(TsrgError):
    """A video clip (or one of its blocks) is too small for the configured radius."""


class IngestionError(TsrgError):
    """A dataset manifest or feature file could not be ingested."""


class EmptyDatasetError(IngestionError):
    """Manifest resolved to zero samples."""


class LabelMapError(TsrgError):
    """A label has no mapping and no drop policy."""


class SpecError(TsrgError):
    """A synthetic-data spec is invalid (e.g. singular shift matrix)."""
