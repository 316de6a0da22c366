"""Exception types shared across the package."""


class SurvnetError(Exception):
    """Base class for all survnet errors."""


class SchemaError(SurvnetError):
    """A required column, field or file section is missing or malformed."""


class ValidationError(SurvnetError):
    """Input violates a contract: bad value, bad shape, bad configuration."""


class NumericalError(SurvnetError):
    """A numerical failure, such as a non-finite loss during training."""


class MetricUndefinedError(SurvnetError):
    """The requested metric has no defined value on the given input."""
