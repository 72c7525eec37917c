"""Exception hierarchy.

The CLI maps :class:`DataError` subclasses to exit code 3 and
:class:`MetricError` subclasses to exit code 4.
"""


class GranetError(Exception):
    pass


class DataError(GranetError, ValueError):
    """Input data is malformed or violates a structural invariant."""


class DimensionMismatchError(DataError):
    pass


class DegenerateInputError(DataError):
    pass


class InsufficientNodesError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(DataError):
    pass


class MetricError(GranetError, ValueError):
    """A metric cannot be evaluated or was configured incorrectly."""


class UndefinedMetricError(MetricError):
    pass


class ConfigError(MetricError):
    pass


class UnsupportedDimensionError(ConfigError):
    pass


class InvalidMergeError(MetricError):
    pass


class OracleSizeError(GranetError, ValueError):
    pass
