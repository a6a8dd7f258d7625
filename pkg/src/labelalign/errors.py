"""Exception hierarchy.

Two branches matter for the CLI: ``ConfigError`` (bad invocation or
scenario/config files, exit code 2) and ``DataError`` (bad or degenerate
data, exit code 3). Numeric preconditions raise ``DataError`` subclasses
because they are triggered by the data fed in, not by the configuration.
"""


class LabelAlignError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(LabelAlignError):
    """Invalid configuration: bad scenario spec, CLI arguments, parameters."""


class DataError(LabelAlignError):
    """Invalid or degenerate input data."""


class NonFiniteError(DataError):
    """Input contains NaN or Inf."""


class NotPositiveDefiniteError(DataError):
    """Matrix failed the positive-definiteness check."""


class EigFailureError(DataError):
    """Symmetric eigensolver did not converge (pathological input)."""


class DimMismatchError(DataError):
    """Operands have incompatible dimensions."""


class EmptyInputError(DataError):
    """Operation requires a nonempty collection."""


class InvalidBandError(ConfigError):
    """Band edges violate 0 < lo < hi < fs/2 or the order is not even."""


class WindowOutOfRangeError(DataError):
    """An epoch window falls outside the recording."""

    def __init__(self, message: str, event_index: int):
        super().__init__(message)
        self.event_index = event_index


class DegenerateCovarianceError(DataError):
    """Composite covariance is not SPD; spatial filtering is impossible."""


class CardinalityMismatchError(ConfigError):
    """Source and target label sets have different sizes."""


class MissingClassError(DataError):
    """A class required by the mapping has no trials or no mean."""

    def __init__(self, message: str, label):
        super().__init__(message)
        self.label = label


class UnknownLabelError(DataError):
    """A trial label has no alignment matrix."""


class KTooLargeError(ConfigError):
    """Requested more medoids than there are points."""


class SingularCovarianceError(DataError):
    """Pooled covariance is singular even after regularization."""


class ZeroVarianceError(DataError):
    """All paired differences are equal; the t statistic is undefined."""


class TooFewPointsError(ConfigError):
    """A curve needs at least two points."""


class BadMagicError(DataError):
    """Trial file does not start with the expected magic/version bytes."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


class TruncatedPayloadError(DataError):
    """Trial file payload is shorter than the header declares."""

    def __init__(self, message: str, offset: int, expected_size: int):
        super().__init__(message)
        self.offset = offset
        self.expected_size = expected_size


class NonFinitePayloadError(DataError):
    """Trial file payload contains a NaN or Inf value."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset
