"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`CVQSSError`.
The CLI maps the three families below onto its exit codes.
"""


class CVQSSError(Exception):
    """Base class for all package errors."""


class ConfigError(CVQSSError, ValueError):
    """Malformed protocol configuration or argument (CLI exit code 2)."""


class NumericError(CVQSSError, ValueError):
    """Numerical or physicality problem (CLI exit code 3)."""


class ValidationFailure(CVQSSError):
    """A Monte-Carlo cross-check disagreed with the analytic value (exit code 4)."""


class InvalidParameterError(ConfigError):
    pass


class InvalidArgumentError(ConfigError):
    pass


class InvalidSequenceError(ConfigError):
    pass


class IncompatibleRecipeError(ConfigError):
    pass


class UnphysicalStateError(NumericError):
    pass


class DegenerateRecipeError(NumericError):
    pass


class DegenerateCorrelationError(NumericError):
    pass


class StandardizationError(NumericError):
    pass


class NoEntanglementError(NumericError):
    pass


class InsufficientDataError(NumericError):
    pass


class InconsistencyError(NumericError):
    pass
