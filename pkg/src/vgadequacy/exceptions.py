"""Exception types. The CLI maps each family to its own exit code."""


class AdequacyError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(AdequacyError, ValueError):
    exit_code = 2


class DataError(AdequacyError, ValueError):
    exit_code = 3


class NumericalError(AdequacyError, ArithmeticError):
    exit_code = 4
