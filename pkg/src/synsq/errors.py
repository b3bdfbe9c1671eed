"""Exception hierarchy; each class maps to a CLI exit code."""


class SynsqError(Exception):
    exit_code = 3


class ParameterError(SynsqError, ValueError):
    """Invalid configuration value (exit code 1)."""

    exit_code = 1


class InputError(SynsqError, ValueError):
    """Malformed or mismatched input data (exit code 2)."""

    exit_code = 2


class InvariantError(SynsqError, RuntimeError):
    """An internal contract was violated (exit code 3)."""

    exit_code = 3
