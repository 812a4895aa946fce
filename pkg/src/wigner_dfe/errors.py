"""Exception hierarchy mapped to CLI exit codes."""


class WignerDfeError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(WignerDfeError):
    """Bad input: broken invariant, out-of-range value, malformed config."""

    exit_code = 2


class ResourceError(WignerDfeError):
    """Work refused: enumeration cap or sample budget exceeded."""

    exit_code = 3


class NumericalError(WignerDfeError):
    """A quantity that should be structurally exact drifted past tolerance."""

    exit_code = 4
