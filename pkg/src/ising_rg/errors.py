"""Exception hierarchy shared by the library and the command line."""


class IsingRGError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(IsingRGError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 2


class UnsupportedRegimeError(DomainError):
    """The requested parameters are valid but not covered by a closed form (e.g. h != 0)."""


class ResourceError(IsingRGError, RuntimeError):
    """The request would exceed a size or budget cap."""

    exit_code = 3


class NumericError(IsingRGError, ArithmeticError):
    """A numerical routine failed or produced a result violating its contract."""

    exit_code = 4
