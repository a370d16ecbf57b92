"""Exception hierarchy.

Two families: :class:`DomainError` for malformed or out-of-range structural
input (bad trees, missing leaves, wrong depths), and :class:`RegimeError` for
numeric parameters outside the range where an operation is defined.  The CLI
maps them to exit codes 3 and 4.
"""


class TreePoissonError(Exception):
    """Base class for all library errors."""


class DomainError(TreePoissonError):
    pass


class CapacityError(DomainError):
    pass


class MalformedTreeError(DomainError):
    pass


class InteriorLeafError(MalformedTreeError):
    pass


class DepthError(DomainError):
    pass


class MissingLeafError(DomainError):
    pass


class NonRegularTreeError(DomainError):
    pass


class NotAntichainError(DomainError):
    pass


class FormatError(DomainError):
    """A file does not follow its documented text format."""


class RegimeError(TreePoissonError):
    pass


class ZeroParameterError(RegimeError):
    pass


class ForbiddenParameterError(RegimeError):
    """Raised for z with z**2 in {0, 1} where the inverse direction is undefined."""


class PowerOverflowError(RegimeError):
    pass


class NotEigenfunctionError(RegimeError):
    pass


class RegimeWarning(RuntimeWarning):
    """Emitted when a convergence guarantee does not apply but results are still returned."""
