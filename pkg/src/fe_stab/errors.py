"""Exception hierarchy shared by every module of the package."""


class FEStabError(Exception):
    """Base class for all errors raised by fe_stab."""


class ModeMismatch(FEStabError):
    """Exact and floating scalars were mixed, or exact evaluation was
    requested from a model that cannot provide it."""


class OutOfDomain(FEStabError):
    """A point falls outside the domain on which a model is defined."""


class TabulatedMiss(OutOfDomain, KeyError):
    """A tabulated model was queried at a point it does not store."""

    def __str__(self):
        return Exception.__str__(self)


class AsymmetricGrid(FEStabError):
    pass


class BadRange(FEStabError):
    pass


class DomainError(FEStabError):
    """A control function was evaluated where a negative power of zero
    would be required."""


class InadmissibleControl(FEStabError):
    """No iteration direction makes the stability series converge."""


class DivergentSeries(FEStabError):
    pass


class NotAnchored(FEStabError):
    """The model does not vanish at the origin."""


class NotASolution(FEStabError):
    pass


class ConvergenceError(FEStabError):
    """Base for failures of the direct-method iteration.

    ``diagnostics`` carries the partial iteration record so callers can
    still report what was observed before giving up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class Diverged(ConvergenceError):
    pass


class Stalled(ConvergenceError):
    pass


class ConfigError(FEStabError):
    """Invalid command-line configuration (maps to exit code 2)."""
