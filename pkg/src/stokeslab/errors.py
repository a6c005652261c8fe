"""Exception types shared across the lab."""


class LabError(Exception):
    """Base class for all stokeslab errors."""


class InvalidSpecError(LabError):
    """A domain / hole / perforation description violates its invariants."""


class GradingError(LabError):
    """Mesh grading cannot be realized for the requested parameters."""


class CompatibilityError(LabError):
    """Divergence data incompatible with the boundary flux.

    Carries the measured mismatch in ``mismatch``.
    """

    def __init__(self, message, mismatch=None):
        super().__init__(message)
        self.mismatch = mismatch


class SolverError(LabError):
    """Direct factorization or linear solve failed."""


class FieldEvalError(LabError):
    """A field was evaluated outside its declared domain or layout."""


class ConfigError(LabError):
    """Experiment configuration is malformed or semantically invalid."""


class DegenerateSourceError(LabError):
    """The reference solution vanishes at the origin; blow-up runs would be vacuous."""


class UndefinedRatioError(LabError):
    """Estimate ratio requested with a zero-norm source."""
