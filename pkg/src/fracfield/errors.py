"""Exception hierarchy shared by every module."""


class FracfieldError(Exception):
    """Base class for all library errors."""


class DomainError(FracfieldError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(FracfieldError, ValueError):
    """Bad configuration file, unknown key, or unusable CLI invocation."""


class NumericError(FracfieldError, RuntimeError):
    """A numeric routine failed (factorization breakdown, non-convergence)."""


class IntegrityError(FracfieldError, RuntimeError):
    """A computed object violates a structural guarantee (e.g. PSD-ness)."""


class IllPosedError(DomainError):
    """A norm/inner product was requested against discarded modes."""


class IllConditionedModeError(DomainError):
    """Eigenfunction extension requested for a mode below the epsilon floor."""


class CoverageError(DomainError):
    """An increment evaluation point falls outside the sampled region."""


class ResolutionError(DomainError):
    """The evaluation grid has no point pairs at the requested offset."""
