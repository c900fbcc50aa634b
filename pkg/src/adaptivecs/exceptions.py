"""Exception types raised across the package."""


class SingularMatrixError(ValueError):
    """Linear solve failed because the factorization found rank deficiency."""


class RecoveryError(RuntimeError):
    """L1 recovery could not produce a solution (infeasible or unbounded LP)."""


class DataFormatError(ValueError):
    """A dataset file does not match its declared binary or CSV layout."""


class ConfigError(ValueError):
    """An experiment configuration is missing, malformed, or inconsistent."""
