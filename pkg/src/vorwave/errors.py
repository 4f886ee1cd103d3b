"""Exception types shared across the package."""


class VorwaveError(Exception):
    """Base class for all package errors."""


class ConfigError(VorwaveError):
    """Invalid or unparseable run configuration (CLI exit code 2)."""


class InputError(VorwaveError):
    """Invalid argument to a library routine: bad domain, bad shape."""


class SolverError(VorwaveError):
    """Base class for numerical failures (CLI exit code 3)."""


class StagnationError(SolverError):
    """A height field violates h_p > 0 (equivalently u < 0) where required."""


class StagnationApproachError(SolverError):
    """Newton line search exhausted while blocked by the h_p floor."""


class NoConvergenceError(SolverError):
    """Newton iteration exceeded its iteration budget."""


class BifurcationNotFoundError(SolverError):
    """No sign change of the transverse-mode indicator in the scanned range."""


class NumericsError(SolverError):
    """Quadrature or bracketing failed to reach the requested tolerance."""
