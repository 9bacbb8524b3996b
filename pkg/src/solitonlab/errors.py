"""Exception hierarchy shared across the package."""


class SolitonLabError(Exception):
    """Base class for every error raised by solitonlab."""


class DomainError(SolitonLabError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(SolitonLabError, ValueError):
    """Invalid physical or numerical parameter."""


class ResolutionError(SolitonLabError, ValueError):
    """Grid too coarse (or box too small) for the requested object."""

    def __init__(self, message, required_dx=None):
        super().__init__(message)
        self.required_dx = required_dx


class ConvergenceError(SolitonLabError, RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class AdmissibilityError(SolitonLabError, ValueError):
    """Initial datum outside the admissible set B_{eps,M}."""


class BlowUpError(SolitonLabError, RuntimeError):
    def __init__(self, t):
        super().__init__(f"non-finite samples at t={t:.6g}")
        self.t = t


class DegenerateDecomposition(SolitonLabError, RuntimeError):
    """The cutoff vanishes identically: the soliton has dispersed."""


class InsufficientDataError(SolitonLabError, ValueError):
    pass


class AlignmentError(SolitonLabError, ValueError):
    pass


class CorruptionError(SolitonLabError, IOError):
    pass


class UnsupportedVersionError(SolitonLabError, IOError):
    pass


class ResourceError(SolitonLabError, RuntimeError):
    pass


class ConfigError(SolitonLabError, ValueError):
    """Configuration rejected; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))
