"""Exception types raised across the package."""


class FluxCoupleError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(FluxCoupleError, ValueError):
    pass


class NoConvergence(FluxCoupleError, RuntimeError):
    def __init__(self, iterations, message=None):
        self.iterations = iterations
        super().__init__(message or f"eigensolver did not converge after {iterations} iterations")


class SingularNetwork(FluxCoupleError, ValueError):
    pass


class NonIntegerWinding(FluxCoupleError, ValueError):
    pass


class CutoffTooSmall(FluxCoupleError, ValueError):
    pass


class DegenerateQubit(FluxCoupleError, ValueError):
    pass


class DegenerateSpectrum(FluxCoupleError, ValueError):
    pass


class SubspaceMismatch(FluxCoupleError, ValueError):
    def __init__(self, min_singular, message=None):
        self.min_singular = min_singular
        super().__init__(
            message
            or f"qubit subspace lost: smallest overlap singular value {min_singular:.3e}"
        )


class InsufficientExcitedBasis(FluxCoupleError, RuntimeError):
    pass


class DimensionMismatch(FluxCoupleError, ValueError):
    pass


class OutOfRegime(FluxCoupleError, ValueError):
    pass


class ConfigError(FluxCoupleError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ValidationError(ConfigError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class PhaseInstability(UserWarning):
    """Emitted when a Pauli coefficient flips sign between adjacent sweep points."""
