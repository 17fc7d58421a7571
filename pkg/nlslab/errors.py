"""Exception hierarchy shared by every nlslab module."""


class NlsLabError(Exception):
    """Base class for all nlslab errors."""


class GridMismatchError(NlsLabError, ValueError):
    """Operands live on different grids."""


class ConfigError(NlsLabError, ValueError):
    """Invalid, unknown or missing configuration key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalFailure(NlsLabError, ArithmeticError):
    """A computation produced non-finite values or hit a singular pairing."""


class ModulationFitError(NumericalFailure):
    """Newton iteration for the modulation parameters did not converge."""

    def __init__(self, message: str, residual: float, params=None):
        self.residual = residual
        self.params = params
        super().__init__(f"{message} (last residual {residual:.3e})")


class DecayFitError(NlsLabError, ValueError):
    """Log-log regression window holds nonpositive or too few samples."""
