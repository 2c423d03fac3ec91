"""Exception hierarchy shared by every module of the package."""


class ParadiffError(Exception):
    """Base class for all package errors."""


class DimensionError(ParadiffError, ValueError):
    """Truncation orders or array shapes do not match."""


class UnsupportedOrderError(ParadiffError, ValueError):
    """A derivative or seminorm order beyond what is implemented."""


class EllipticityError(ParadiffError):
    """The second z1-derivative of the density is not bounded below by a positive constant."""


class StabilityError(ParadiffError):
    """An explicit time step exceeds the stability cap.

    ``suggested_h`` carries the largest admissible step.
    """

    def __init__(self, message, suggested_h=None):
        super().__init__(message)
        self.suggested_h = suggested_h


class NonconvergenceError(ParadiffError):
    """The quasilinear iteration did not contract, even after shrinking the time horizon."""

    def __init__(self, message, ledger=None):
        super().__init__(message)
        self.ledger = ledger


class ConfigError(ParadiffError, ValueError):
    """Invalid experiment configuration."""
