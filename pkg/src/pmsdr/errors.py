"""Exception hierarchy shared by all pmsdr modules.

Two branches matter to callers: ``InputError`` for bad data or bad
configuration (the CLI maps these to exit code 2), and ``NumericError`` for
failures inside the numerics (divergence, singular systems; exit code 3).
"""


class PmsdrError(Exception):
    """Base class for all pmsdr errors."""


class InputError(PmsdrError):
    """Invalid data, configuration, or contract violation by the caller."""


class NumericError(PmsdrError):
    """Numerical failure inside an algorithm.

    ``module`` names the subsystem that failed so the CLI/service can report
    it without a traceback.
    """

    def __init__(self, message, module):
        super().__init__(message)
        self.module = module


class SingularMatrixError(NumericError):
    """A positive-definite solve hit a non-positive pivot.

    ``pivot`` is the 0-based index of the offending pivot.
    """

    def __init__(self, message, pivot, module="linalg"):
        super().__init__(message, module)
        self.pivot = pivot


class DivergenceError(NumericError):
    """The coordinatewise descent iterate became non-finite."""

    def __init__(self, message, eta, module="solver"):
        super().__init__(message, module)
        self.eta = eta


class DegenerateSliceError(InputError):
    """No usable slice survived slicing (or a first stream batch was one-sided)."""


class DegenerateBasisError(InputError):
    """The centered kernel matrix carried no usable spectrum."""


class ExpressionError(InputError):
    """A custom-loss expression failed to parse or evaluate."""
