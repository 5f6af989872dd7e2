"""Exception hierarchy shared by every module of the package."""


class LieDeconvError(Exception):
    """Base class for all errors raised by liedeconv."""


class GroupMismatchError(LieDeconvError, ValueError):
    """Operands live on different groups."""


class GridResolutionError(LieDeconvError, ValueError):
    """Quadrature grid too coarse for the requested spectral cutoff."""


class IllConditionedError(LieDeconvError, ArithmeticError):
    """A kernel coefficient is singular or too badly conditioned to invert.

    ``irrep`` names the offending representation and ``condition`` its
    condition number (``inf`` for an exactly singular block).
    """

    def __init__(self, message, irrep=None, condition=None):
        super().__init__(message)
        self.irrep = irrep
        self.condition = condition


class SamplerError(LieDeconvError, RuntimeError):
    """Rejection sampling could not make progress."""


class ConfigError(LieDeconvError, ValueError):
    """Invalid experiment or estimator configuration."""
