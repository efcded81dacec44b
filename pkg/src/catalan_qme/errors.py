"""Exception hierarchy shared by all modules."""

import numpy as np


class CatalanQMEError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(CatalanQMEError, ValueError):
    pass


class DomainError(CatalanQMEError, ValueError):
    """Argument outside the region where a formula or series is valid."""


class SingularMatrixError(CatalanQMEError, np.linalg.LinAlgError):
    pass


class IllPosedError(CatalanQMEError, np.linalg.LinAlgError):
    """Linear matrix equation without a unique solution."""


class StrategyError(CatalanQMEError, ValueError):
    pass


class ConvergenceError(CatalanQMEError, RuntimeError):
    pass


class IntegrationError(ConvergenceError):
    pass


class SpectrumHitError(SingularMatrixError):
    """A resolvent was requested at a point of the spectrum."""
