"""Exception hierarchy shared by all modules."""


class DickeFluxError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameters(DickeFluxError, ValueError):
    """Model or run parameters violate a validity constraint."""


class NoRootInInterval(DickeFluxError):
    """A bracketing root search found no sign change."""


class NormalPhaseUnstable(DickeFluxError):
    """The normal-phase quadratic form is not positive definite."""


class DegenerateResolvent(DickeFluxError):
    """The quartic closed form hit a vanishing radicand."""


class OverCritical(DickeFluxError):
    """A Rabi-limit quantity was requested beyond its instability."""


class SingularCirculant(DickeFluxError):
    """A circulant system has a vanishing eigenvalue."""


class NonConvergence(DickeFluxError):
    """A local descent did not meet its stationarity tolerance.

    Attributes
    ----------
    best : object
        Best candidate found, usually a ``MeanFieldState`` with
        ``converged=False``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class MixedMagnitudes(DickeFluxError):
    """Some order parameters vanish while others do not."""


class UnconvergedState(DickeFluxError):
    """An operation received a mean-field state that did not converge."""


class NotPositiveDefinite(DickeFluxError):
    """A quadratic form expected to be positive definite is not."""


class PoorFit(DickeFluxError):
    """A power-law fit has insufficient quality.

    Attributes
    ----------
    fit : ScalingFit or None
        The rejected fit.
    """

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit
