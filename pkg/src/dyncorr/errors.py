"""Exception hierarchy shared by all dyncorr modules."""


class DyncorrError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(DyncorrError, ValueError):
    pass


class NoConvergence(DyncorrError, ArithmeticError):
    pass


class BadSubsystemIndex(DyncorrError, IndexError):
    pass


class BadPermutation(DyncorrError, ValueError):
    pass


class BadDimension(DyncorrError, ValueError):
    pass


class DimensionMismatch(DyncorrError, ValueError):
    pass


class InvariantViolation(DyncorrError, ValueError):
    pass


class NotPositive(DyncorrError, ValueError):
    pass


class NotUnitary(DyncorrError, ValueError):
    pass


class AsymmetricDimensions(DyncorrError, ValueError):
    pass


class IntegrationError(DyncorrError, ArithmeticError):
    """Failure of the master-equation integrator.

    ``time`` is the evolution time at which the failure was detected; callers
    running sweeps attach their own parameter context via ``context``.
    """

    def __init__(self, message, time=None, context=None):
        super().__init__(message)
        self.time = time
        self.context = dict(context or {})

    def __str__(self):
        msg = super().__str__()
        extra = []
        if self.context:
            extra.append(", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                                   for k, v in self.context.items()))
        if self.time is not None:
            extra.append(f"t={self.time:g}")
        return f"{msg} ({'; '.join(extra)})" if extra else msg


class StepLimitExceeded(IntegrationError):
    pass


class TraceDrift(IntegrationError):
    pass


class PositivityLoss(IntegrationError):
    pass


class BracketFailure(DyncorrError, ValueError):
    def __init__(self, message, T=None):
        super().__init__(message)
        self.T = T
