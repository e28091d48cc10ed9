"""Exception hierarchy shared by the solver modules."""


class HSError(Exception):
    """Base class for all solver errors."""


class ValidationError(HSError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class UnknownFamily(HSError):
    pass


class OmegaFailure(HSError):
    """The zero set of C is not a finite set of points."""


class NonIntegrable(HSError):
    pass


class ToleranceNotMet(HSError):
    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


class OutOfRange(HSError):
    pass


class TailUncertain(HSError):
    def __init__(self, msg, lower, upper):
        super().__init__(msg)
        self.lower = lower
        self.upper = upper


class BlowupProximity(HSError):
    def __init__(self, msg, sign=None, rate=None):
        super().__init__(msg)
        self.sign = sign
        self.rate = rate


class SpecialCase(HSError):
    """Representation formulas do not apply (lambda == 0)."""


class HypothesisViolated(HSError):
    pass


class FitUnstable(HSError):
    def __init__(self, msg, table=None):
        super().__init__(msg)
        self.table = table


class StabilityViolation(HSError):
    pass


class Overflow(HSError):
    pass
