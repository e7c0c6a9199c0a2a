"""Exception hierarchy shared by every module of the toolkit."""


class ContextualityError(Exception):
    """Base class for all toolkit errors."""


class InvalidStats(ContextualityError):
    """Moments that no two-variable joint distribution can reproduce."""


class InvalidDistribution(ContextualityError):
    """Probability vector with wrong length, large negative mass or bad normalization."""


class EmptyKeepSet(ContextualityError):
    pass


class MissingContext(ContextualityError):
    def __init__(self, context):
        self.context = tuple(context)
        super().__init__(f"no records for context {self.context}")


class MalformedRecord(ContextualityError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class InsufficientData(ContextualityError):
    pass


class SignalingInput(ContextualityError):
    """A joint-distribution question was asked of marginally inconsistent data."""


class EvenNegativeSigns(ContextualityError):
    pass


class DimensionMismatch(ContextualityError):
    pass


class NumericalBreakdown(ContextualityError):
    pass


class NonHermitian(ContextualityError):
    pass


class NotDichotomic(ContextualityError):
    pass


class InvalidState(ContextualityError):
    pass


class CrossCommutationViolated(ContextualityError):
    pass


class NotCommuting(ContextualityError):
    pass


class ConfigError(ContextualityError):
    pass
