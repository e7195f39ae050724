"""Exception hierarchy.

Domain errors (bad input, inapplicable construction) and numeric errors
(accuracy or convergence failures) are kept apart so the command line can
map them onto distinct exit codes.
"""


class HillError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HillError):
    """Input outside the domain where an operation is defined."""


class NumericError(HillError):
    """A numerical procedure failed to reach its accuracy target."""


class ParseError(DomainError):
    pass


class FormatError(DomainError):
    pass


class CoefficientError(DomainError):
    pass


class GrowthError(NumericError):
    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class AccuracyError(NumericError):
    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class NoDecayingSolutionError(DomainError):
    pass


class PositivityError(DomainError):
    pass


class DecayMarginError(DomainError):
    pass


class RadicandError(DomainError):
    def __init__(self, message, z=()):
        super().__init__(message)
        self.z = list(z)


class RegimeError(DomainError):
    pass


class TrackingError(DomainError):
    def __init__(self, message, epsilon=None):
        super().__init__(message)
        self.epsilon = epsilon


class ConsistencyError(NumericError):
    pass
