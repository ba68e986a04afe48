"""Exception hierarchy shared by every module."""


class QNGError(Exception):
    """Base class for all library errors."""


class ShapeError(QNGError, ValueError):
    pass


class DegenerateInput(QNGError, ValueError):
    pass


class NumericsError(QNGError, ArithmeticError):
    pass


class TruncationError(QNGError):
    """Raised when a Fock cutoff cannot hold a state to the configured tolerance."""

    def __init__(self, message, required_cutoff=None):
        if required_cutoff is not None:
            message = f"{message} (try cutoff >= {required_cutoff})"
        super().__init__(message)
        self.required_cutoff = required_cutoff


class NotAnalytic(QNGError):
    pass


class GridError(QNGError):
    def __init__(self, message, suggested_half_width=None):
        if suggested_half_width is not None:
            message = f"{message} (suggested half_width {suggested_half_width:.3g})"
        super().__init__(message)
        self.suggested_half_width = suggested_half_width


class NormalizationError(QNGError, ValueError):
    pass


class SupportError(QNGError, ValueError):
    pass


class SampleSizeError(QNGError, ValueError):
    pass


class DomainError(QNGError, ValueError):
    pass


class NotAState(QNGError, ValueError):
    pass


class NotDistribution(QNGError, ValueError):
    pass


class NoThreshold(QNGError):
    """No sign change of the witness margin inside the swept range."""

    def __init__(self, message, detects):
        super().__init__(message)
        self.detects = detects


class SpecParseError(QNGError, ValueError):
    pass
