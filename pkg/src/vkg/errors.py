"""Exception hierarchy shared by every vkg module."""


class VKGError(Exception):
    """Base class for all errors raised by vkg."""


class DegenerateSymbol(VKGError):
    """Spectral projections requested too close to the eigenvalue collision."""


class ScanFailed(VKGError):
    """No positive decay rate admits a bounded constant on the scanned grid."""


class GridTooCoarse(VKGError):
    pass


class OutOfSupport(VKGError):
    """A normal-form kernel was evaluated outside the critical band."""


class RankDeficientFit(VKGError):
    pass


class BadInitialData(VKGError):
    pass


class Overflow(VKGError):
    """The spectral amplitude exceeded the blow-up sentinel."""

    def __init__(self, t, peak):
        super().__init__(f"|U^| = {peak:.3e} exceeded the blow-up sentinel at t = {t:.6g}")
        self.t = t
        self.peak = peak


class InsufficientWindow(VKGError):
    pass


class QuadratureTooCoarse(VKGError):
    pass


class ParseError(VKGError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ValidationError(VKGError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class IoError(VKGError):
    """An artifact could not be written or read back."""
