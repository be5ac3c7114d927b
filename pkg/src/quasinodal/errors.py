"""Exception hierarchy shared across the package."""


class QuasiNodalError(Exception):
    """Base class for all package errors."""


class NonConvergence(QuasiNodalError):
    pass


class BadDimension(QuasiNodalError, ValueError):
    pass


class BadResolution(QuasiNodalError, ValueError):
    pass


class GridMismatch(QuasiNodalError, ValueError):
    pass


class TooFewNodes(QuasiNodalError, ValueError):
    pass


class InvalidSampleSpec(QuasiNodalError, ValueError):
    pass


class ZeroField(QuasiNodalError, ValueError):
    pass


class MissingSign(QuasiNodalError, ValueError):
    pass


class NotProjectable(QuasiNodalError):
    pass


class SeedNotProjectable(NotProjectable):
    pass


class SeedConstructionFailed(QuasiNodalError):
    pass


class MaxItersExceeded(NonConvergence):
    """Carries the unconverged report and field so callers can still record them."""

    def __init__(self, message: str, report=None, field=None):
        super().__init__(message)
        self.report = report
        self.field = field


class InfeasiblePartition(QuasiNodalError, ValueError):
    pass


class InnerSolveFailed(QuasiNodalError):
    def __init__(self, index: int, annulus: tuple[float, float], cause: Exception):
        self.index = index
        self.annulus = annulus
        self.cause = cause
        super().__init__(
            f"annulus #{index} ({annulus[0]:.6g}, {annulus[1]:.6g}): "
            f"{type(cause).__name__}: {cause}"
        )


class MissingBaseline(QuasiNodalError, ValueError):
    pass


class ConfigError(QuasiNodalError, ValueError):
    pass
