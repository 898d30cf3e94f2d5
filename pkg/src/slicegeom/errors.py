"""Exception types raised by the library.

Solver inconclusiveness (``NotFound``, ``NotSeparated``) is signalled by
exceptions in the library API; the CLI turns them into flagged rows.
"""


class SliceGeomError(Exception):
    pass


class DimensionMismatch(SliceGeomError, ValueError):
    pass


class ZeroVector(SliceGeomError, ValueError):
    pass


class NotPolytopal(SliceGeomError):
    pass


class DimensionBudgetExceeded(SliceGeomError):
    pass


class ZeroFunctional(SliceGeomError, ValueError):
    pass


class DepthOutOfRange(SliceGeomError, ValueError):
    pass


class EmptySlice(SliceGeomError):
    pass


class NotSeparated(SliceGeomError):
    """No separating slice could be certified at the given budget."""


class NotFound(SliceGeomError):
    """Budget exhausted without a witness; inconclusive, not a refutation."""


class InvariantViolation(SliceGeomError, ValueError):
    pass


class InvalidPoint(SliceGeomError, ValueError):
    pass


class UnsupportedSpace(SliceGeomError):
    pass


class ResolutionTooLow(SliceGeomError, ValueError):
    pass


class DegenerateComponent(SliceGeomError, ValueError):
    pass


class LevelMismatch(SliceGeomError, ValueError):
    pass


class MissingStabilizedColumn(SliceGeomError):
    pass


class GridMismatch(SliceGeomError, ValueError):
    pass


class GridIncompatible(SliceGeomError, ValueError):
    pass


class NonDyadicSupport(SliceGeomError, ValueError):
    pass


class GridTooLarge(SliceGeomError):
    pass


class InvalidSpace(SliceGeomError, ValueError):
    """Raised when a space spec fails validation where validity is required."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(report.errors))
