"""Exception types raised by copieslab."""


class CopiesLabError(Exception):
    """Base class for all library errors."""


class InvalidSamplerError(CopiesLabError, ValueError):
    pass


class QuadratureError(CopiesLabError, ArithmeticError):
    pass


class SingularPointError(CopiesLabError, ValueError):
    pass


class ZeroMeanError(CopiesLabError, ValueError):
    pass


class UnboundedOracleError(CopiesLabError, ValueError):
    pass


class EmptyRegionError(CopiesLabError, ValueError):
    pass


class GridTooCoarseError(CopiesLabError, ValueError):
    pass


class BelowRangeError(CopiesLabError, ValueError):
    pass


class InsufficientTermsError(CopiesLabError, ValueError):
    pass


class DegeneratePatternError(CopiesLabError, ValueError):
    pass


class PointNotInSetError(CopiesLabError, ValueError):
    pass
