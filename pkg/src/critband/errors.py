"""Exception types shared across the package."""


class CritbandError(Exception):
    """Base class for all critband errors."""


class DegenerateFit(CritbandError):
    """Raised when the effective kernel weight mass at some evaluation point is
    numerically zero, i.e. the bandwidth is far too small for the data spacing."""

    def __init__(self, h: float, min_mass: float):
        self.h = h
        self.min_mass = min_mass
        super().__init__(
            f"degenerate local fit at h={h:g}: minimum weight mass {min_mass:.3e} < 1e-12"
        )


class NoSatisfyingBandwidth(CritbandError):
    """Raised when the shape hypothesis is not satisfied even at the expanded
    upper end of the bandwidth search space."""

    def __init__(self, h_max: float, values=None):
        self.h_max = h_max
        self.values = values  # final curve, for diagnostics
        super().__init__(
            f"hypothesis not satisfied at any bandwidth up to {h_max:g}; "
            "the constraint set may be unreachable by smoothing"
        )


class UnknownFunction(CritbandError):
    """Raised for an unrecognized simulation-function name."""


class DataError(CritbandError):
    """Base class for input-data problems."""


class ParseError(DataError):
    """Malformed CSV cell or row; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyDataError(DataError):
    """Input file contains a header but no data rows."""


class NonFiniteValueError(DataError):
    """A NaN or infinite value in the input; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
