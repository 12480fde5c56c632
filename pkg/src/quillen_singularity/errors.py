class QuillenSingularityError(ValueError):
    """Base class of every domain error raised by the package."""


class ParseError(QuillenSingularityError):
    """Text could not be converted to a rational, polynomial or grid."""


class ZeroConstantTerm(QuillenSingularityError):
    """A power series without constant term has no multiplicative inverse."""


class DegreeOutOfRange(QuillenSingularityError):
    """A coefficient above the truncation order was requested."""


class NotSymmetric(QuillenSingularityError):
    """A two-root expression is not symmetric in the Chern roots."""


class MissingCharNumber(QuillenSingularityError):
    """A characteristic number of top degree was not supplied."""

    def __init__(self, key: tuple[int, int, int]):
        super().__init__(f"Characteristic number {key} (td degree, c2 power, ch degree) is missing.")
        self.key = key


class UnknownGenus(QuillenSingularityError):
    """The requested genus has no generating function."""


class NotInteger(QuillenSingularityError):
    """The quasi-homogeneous Milnor count is not a non-negative integer."""


class BoundExceeded(QuillenSingularityError):
    """The local algebra dimension did not stabilise below the degree bound."""

    def __init__(self, message: str, last_dimension: int):
        super().__init__(message)
        self.last_dimension = last_dimension


class BothZero(QuillenSingularityError):
    """Both coefficients of A z^nu + B vanish."""


class QuadratureFailure(QuillenSingularityError):
    """An integral could not be evaluated to the requested tolerance."""

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NonCompactSupport(QuillenSingularityError):
    """A bump function is not supported inside the integration domain."""


class UnsupportedGerm(QuillenSingularityError):
    """The germ is outside the families handled by the radial reduction."""


class IllConditioned(QuillenSingularityError):
    """The scaled design matrix of a fit is numerically rank deficient."""

    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class InsufficientSamples(QuillenSingularityError):
    """Fewer than twice as many fit samples as model parameters."""


class SpecError(QuillenSingularityError):
    """A family specification failed validation."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
