"""
Exact truncated power series in one variable over the rationals.

Every coefficient is a ``fractions.Fraction``; no floating point enters this module.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Union

from quillen_singularity.errors import DegreeOutOfRange, ZeroConstantTerm

Rational = Fraction
Scalar = Union[Fraction, int]

DEFAULT_ORDER = 16
MAX_ORDER = 64


@dataclass(frozen=True)
class TruncatedSeries:
    """
    A formal power series a_0 + a_1 x + ... + a_N x^N, known up to x^N.

    Attributes:
        coeffs (tuple[Fraction, ...]): Coefficients of x^0 ... x^N, at least one entry.
    """
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("A truncated series needs at least the constant coefficient.")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @classmethod
    def from_coefficients(cls, coeffs: Iterable[Scalar]) -> "TruncatedSeries":
        return cls(tuple(Fraction(c) for c in coeffs))

    @classmethod
    def constant(cls, value: Scalar, order: int) -> "TruncatedSeries":
        return cls((Fraction(value),) + (Fraction(0),) * order)

    @classmethod
    def monomial(cls, degree: int, order: int, value: Scalar = 1) -> "TruncatedSeries":
        """The series value * x^degree, which is zero when degree exceeds the order."""
        coeffs = [Fraction(0)] * (order + 1)
        if degree <= order:
            coeffs[degree] = Fraction(value)
        return cls(tuple(coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise DegreeOutOfRange(f"Cannot extend a series of order {self.order} to order {order}.")
        return TruncatedSeries(self.coeffs[: order + 1])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __getitem__(self, degree: int) -> Fraction:
        return coefficient_of(self, degree)

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_add(self, other)
        return series_add(self, TruncatedSeries.constant(other, self.order))

    __radd__ = __add__

    def __neg__(self):
        return series_scale(self, -1)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return series_mul(self, other)

    __rmul__ = __mul__

    def __str__(self) -> str:
        return ", ".join(str(c) for c in self.coeffs)


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Coefficient-wise sum, truncated to the smaller of the two orders."""
    order = min(a.order, b.order)
    return TruncatedSeries(tuple(a.coeffs[i] + b.coeffs[i] for i in range(order + 1)))


def series_scale(a: TruncatedSeries, factor: Scalar) -> TruncatedSeries:
    factor = Fraction(factor)
    return TruncatedSeries(tuple(factor * c for c in a.coeffs))


def series_mul(a: TruncatedSeries, b: Union[TruncatedSeries, Scalar]) -> TruncatedSeries:
    """
    Cauchy product of two series, or scaling by a rational.

    Args:
        a (TruncatedSeries): Left factor.
        b (TruncatedSeries | Fraction | int): Right factor.

    Returns:
        TruncatedSeries: The product, truncated to min(a.order, b.order).
    """
    if not isinstance(b, TruncatedSeries):
        return series_scale(a, b)
    order = min(a.order, b.order)
    coeffs = []
    for k in range(order + 1):
        coeffs.append(sum((a.coeffs[j] * b.coeffs[k - j] for j in range(k + 1)), Fraction(0)))
    return TruncatedSeries(tuple(coeffs))


def series_reciprocal(a: TruncatedSeries) -> TruncatedSeries:
    """
    Multiplicative inverse of a series with non-zero constant term.

    Args:
        a (TruncatedSeries): The series to invert.

    Returns:
        TruncatedSeries: b with a * b = 1 up to the order of a.

    Raises:
        ZeroConstantTerm: If the constant coefficient of a is zero.
    """
    if a.coeffs[0] == 0:
        raise ZeroConstantTerm("Series with zero constant term has no reciprocal.")
    inverse_lead = 1 / a.coeffs[0]
    coeffs = [inverse_lead]
    for k in range(1, a.order + 1):
        acc = sum((a.coeffs[j] * coeffs[k - j] for j in range(1, k + 1)), Fraction(0))
        coeffs.append(-inverse_lead * acc)
    return TruncatedSeries(tuple(coeffs))


def flip_sign(a: TruncatedSeries) -> TruncatedSeries:
    """The series a(-x)."""
    return TruncatedSeries(tuple(c if k % 2 == 0 else -c for k, c in enumerate(a.coeffs)))


def divide_by_x(a: TruncatedSeries) -> TruncatedSeries:
    """
    Exact division by x; the constant coefficient must vanish.

    Raises:
        ValueError: If the constant coefficient is not zero.
        DegreeOutOfRange: If the series has order 0, so nothing is known after division.
    """
    if a.coeffs[0] != 0:
        raise ValueError(f"Cannot divide by x: constant coefficient is {a.coeffs[0]}.")
    if a.order == 0:
        raise DegreeOutOfRange("Dividing an order-0 series by x leaves no known coefficient.")
    return TruncatedSeries(a.coeffs[1:])


def exp_series(order: int, sign: int = 1) -> TruncatedSeries:
    """e^{sign * x} up to x^order."""
    return TruncatedSeries(tuple(Fraction(sign ** k, factorial(k)) for k in range(order + 1)))


def coefficient_of(f: TruncatedSeries, m: int) -> Fraction:
    """
    The coefficient f(x)|_{x^m}.

    Raises:
        DegreeOutOfRange: If m is negative or exceeds the order of f.
    """
    if m < 0 or m > f.order:
        raise DegreeOutOfRange(f"Degree {m} outside the known range 0..{f.order}.")
    return f.coeffs[m]


def _require_order(order: int) -> None:
    if order < 0:
        raise ValueError(f"Truncation order must be non-negative, got {order}.")


def td_inverse_series(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """
    Td^{-1}(x) = (1 - e^{-x})/x, whose x^k coefficient is (-1)^k/(k+1)!.
    """
    _require_order(order)
    return TruncatedSeries(tuple(Fraction((-1) ** k, factorial(k + 1)) for k in range(order + 1)))


def td_series(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """The Todd generating function x/(1 - e^{-x}), as the reciprocal of Td^{-1}."""
    return series_reciprocal(td_inverse_series(order))


def minus_part(f: TruncatedSeries) -> TruncatedSeries:
    """
    f_-(x) = (f(x) - f(-x)) / 2x.

    The x^{2k} coefficient of the result is the x^{2k+1} coefficient of f and every
    odd-degree coefficient is exactly zero.

    Args:
        f (TruncatedSeries): Input series of order at least 1.

    Returns:
        TruncatedSeries: f_- of order f.order - 1.
    """
    difference = series_add(f, -flip_sign(f))
    assert all(c == 0 for c in difference.coeffs[0::2]), "even part must cancel"
    result = series_scale(divide_by_x(difference), Fraction(1, 2))
    assert all(c == 0 for c in result.coeffs[1::2]), "odd part of f_- must vanish"
    return result


def f_series(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """(Td^{-1}(x) - 1)/x, whose x^j coefficient is (-1)^{j+1}/(j+2)!."""
    _require_order(order)
    return divide_by_x(td_inverse_series(order + 1) - 1)


def e_series(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """
    The one-root E generating function Td(x) Td(-x) f_-(x) with f = (Td^{-1}(x) - 1)/x.

    It equals Td(x)Td(-x)/(2x) * ((Td^{-1}(x)-1)/x - (Td^{-1}(-x)-1)/(-x)) and is even.
    """
    _require_order(order)
    td = td_series(order)
    return td * flip_sign(td) * minus_part(f_series(order + 1))


def milnor_weight_series(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """
    The power series of 1/x - (1 - e^{-x})/x^2, computed as (x - 1 + e^{-x})/x^2.

    The pole cancels, so the x^n coefficient is (-1)^n/(n+2)!.
    """
    _require_order(order)
    numerator = exp_series(order + 2, sign=-1) + TruncatedSeries.monomial(1, order + 2) - 1
    return divide_by_x(divide_by_x(numerator))


def td_ratio_series(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """(1/Td(x)) * (Td(x) - 1)/x, the integrand factor paired with c1(H)^n."""
    _require_order(order)
    return td_inverse_series(order) * divide_by_x(td_series(order + 1) - 1)
