"""
Chern-class calculus for a rank-2 bundle N with c1(N) = 0.

Public values live in Q[c2]/(c2^{T+1}). The Chern roots x1, x2 only appear inside
this module, as coefficient maps {(i, j): a} standing for sum a * x1^i * x2^j, and are
reduced with x1 + x2 = 0, x1 * x2 = c2 before anything is returned.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

from quillen_singularity.errors import MissingCharNumber, NotSymmetric
from quillen_singularity.series_ring import (
    TruncatedSeries,
    coefficient_of,
    divide_by_x,
    e_series,
    f_series,
    milnor_weight_series,
    td_inverse_series,
    td_series,
)

logger = logging.getLogger(__name__)

CharKey = Tuple[int, int, int]


@dataclass(frozen=True)
class GradedElement:
    """
    An element sum_k a_k c2^k of Q[c2]/(c2^{truncation+1}).

    Attributes:
        coeffs (tuple[Fraction, ...]): a_0 ... a_T, indexed by the power of c2.
    """
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("A graded element keeps at least the degree-0 coefficient.")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @classmethod
    def zero(cls, truncation: int) -> "GradedElement":
        return cls((Fraction(0),) * (truncation + 1))

    @classmethod
    def c2_power(cls, k: int, truncation: int, value: Union[Fraction, int] = 1) -> "GradedElement":
        coeffs = [Fraction(0)] * (truncation + 1)
        if k <= truncation:
            coeffs[k] = Fraction(value)
        return cls(tuple(coeffs))

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k <= self.truncation else Fraction(0)

    def as_dict(self) -> Dict[int, Fraction]:
        return {k: c for k, c in enumerate(self.coeffs) if c != 0}

    def __add__(self, other: "GradedElement") -> "GradedElement":
        truncation = min(self.truncation, other.truncation)
        return GradedElement(tuple(self.coeffs[k] + other.coeffs[k] for k in range(truncation + 1)))

    def __neg__(self) -> "GradedElement":
        return self * -1

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def __mul__(self, other) -> "GradedElement":
        if not isinstance(other, GradedElement):
            return GradedElement(tuple(Fraction(other) * c for c in self.coeffs))
        truncation = min(self.truncation, other.truncation)
        coeffs = [Fraction(0)] * (truncation + 1)
        for i, a in enumerate(self.coeffs[: truncation + 1]):
            if a == 0:
                continue
            for j in range(truncation + 1 - i):
                coeffs[i + j] += a * other.coeffs[j]
        return GradedElement(tuple(coeffs))

    __rmul__ = __mul__

    def __str__(self) -> str:
        terms = []
        for k, c in self.as_dict().items():
            terms.append(str(c) if k == 0 else f"{c}*c2" if k == 1 else f"{c}*c2^{k}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class FiberClassElement:
    """
    A polynomial sum_j a_j c1(F)^j in the first Chern class of F = O_{P(N)}(1), before the
    relation c1(F)^2 = -c2 is applied.

    Attributes:
        coeffs (tuple[Fraction, ...]): a_0 ... a_M, indexed by the power of c1(F).
    """
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @classmethod
    def from_series(cls, f: TruncatedSeries) -> "FiberClassElement":
        """Evaluate the series f at c1(F), keeping its whole truncation."""
        return cls(f.coeffs)

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class CharNumbers:
    """
    Characteristic numbers of the critical locus Sigma_pi ∩ X_0.

    Keys are (i, k, j): the complex degree i of the Td(T Sigma) piece, the power k of c2(N)
    and the complex degree j of the ch(xi) piece, with i + 2k + j equal to the complex
    dimension. Entries with j = 0 hold the integral of Td_i * c2^k alone; the rank of xi is
    multiplied in by char_numbers_coefficient. Entries with j > 0 already contain ch_j(xi).

    Attributes:
        dimension (int): Complex dimension d of Sigma_pi ∩ X_0.
        numbers (Mapping[tuple[int, int, int], Fraction]): The integrals.
    """
    dimension: int
    numbers: Mapping[CharKey, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 0:
            raise ValueError(f"Dimension must be non-negative, got {self.dimension}.")
        kept = {}
        for key, value in self.numbers.items():
            key = tuple(int(v) for v in key)
            if len(key) != 3 or min(key) < 0:
                raise ValueError(f"Characteristic number key {key} must be three non-negative integers.")
            if key[0] + 2 * key[1] + key[2] != self.dimension:
                logger.warning("Dropping characteristic number %s: not of top degree %d.", key, self.dimension)
                continue
            kept[key] = Fraction(value)
        object.__setattr__(self, "numbers", kept)

    @classmethod
    def points(cls, count: int) -> "CharNumbers":
        """A finite critical locus of `count` reduced points."""
        return cls(dimension=0, numbers={(0, 0, 0): Fraction(count)})

    def required_keys(self) -> Iterable[CharKey]:
        d = self.dimension
        for k in range(d // 2 + 1):
            for i in range(d - 2 * k + 1):
                yield (i, k, d - 2 * k - i)


def _require_truncation(truncation: int) -> None:
    if truncation < 0:
        raise ValueError(f"Truncation must be non-negative, got {truncation}.")


def pushforward_power(m: int, truncation: int) -> GradedElement:
    """
    p_* c1(F)^m along P(N) -> Sigma for rank N = 2 and c1(N) = 0.

    Returns (-1)^k c2^k for m = 2k + 1 and 0 for m = 2k.
    """
    if m < 0:
        raise ValueError(f"Exponent must be non-negative, got {m}.")
    _require_truncation(truncation)
    if m % 2 == 0:
        return GradedElement.zero(truncation)
    k = (m - 1) // 2
    return GradedElement.c2_power(k, truncation, (-1) ** k)


def reduce_fiber_relation(f: FiberClassElement, truncation: int) -> Tuple[GradedElement, GradedElement]:
    """
    Rewrite f as A + B c1(F) with A, B in Q[c2] using c1(F)^2 = -c2.

    Args:
        f (FiberClassElement): Polynomial in c1(F).
        truncation (int): Truncation of the returned graded elements.

    Returns:
        tuple[GradedElement, GradedElement]: The pair (A, B).
    """
    _require_truncation(truncation)
    even = [Fraction(0)] * (truncation + 1)
    odd = [Fraction(0)] * (truncation + 1)
    for j, a in enumerate(f.coeffs):
        k = j // 2
        if k > truncation:
            break
        target = odd if j % 2 else even
        target[k] += (-1) ** k * a
    return GradedElement(tuple(even)), GradedElement(tuple(odd))


def pushforward(f: FiberClassElement, truncation: int) -> GradedElement:
    """
    p_* f(c1(F)) = sum_k (-1)^k a_{2k+1} c2^k.

    p_* kills the part without c1(F) and sends c1(F) to 1, so the pushforward is the
    c1(F)-coefficient after reducing with c1(F)^2 = -c2.
    """
    if 2 * truncation + 1 > f.truncation:
        logger.debug("Pushforward of a class known to degree %d at truncation %d.", f.truncation, truncation)
    return reduce_fiber_relation(f, truncation)[1]


def symmetric_reduce(two_roots: Mapping[Tuple[int, int], Fraction], truncation: int) -> GradedElement:
    """
    Reduce a symmetric expression in the Chern roots x1, x2 to Q[c2].

    With e1 = x1 + x2 = 0 we may put x2 = -x1 and then x1^2 = -x1 x2 = -c2, so a monomial
    x1^i x2^j becomes (-1)^j x1^{i+j}, and x1^{2k} becomes (-c2)^k.

    Args:
        two_roots (Mapping[tuple[int, int], Fraction]): {(i, j): a} for a * x1^i * x2^j.
        truncation (int): Keep powers of c2 up to this value.

    Returns:
        GradedElement: The reduced element.

    Raises:
        NotSymmetric: If the input is not symmetric in x1, x2, or an odd-degree part survives.
    """
    _require_truncation(truncation)
    for (i, j), a in two_roots.items():
        if Fraction(a) != Fraction(two_roots.get((j, i), 0)):
            raise NotSymmetric(f"Coefficient of x1^{i} x2^{j} differs from that of x1^{j} x2^{i}.")

    by_degree: Dict[int, Fraction] = {}
    for (i, j), a in two_roots.items():
        by_degree[i + j] = by_degree.get(i + j, Fraction(0)) + (-1) ** j * Fraction(a)

    coeffs = [Fraction(0)] * (truncation + 1)
    for degree, a in by_degree.items():
        if degree % 2:
            if a != 0:
                raise NotSymmetric(f"Odd remainder {a} in degree {degree} with c1 = 0.")
            continue
        k = degree // 2
        if k <= truncation:
            coeffs[k] += (-1) ** k * a
    return GradedElement(tuple(coeffs))


def _roots_product(f: TruncatedSeries, g: TruncatedSeries, max_degree: int) -> Dict[Tuple[int, int], Fraction]:
    """Coefficient map of f(x1) * g(x2), kept up to total degree max_degree."""
    result = {}
    for i in range(min(f.order, max_degree) + 1):
        if f.coeffs[i] == 0:
            continue
        for j in range(min(g.order, max_degree - i) + 1):
            if g.coeffs[j] != 0:
                result[(i, j)] = f.coeffs[i] * g.coeffs[j]
    return result


def _roots_sum(f: TruncatedSeries, max_degree: int) -> Dict[Tuple[int, int], Fraction]:
    """Coefficient map of f(x1) + f(x2)."""
    result: Dict[Tuple[int, int], Fraction] = {}
    for i in range(min(f.order, max_degree) + 1):
        for key in ((i, 0), (0, i)):
            result[key] = result.get(key, Fraction(0)) + f.coeffs[i]
    return result


def multiplicative_genus(f: TruncatedSeries, truncation: int) -> GradedElement:
    """f(x1) f(x2) for the rank-2 bundle N, reduced to Q[c2]."""
    if f.order < 2 * truncation:
        raise ValueError(f"Series of order {f.order} cannot reach c2^{truncation}.")
    return symmetric_reduce(_roots_product(f, f, 2 * truncation), truncation)


def additive_genus(f: TruncatedSeries, truncation: int) -> GradedElement:
    """f(x1) + f(x2) for the rank-2 bundle N, reduced to Q[c2]."""
    if f.order < 2 * truncation:
        raise ValueError(f"Series of order {f.order} cannot reach c2^{truncation}.")
    return symmetric_reduce(_roots_sum(f, 2 * truncation), truncation)


def td_normal_bundle(truncation: int) -> GradedElement:
    """Td(N) = Td(x1) Td(x2) = 1 + c2/12 + ... when c1(N) = 0."""
    return multiplicative_genus(td_series(2 * truncation), truncation)


def e_genus_rank2(truncation: int) -> GradedElement:
    """
    E(N) = 2 Td(N) sum_k (-1)^k a_{2k+1} c2^k with a_j the coefficients of (Td^{-1}(x) - 1)/x.

    The sum is the pushforward p_* f(c1(F)); its degree-0 part is 2 a_1 = 1/3.
    """
    _require_truncation(truncation)
    f = FiberClassElement.from_series(f_series(2 * truncation + 1))
    return td_normal_bundle(truncation) * pushforward(f, truncation) * 2


def e_genus_via_fiber_integral(truncation: int) -> GradedElement:
    """E(N) = -2 Td(N) p_*((1 - Td^{-1}(F))/c1(F))."""
    _require_truncation(truncation)
    order = 2 * truncation + 1
    integrand = divide_by_x(1 - td_inverse_series(order + 1))
    return td_normal_bundle(truncation) * pushforward(FiberClassElement.from_series(integrand), truncation) * -2


def e_genus_from_generating_function(truncation: int) -> GradedElement:
    """E(N) = E(x1) + E(x2) from the one-root generating function."""
    _require_truncation(truncation)
    return additive_genus(e_series(2 * truncation), truncation)


def e_genus_piece(k: int) -> Fraction:
    """Coefficient of c2^k in E(N)."""
    return e_genus_rank2(k).coefficient(k)


def char_numbers_coefficient(data: CharNumbers, rank_xi: int) -> Fraction:
    """
    Coefficient of log|t|^2 for critical loci given locally by z0 z1:
    1/2 * integral over Sigma_pi ∩ X_0 of -Td(T Sigma) E(N) ch(xi).

    Args:
        data (CharNumbers): The characteristic numbers of top degree.
        rank_xi (int): Rank of the twisting bundle xi.

    Returns:
        Fraction: The exact coefficient.

    Raises:
        MissingCharNumber: If a characteristic number of top degree is absent.
    """
    if rank_xi < 0:
        raise ValueError(f"Bundle rank must be non-negative, got {rank_xi}.")
    total = Fraction(0)
    for key in data.required_keys():
        if key not in data.numbers:
            raise MissingCharNumber(key)
        _, k, j = key
        weight = rank_xi if j == 0 else 1
        total += e_genus_piece(k) * data.numbers[key] * weight
    return -total / 2


def milnor_coefficient(n: int, rank_xi: int, milnor_sum: int) -> Fraction:
    """
    Coefficient of log|t|^2 for isolated critical points:
    (-1)^n/(n+2)! * rk(xi) * sum of Milnor numbers.

    The factor (-1)^n/(n+2)! is read off the series 1/x - (1 - e^{-x})/x^2.
    """
    if n < 1:
        raise ValueError(f"Fiber dimension must be at least 1, got {n}.")
    if milnor_sum < 0:
        raise ValueError(f"Milnor sum must be non-negative, got {milnor_sum}.")
    return coefficient_of(milnor_weight_series(n), n) * rank_xi * milnor_sum
