"""
Milnor numbers of isolated hypersurface critical points.

The Milnor number is the dimension of the local algebra O / (df). It is computed as the
dimension of Q[z] / (J + m^D) for growing D, where J is the Jacobian ideal and m the
maximal ideal at the origin, until two consecutive dimensions agree. By Nakayama's lemma
that plateau means m^D ⊂ J locally, so the value is final.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from quillen_singularity.datatypes import INFINITE, MilnorMethod
from quillen_singularity.errors import BoundExceeded, NotInteger

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
Term = Tuple[Exponents, Fraction]


@dataclass(frozen=True)
class PolynomialGerm:
    """
    A polynomial F(z_0, ..., z_n) with rational coefficients.

    Attributes:
        nvars (int): Number of variables n + 1.
        terms (tuple[tuple[tuple[int, ...], Fraction], ...]): Monomials as (exponents, coefficient),
            sorted, without duplicate exponents or zero coefficients.
        label (str): Optional name used in reports.
    """
    nvars: int
    terms: Tuple[Term, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError(f"A germ needs at least one variable, got {self.nvars}.")
        seen = set()
        normalised = []
        for exps, coef in self.terms:
            exps = tuple(int(e) for e in exps)
            coef = Fraction(coef)
            if len(exps) != self.nvars:
                raise ValueError(f"Exponent vector {exps} does not have {self.nvars} entries.")
            if min(exps) < 0:
                raise ValueError(f"Exponent vector {exps} has a negative entry.")
            if exps in seen:
                raise ValueError(f"Duplicate exponent vector {exps}.")
            if coef == 0:
                raise ValueError(f"Zero coefficient for exponent vector {exps}.")
            seen.add(exps)
            normalised.append((exps, coef))
        object.__setattr__(self, "terms", tuple(sorted(normalised)))

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable[Tuple[Sequence[int], Union[Fraction, int]]], label: str = "") -> "PolynomialGerm":
        """Build a germ, merging repeated exponent vectors and dropping zero coefficients."""
        merged = {}
        for exps, coef in terms:
            exps = tuple(int(e) for e in exps)
            merged[exps] = merged.get(exps, Fraction(0)) + Fraction(coef)
        return cls(nvars=nvars, terms=tuple((e, c) for e, c in merged.items() if c != 0), label=label)

    @classmethod
    def from_sympy(cls, expr, nvars: int, label: str = "") -> "PolynomialGerm":
        symbols = variables(nvars)
        poly = sympy.Poly(sympy.expand(expr), *symbols, domain=QQ)
        terms = [(monom, Fraction(int(coef.p), int(coef.q))) for monom, coef in poly.terms()]
        return cls.from_terms(nvars, terms, label=label)

    def to_sympy(self):
        symbols = variables(self.nvars)
        return sympy.Add(*(
            sympy.Rational(coef.numerator, coef.denominator) * sympy.Mul(*(s ** e for s, e in zip(symbols, exps)))
            for exps, coef in self.terms
        ))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def max_degree(self) -> int:
        return max((sum(exps) for exps, _ in self.terms), default=0)

    @property
    def min_degree(self) -> int:
        return min((sum(exps) for exps, _ in self.terms), default=0)

    def constant_term(self) -> Fraction:
        return dict(self.terms).get((0,) * self.nvars, Fraction(0))

    def has_linear_part(self) -> bool:
        return any(sum(exps) == 1 for exps, _ in self.terms)

    def derivative(self, index: int) -> "PolynomialGerm":
        terms = []
        for exps, coef in self.terms:
            if exps[index] == 0:
                continue
            lowered = list(exps)
            lowered[index] -= 1
            terms.append((tuple(lowered), coef * exps[index]))
        return PolynomialGerm.from_terms(self.nvars, terms)

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """
        Evaluate at complex points.

        Args:
            z (np.ndarray): Array of shape (P, nvars).

        Returns:
            np.ndarray: Complex values of shape (P,).
        """
        z = np.asarray(z, dtype=complex)
        values = np.zeros(z.shape[0], dtype=complex)
        for exps, coef in self.terms:
            values += float(coef) * np.prod(z ** np.asarray(exps), axis=1)
        return values

    def __str__(self) -> str:
        return str(self.to_sympy()).replace("**", "^")


def variables(nvars: int) -> Tuple[sympy.Symbol, ...]:
    return sympy.symbols(f"z0:{nvars}")


@dataclass(frozen=True)
class MilnorResult:
    """
    Attributes:
        mu (int | INFINITE): The Milnor number, INFINITE when the dimension did not stabilise.
        method (MilnorMethod): How mu was computed.
        degree_bound_used (int): Largest truncation degree D examined.
        dimensions (tuple[int, ...]): dim Q[z]/(J + m^D) for D = 1, 2, ...
        weights (Optional[tuple[Fraction, ...]]): Quasi-homogeneous weights, when the germ has them.
        quasi_homogeneous_mu (Optional[int]): The weighted count for those weights.
    """
    mu: Union[int, type(INFINITE)]
    method: MilnorMethod
    degree_bound_used: int
    dimensions: Tuple[int, ...] = ()
    weights: Optional[Tuple[Fraction, ...]] = None
    quasi_homogeneous_mu: Optional[int] = None

    @property
    def is_isolated(self) -> bool:
        return self.mu is not INFINITE

    @property
    def last_dimension(self) -> int:
        return self.dimensions[-1] if self.dimensions else 0


def jacobian_ideal(f: PolynomialGerm) -> List[PolynomialGerm]:
    """The partial derivatives dF/dz_0, ..., dF/dz_n."""
    return [f.derivative(i) for i in range(f.nvars)]


def _monomials_below(nvars: int, degree: int) -> List[Exponents]:
    """All exponent vectors of total degree < degree, graded then lexicographic."""
    monomials = []
    for total in range(degree):
        for combo in itertools.combinations_with_replacement(range(nvars), total):
            exps = [0] * nvars
            for index in combo:
                exps[index] += 1
            monomials.append(tuple(exps))
    return sorted(set(monomials), key=lambda e: (sum(e), tuple(-x for x in e)))


def _quotient_dimension(generators: Sequence[PolynomialGerm], nvars: int, degree: int) -> int:
    """dim Q[z] / (J + m^degree) through the rank of the truncated Macaulay matrix."""
    monomials = _monomials_below(nvars, degree)
    column = {exps: i for i, exps in enumerate(monomials)}
    rows = {}
    for g in generators:
        if g.is_zero():
            continue
        for multiplier in monomials:
            if sum(multiplier) + g.min_degree >= degree:
                continue
            row = {}
            for exps, coef in g.terms:
                shifted = tuple(a + b for a, b in zip(exps, multiplier))
                if sum(shifted) < degree:
                    row[column[shifted]] = QQ(coef.numerator, coef.denominator)
            if row:
                rows[len(rows)] = row
    if not rows:
        return len(monomials)
    matrix = DomainMatrix(rows, (len(rows), len(monomials)), QQ)
    return len(monomials) - matrix.rank()


def default_degree_bound(f: PolynomialGerm) -> int:
    n = f.nvars - 1
    d = f.max_degree
    return max(n * (d - 1) + 2, f.nvars * (d - 2) + 3, 2)


def _resolve_bound(f: PolynomialGerm, degree_bound: Optional[int]) -> int:
    if degree_bound is None:
        return default_degree_bound(f)
    if degree_bound < 1:
        raise ValueError(f"Degree bound must be at least 1, got {degree_bound}.")
    return degree_bound


def dimension_sequence(f: PolynomialGerm, degree_bound: Optional[int] = None) -> List[int]:
    """dim Q[z] / (J + m^D) for D = 1 .. degree_bound, without early stopping."""
    bound = _resolve_bound(f, degree_bound)
    generators = jacobian_ideal(f)
    return [_quotient_dimension(generators, f.nvars, degree) for degree in range(1, bound + 1)]


def quasihomogeneous_weights(f: PolynomialGerm) -> Optional[Tuple[Fraction, ...]]:
    """
    Weights w with sum_i w_i a_i = 1 on every monomial of f.

    Returns the unique solution when the support determines it, the equal weights
    1/deg when f is homogeneous, and None otherwise or when a weight is not positive.
    """
    if f.is_zero():
        return None
    w = sympy.symbols(f"w0:{f.nvars}")
    equations = [sum(a * wi for a, wi in zip(exps, w)) - 1 for exps, _ in f.terms]
    solutions = sympy.linsolve(equations, *w)
    if not solutions:
        return None
    (solution,) = tuple(solutions)
    if all(value.is_Number for value in solution):
        weights = tuple(Fraction(int(v.p), int(v.q)) for v in map(sympy.Rational, solution))
    elif f.min_degree == f.max_degree:
        weights = (Fraction(1, f.max_degree),) * f.nvars
    else:
        return None
    if min(weights) <= 0:
        return None
    return weights


def milnor_quasihomogeneous(weights: Sequence[Fraction], degree: Fraction = Fraction(1)) -> int:
    """
    Milnor-Orlik count prod_i (d/w_i - 1) for a quasi-homogeneous isolated singularity.

    Args:
        weights (Sequence[Fraction]): Positive weights of the variables.
        degree (Fraction): Weighted degree d of the polynomial.

    Returns:
        int: The Milnor number.

    Raises:
        ValueError: If a weight is not positive or d/w_i <= 1.
        NotInteger: If the product is not a non-negative integer.
    """
    degree = Fraction(degree)
    ratios = []
    for w in weights:
        w = Fraction(w)
        if w <= 0:
            raise ValueError(f"Weights must be positive, got {w}.")
        if degree / w <= 1:
            raise ValueError(f"Need d/w > 1 for every weight, got d={degree}, w={w}.")
        ratios.append(degree / w - 1)
    count = prod(ratios, start=Fraction(1))
    if count.denominator != 1 or count < 0:
        raise NotInteger(f"Weighted count {count} is not a non-negative integer.")
    return int(count)


def milnor_number(f: PolynomialGerm, degree_bound: Optional[int] = None) -> MilnorResult:
    """
    Milnor number of f at the origin.

    Args:
        f (PolynomialGerm): The germ.
        degree_bound (Optional[int]): Largest truncation degree D to try.

    Returns:
        MilnorResult: mu = 0 when the origin is not a critical point on F = 0, the plateau
        value of the quotient dimensions otherwise, or INFINITE if no plateau was reached.

    Raises:
        ValueError: If degree_bound is given and below 1.
    """
    if f.constant_term() != 0 or f.has_linear_part():
        return MilnorResult(mu=0, method=MilnorMethod.quotient_dimension, degree_bound_used=0)

    bound = _resolve_bound(f, degree_bound)
    generators = jacobian_ideal(f)
    dimensions = []
    for degree in range(1, bound + 1):
        dimensions.append(_quotient_dimension(generators, f.nvars, degree))
        if len(dimensions) >= 2 and dimensions[-1] == dimensions[-2]:
            break
    else:
        logger.warning("No plateau for %s up to degree %d (last dimension %d).", f, bound, dimensions[-1])
        return MilnorResult(mu=INFINITE, method=MilnorMethod.quotient_dimension,
                            degree_bound_used=bound, dimensions=tuple(dimensions))

    logger.debug("Quotient dimensions for %s: %s", f, dimensions)
    mu = dimensions[-1]
    weights = quasihomogeneous_weights(f)
    oracle = None
    if weights is not None:
        try:
            oracle = milnor_quasihomogeneous(weights)
        except (NotInteger, ValueError):
            oracle = None
        if oracle is not None and oracle != mu:
            logger.warning("Quotient dimension %d disagrees with weighted count %d for %s.", mu, oracle, f)
    return MilnorResult(mu=mu, method=MilnorMethod.quotient_dimension, degree_bound_used=len(dimensions),
                        dimensions=tuple(dimensions), weights=weights, quasi_homogeneous_mu=oracle)


def milnor_sum(germs: Sequence[PolynomialGerm], threads: int = 1, degree_bound: Optional[int] = None) -> int:
    """
    Sum of Milnor numbers over the singular points of X_0.

    Germs are processed in parallel; results are summed in input order.

    Raises:
        BoundExceeded: If some germ has no isolated critical point within the bound.
    """
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        results = list(pool.map(lambda g: milnor_number(g, degree_bound), germs))
    total = 0
    for germ, result in zip(germs, results):
        if not result.is_isolated:
            raise BoundExceeded(f"Germ {germ.label or germ} did not stabilise by degree {result.degree_bound_used}.",
                                last_dimension=result.last_dimension)
        total += result.mu
    return total


def linear_change(f: PolynomialGerm, matrix: Sequence[Sequence[Union[Fraction, int]]]) -> PolynomialGerm:
    """Substitute z_i -> sum_j M_ij z_j."""
    symbols = variables(f.nvars)
    substitution = {
        s: sum(sympy.Rational(Fraction(m).numerator, Fraction(m).denominator) * t for m, t in zip(row, symbols))
        for s, row in zip(symbols, matrix)
    }
    return PolynomialGerm.from_sympy(f.to_sympy().xreplace(substitution), f.nvars, label=f.label)
