import re
from tokenize import TokenError
from fractions import Fraction
from typing import Optional, Union

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication,
    parse_expr,
    standard_transformations,
)

from sympy.polys.polyerrors import CoercionFailed, GeneratorsError, PolynomialError

from quillen_singularity.errors import ParseError
from quillen_singularity.fiber_integrals import SampleGrid
from quillen_singularity.milnor import PolynomialGerm

_TRANSFORMATIONS = standard_transformations + (implicit_multiplication, convert_xor)
_VARIABLE = re.compile(r"^z(\d+)$")
_GLUED_VARIABLE = re.compile(r"(\d)(?=z)")


def reduce_whitespace(text: str) -> str:
    """
    Reduce consecutive whitespace characters in a string to a single space.

    Args:
        text (str): The string to process.

    Returns:
        str: The processed string with reduced whitespace.
    """
    return re.sub(r'\s+', ' ', text).strip()


def convert_text_to_rational(text: Union[str, int, Fraction]) -> Fraction:
    """
    Convert "p/q", an integer or a finite decimal string into an exact rational.

    Args:
        text (str | int | Fraction): The value to convert.

    Returns:
        Fraction: The rational in lowest terms.

    Raises:
        ParseError: If the text is not a rational number. Floats are refused so that no
            binary rounding sneaks into exact data.
    """
    if isinstance(text, bool) or isinstance(text, float):
        raise ParseError(f"Refusing inexact value {text!r}; write it as 'p/q'.")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    cleaned = reduce_whitespace(str(text)).replace(" ", "").replace("−", "-")
    try:
        return Fraction(cleaned)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"Cannot convert '{text}' to a rational number.")


def format_rational(value: Fraction) -> str:
    """Serialise a rational as "p/q", or "p" for integers."""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def convert_text_to_polynomial(text: str, nvars: Optional[int] = None, label: str = "") -> PolynomialGerm:
    """
    Parse ASCII polynomial syntax such as "z0^3 + z1^3", "2 z0 z1", "2z0z1^2" or "z0*z1 - 1/2 z2^2".

    Args:
        text (str): The polynomial. Variables are z0 .. zn, "^" denotes powers, "*" is optional.
        nvars (Optional[int]): Number of variables; defaults to one more than the largest index seen.
        label (str): Label stored on the germ.

    Returns:
        PolynomialGerm: The parsed germ.

    Raises:
        ParseError: On syntax errors, unknown symbols or non-polynomial expressions.
    """
    if not text or not text.strip():
        raise ParseError("The polynomial text is empty.")
    try:
        expr = parse_expr(_GLUED_VARIABLE.sub(r"\1*", reduce_whitespace(text)), transformations=_TRANSFORMATIONS, evaluate=True)
    except (SyntaxError, TokenError, TypeError, ValueError, sympy.SympifyError) as e:
        raise ParseError(f"Cannot parse polynomial '{text}': {e}")

    indices = []
    for symbol in expr.free_symbols:
        match = _VARIABLE.match(symbol.name)
        if not match:
            raise ParseError(f"Unknown variable '{symbol.name}' in '{text}'; use z0, z1, ...")
        indices.append(int(match.group(1)))

    needed = max(indices, default=0) + 1
    nvars = needed if nvars is None else nvars
    if nvars < needed:
        raise ParseError(f"'{text}' uses z{needed - 1} but only {nvars} variables were declared.")
    try:
        return PolynomialGerm.from_sympy(expr, nvars, label=label or reduce_whitespace(text))
    except (PolynomialError, CoercionFailed, GeneratorsError) as e:
        raise ParseError(f"'{text}' is not a polynomial with rational coefficients: {e}")


def convert_text_to_grid(text: str) -> SampleGrid:
    """
    Parse "rmin,rmax,count,angles" into a sample grid.

    Raises:
        ParseError: If the text does not have four comma separated fields.
    """
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ParseError(f"Grid '{text}' must read rmin,rmax,count,angles.")
    try:
        return SampleGrid.geometric(float(parts[0]), float(parts[1]), int(parts[2]), int(parts[3]))
    except ValueError as e:
        raise ParseError(f"Invalid grid '{text}': {e}")
