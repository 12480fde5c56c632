"""
Family specifications: the germs of a degeneration, the rank of the twisting bundle, optional
characteristic numbers of the critical locus and an optional verification block.

A specification is a JSON document::

    {
      "fiber_dimension": 1,
      "bundle_rank": 1,
      "germs": [{"label": "node", "polynomial": "z0*z1"},
                {"label": "cusp", "terms": [{"exps": [3, 0], "coef": "1"},
                                            {"exps": [0, 2], "coef": "-1"}]}],
      "char_numbers": {"dimension": 0, "numbers": [{"key": [0, 0, 0], "value": "2"}]},
      "seed": 0,
      "verify": {"mode": "gauss-norm", "grid": "1e-6,1e-1,40,8", "cutoff_radius": 1.0}
    }

Rationals are written as "p/q" strings or integers; floats are refused wherever the value
is exact.
"""
from dataclasses import dataclass, field
from typing import Any, List, Mapping, Optional, Tuple

from quillen_singularity.chern_calculus import CharNumbers
from quillen_singularity.datatypes import VerifyMode
from quillen_singularity.errors import (
    NonCompactSupport,
    ParseError,
    SpecError,
)
from quillen_singularity.fiber_integrals import BumpSpec, MonomialExponents, SampleGrid
from quillen_singularity.file_utils import load_json
from quillen_singularity.milnor import PolynomialGerm
from quillen_singularity.string_utils import (
    convert_text_to_grid,
    convert_text_to_polynomial,
    convert_text_to_rational,
)


@dataclass(kw_only=True, frozen=True)
class VerifySpec:
    """
    Attributes:
        mode (VerifyMode): Which fiber integral is sampled.
        grid (Optional[SampleGrid]): Values of t; the run default when None.
        chi (Optional[BumpSpec]): Cutoff of the psi mode.
        nu (Optional[MonomialExponents]): Exponents of the monomial mode.
        polynomial (Optional[PolynomialGerm]): F of the psi mode; the first germ when None.
        cutoff_radius (float): Milnor ball radius of the gauss-norm mode.
        threshold (Optional[float]): Pass threshold; the run default for the mode when None.
    """
    mode: VerifyMode
    grid: Optional[SampleGrid] = None
    chi: Optional[BumpSpec] = None
    nu: Optional[MonomialExponents] = None
    polynomial: Optional[PolynomialGerm] = None
    cutoff_radius: float = 1.0
    threshold: Optional[float] = None


@dataclass(kw_only=True, frozen=True)
class FamilySpec:
    """
    Attributes:
        fiber_dimension (int): Complex dimension n of the fibers; germs have n + 1 variables.
        bundle_rank (int): Rank of the twisting bundle xi.
        germs (tuple[PolynomialGerm, ...]): Local models at the singular points of X_0.
        char_numbers (Optional[CharNumbers]): Characteristic numbers of the critical locus.
        seed (Optional[int]): Seed of the Monte-Carlo paths.
        verify (Optional[VerifySpec]): Numerical verification to run.
    """
    fiber_dimension: int
    bundle_rank: int = 1
    germs: Tuple[PolynomialGerm, ...] = field(default_factory=tuple)
    char_numbers: Optional[CharNumbers] = None
    seed: Optional[int] = None
    verify: Optional[VerifySpec] = None

    def __post_init__(self):
        if self.fiber_dimension < 1:
            raise SpecError("fiber_dimension", f"must be at least 1, got {self.fiber_dimension}")
        if self.bundle_rank < 1:
            raise SpecError("bundle_rank", f"must be at least 1, got {self.bundle_rank}")
        for index, germ in enumerate(self.germs):
            if germ.nvars != self.fiber_dimension + 1:
                raise SpecError(f"germs[{index}]", f"has {germ.nvars} variables, expected {self.fiber_dimension + 1}")


def _require(document: Mapping[str, Any], key: str, path: str) -> Any:
    if not isinstance(document, Mapping):
        raise SpecError(path, "must be an object")
    if key not in document:
        raise SpecError(_join(path, key), "is required")
    return document[key]


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(path, f"must be an integer, got {value!r}")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(path, f"must be a number, got {value!r}")
    return float(value)


def _list(value: Any, path: str) -> List[Any]:
    if not isinstance(value, list):
        raise SpecError(path, f"must be a list, got {type(value).__name__}")
    return value


def parse_germ(document: Any, nvars: int, path: str) -> PolynomialGerm:
    """
    A germ given either as {"polynomial": "..."} or as {"terms": [{"exps": [...], "coef": "p/q"}]}.
    "exponents" is accepted for "exps".
    """
    if isinstance(document, str):
        document = {"polynomial": document}
    if not isinstance(document, Mapping):
        raise SpecError(path, "must be an object or a polynomial string")
    label = document.get("label", "")
    if not isinstance(label, str):
        raise SpecError(_join(path, "label"), "must be a string")

    if "polynomial" in document:
        try:
            return convert_text_to_polynomial(document["polynomial"], nvars, label=label)
        except (ParseError, AttributeError) as e:
            raise SpecError(_join(path, "polynomial"), str(e))

    terms = []
    for index, term in enumerate(_list(_require(document, "terms", path), _join(path, "terms"))):
        term_path = f"{_join(path, 'terms')}[{index}]"
        key = "exponents" if isinstance(term, Mapping) and "exps" not in term and "exponents" in term else "exps"
        exps_path = f"{term_path}.{key}"
        exponents = [_integer(e, exps_path) for e in _list(_require(term, key, term_path), exps_path)]
        if len(exponents) != nvars or min(exponents, default=0) < 0:
            raise SpecError(exps_path, f"must be {nvars} non-negative integers")
        try:
            coef = convert_text_to_rational(_require(term, "coef", term_path))
        except ParseError as e:
            raise SpecError(f"{term_path}.coef", str(e))
        terms.append((tuple(exponents), coef))
    try:
        return PolynomialGerm.from_terms(nvars, terms, label=label)
    except ValueError as e:
        raise SpecError(path, str(e))


def parse_char_numbers(document: Any, path: str = "char_numbers") -> CharNumbers:
    dimension = _integer(_require(document, "dimension", path), _join(path, "dimension"))
    numbers = {}
    for index, entry in enumerate(_list(_require(document, "numbers", path), _join(path, "numbers"))):
        entry_path = f"{_join(path, 'numbers')}[{index}]"
        key = tuple(_integer(v, f"{entry_path}.key") for v in _list(_require(entry, "key", entry_path), f"{entry_path}.key"))
        try:
            numbers[key] = convert_text_to_rational(_require(entry, "value", entry_path))
        except ParseError as e:
            raise SpecError(f"{entry_path}.value", str(e))
    try:
        return CharNumbers(dimension=dimension, numbers=numbers)
    except ValueError as e:
        raise SpecError(path, str(e))


def parse_grid(document: Any, path: str) -> SampleGrid:
    """A grid as "rmin,rmax,count,angles" or as {"r_min", "r_max", "count", "angles"}."""
    try:
        if isinstance(document, str):
            return convert_text_to_grid(document)
        return SampleGrid.geometric(
            r_min=_number(_require(document, "r_min", path), _join(path, "r_min")),
            r_max=_number(_require(document, "r_max", path), _join(path, "r_max")),
            count=_integer(_require(document, "count", path), _join(path, "count")),
            angles=_integer(document.get("angles", 8), _join(path, "angles")),
        )
    except (ParseError, ValueError) as e:
        if isinstance(e, SpecError):
            raise
        raise SpecError(path, str(e))


def parse_verify(document: Any, fiber_dimension: int, path: str = "verify") -> VerifySpec:
    mode_text = _require(document, "mode", path)
    try:
        mode = VerifyMode(mode_text)
    except ValueError:
        raise SpecError(_join(path, "mode"), f"unknown mode {mode_text!r}; use one of {[m.value for m in VerifyMode]}")

    nvars = fiber_dimension + 1
    grid = parse_grid(document["grid"], _join(path, "grid")) if "grid" in document else None

    nu = None
    if mode is VerifyMode.monomial:
        values = [_integer(v, _join(path, "nu")) for v in _list(_require(document, "nu", path), _join(path, "nu"))]
        if len(values) != fiber_dimension:
            raise SpecError(_join(path, "nu"), f"must have {fiber_dimension} entries")
        try:
            nu = MonomialExponents(nu=tuple(values))
        except ValueError as e:
            raise SpecError(_join(path, "nu"), str(e))

    chi = None
    if mode is VerifyMode.psi:
        chi_document = document.get("chi", {})
        chi_path = _join(path, "chi")
        if not isinstance(chi_document, Mapping):
            raise SpecError(chi_path, "must be an object")
        try:
            chi = BumpSpec(
                nvars=nvars,
                inner=_number(chi_document.get("inner", 0.5), _join(chi_path, "inner")),
                outer=_number(chi_document.get("outer", 0.75), _join(chi_path, "outer")),
                domain_radius=_number(chi_document.get("domain_radius", 1.0), _join(chi_path, "domain_radius")),
            )
        except NonCompactSupport:
            raise
        except ValueError as e:
            if isinstance(e, SpecError):
                raise
            raise SpecError(chi_path, str(e))

    polynomial = parse_germ(document["polynomial"], nvars, _join(path, "polynomial")) if "polynomial" in document else None
    cutoff = _number(document.get("cutoff_radius", 1.0), _join(path, "cutoff_radius"))
    if cutoff <= 0:
        raise SpecError(_join(path, "cutoff_radius"), "must be positive")
    threshold = _number(document["threshold"], _join(path, "threshold")) if "threshold" in document else None
    return VerifySpec(mode=mode, grid=grid, chi=chi, nu=nu, polynomial=polynomial, cutoff_radius=cutoff, threshold=threshold)


def parse_family_spec(document: Any) -> FamilySpec:
    """
    Validate a decoded JSON document.

    Raises:
        SpecError: With the path of the first offending field, e.g. germs[1].terms[0].coef.
        NonCompactSupport: If the psi cutoff leaves the domain.
    """
    fiber_dimension = _integer(_require(document, "fiber_dimension", "<root>"), "fiber_dimension")
    if fiber_dimension < 1:
        raise SpecError("fiber_dimension", f"must be at least 1, got {fiber_dimension}")
    bundle_rank = _integer(document.get("bundle_rank", 1), "bundle_rank")
    germs = tuple(
        parse_germ(germ, fiber_dimension + 1, f"germs[{index}]")
        for index, germ in enumerate(_list(document.get("germs", []), "germs"))
    )
    char_numbers = parse_char_numbers(document["char_numbers"]) if document.get("char_numbers") is not None else None
    seed = _integer(document["seed"], "seed") if "seed" in document else None
    verify = parse_verify(document["verify"], fiber_dimension) if document.get("verify") is not None else None
    return FamilySpec(fiber_dimension=fiber_dimension, bundle_rank=bundle_rank, germs=germs,
                      char_numbers=char_numbers, seed=seed, verify=verify)


def load_family_spec(filepath: str) -> FamilySpec:
    """
    Raises:
        ParseError: If the file is not JSON.
        SpecError: If the document is not a valid family specification.
    """
    return parse_family_spec(load_json(filepath))
