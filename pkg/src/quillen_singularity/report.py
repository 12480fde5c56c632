"""
Reports of the predict, verify and milnor commands.

A report serialises to JSON with sorted keys. Rationals are written as "p/q" strings and
non-finite floats as null, so that a report parsed back compares equal to the original.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from quillen_singularity.file_utils import dump_json
from quillen_singularity.string_utils import convert_text_to_rational, format_rational

RELATIVE_ERROR_FLOOR = 1e-12
_FLOAT_FIELDS = ("log_coeff", "fitted_coeff", "relative_error", "condition_estimate", "residual_rms", "two_point_slope",
                 "chi_mass")


def relative_error(fitted: float, predicted: Fraction) -> float:
    """|fitted - predicted| / max(|predicted|, 1e-12)."""
    return abs(fitted - float(predicted)) / max(abs(float(predicted)), RELATIVE_ERROR_FLOOR)


def _finite(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _rational(value: Optional[Fraction]) -> Optional[str]:
    return None if value is None else format_rational(value)


def _from_rational(value: Optional[str]) -> Optional[Fraction]:
    return None if value is None else convert_text_to_rational(value)


@dataclass(kw_only=True, frozen=True)
class MilnorEntry:
    """
    Attributes:
        label (str): Name of the germ.
        polynomial (str): The germ in surface syntax.
        mu (int | str): The Milnor number, or "infinite" for a non-isolated critical point.
        degree_bound_used (int): Largest truncation degree examined.
        quasi_homogeneous_mu (Optional[int]): Weighted count, for quasi-homogeneous germs.
    """
    label: str
    polynomial: str
    mu: Union[int, str]
    degree_bound_used: int
    quasi_homogeneous_mu: Optional[int] = None


@dataclass(kw_only=True, frozen=True)
class VerificationSummary:
    """
    Attributes:
        mode (str): The verification mode.
        target (Fraction): Exact value the fitted coefficient is compared with.
        log_coeff (Optional[float]): Fitted coefficient of log|t|^2 of the sampled integral.
        fitted_coeff (Optional[float]): The fitted value on the scale of the target.
        relative_error (Optional[float]): |fitted - target| / max(|target|, 1e-12).
        threshold (float): Pass threshold.
        passed (bool): Whether the check passed. A zero target passes when |fitted| < threshold.
        condition_estimate (Optional[float]): Condition number of the fit.
        residual_rms (Optional[float]): Held-out residual of the fit.
        two_point_slope (Optional[float]): Log slope on the two smallest radii.
        term_coeffs (dict[str, float]): Fitted coefficients keyed "a:k" for |t|^{2a}(log|t|)^k.
        sample_count (int): Number of raw samples.
        chi_mass (Optional[float]): Total mass of the cutoff chi, in psi mode.
        error (Optional[str]): Numerical failure that stopped the verification.
    """
    mode: str
    target: Fraction
    log_coeff: Optional[float] = None
    fitted_coeff: Optional[float] = None
    relative_error: Optional[float] = None
    threshold: float
    passed: bool = False
    condition_estimate: Optional[float] = None
    residual_rms: Optional[float] = None
    two_point_slope: Optional[float] = None
    term_coeffs: Dict[str, float] = field(default_factory=dict)
    sample_count: int = 0
    chi_mass: Optional[float] = None
    error: Optional[str] = None

    def __post_init__(self):
        for key in _FLOAT_FIELDS:
            object.__setattr__(self, key, _finite(getattr(self, key)))
        object.__setattr__(self, "term_coeffs", {k: _finite(v) for k, v in self.term_coeffs.items()})

    def to_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document["target"] = format_rational(self.target)
        return document

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> "VerificationSummary":
        values = dict(document)
        values["target"] = convert_text_to_rational(values["target"])
        values["term_coeffs"] = dict(values.get("term_coeffs", {}))
        return cls(**values)


@dataclass(kw_only=True, frozen=True)
class Report:
    """
    Attributes:
        command (str): The command that produced the report.
        fiber_dimension (Optional[int]): n.
        bundle_rank (Optional[int]): Rank of xi.
        milnor_table (tuple[MilnorEntry, ...]): Milnor number per germ.
        milnor_sum (Optional[int]): Sum of the Milnor numbers.
        predicted_coeff (Optional[Fraction]): Exact log|t|^2 coefficient from the Milnor numbers.
        char_numbers_coeff (Optional[Fraction]): Exact coefficient from the characteristic numbers.
        cross_check (Optional[bool]): Whether both exact coefficients agree, when both apply.
        verification (Optional[VerificationSummary]): Numerical verification.
        errors (tuple[str, ...]): Errors met while building the report.
        timings (Optional[dict[str, float]]): Wall-clock seconds per phase, only when requested.
    """
    command: str
    fiber_dimension: Optional[int] = None
    bundle_rank: Optional[int] = None
    milnor_table: Tuple[MilnorEntry, ...] = ()
    milnor_sum: Optional[int] = None
    predicted_coeff: Optional[Fraction] = None
    char_numbers_coeff: Optional[Fraction] = None
    cross_check: Optional[bool] = None
    verification: Optional[VerificationSummary] = None
    errors: Tuple[str, ...] = ()
    timings: Optional[Dict[str, float]] = None

    @property
    def fitted_coeff(self) -> Optional[float]:
        return self.verification.fitted_coeff if self.verification else None

    @property
    def relative_error(self) -> Optional[float]:
        return self.verification.relative_error if self.verification else None

    @property
    def passed(self) -> bool:
        """No errors, and a passing verification when one ran."""
        return not self.errors and (self.verification is None or self.verification.passed)

    def to_dict(self) -> Dict[str, Any]:
        document = {
            "command": self.command,
            "fiber_dimension": self.fiber_dimension,
            "bundle_rank": self.bundle_rank,
            "milnor_table": [asdict(entry) for entry in self.milnor_table],
            "milnor_sum": self.milnor_sum,
            "predicted_coeff": _rational(self.predicted_coeff),
            "char_numbers_coeff": _rational(self.char_numbers_coeff),
            "cross_check": self.cross_check,
            "verification": self.verification.to_dict() if self.verification else None,
            "errors": list(self.errors),
        }
        if self.timings is not None:
            document["timings"] = dict(self.timings)
        return document

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> "Report":
        verification = document.get("verification")
        return cls(
            command=document["command"],
            fiber_dimension=document.get("fiber_dimension"),
            bundle_rank=document.get("bundle_rank"),
            milnor_table=tuple(MilnorEntry(**entry) for entry in document.get("milnor_table", [])),
            milnor_sum=document.get("milnor_sum"),
            predicted_coeff=_from_rational(document.get("predicted_coeff")),
            char_numbers_coeff=_from_rational(document.get("char_numbers_coeff")),
            cross_check=document.get("cross_check"),
            verification=VerificationSummary.from_dict(verification) if verification else None,
            errors=tuple(document.get("errors", [])),
            timings=document.get("timings"),
        )

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        """Human readable summary."""
        lines = [f"command: {self.command}"]
        if self.fiber_dimension is not None:
            lines.append(f"fiber dimension n = {self.fiber_dimension}, bundle rank = {self.bundle_rank}")
        for entry in self.milnor_table:
            name = entry.label or entry.polynomial
            lines.append(f"  mu({name}) = {entry.mu}")
        if self.milnor_sum is not None:
            lines.append(f"sum of Milnor numbers: {self.milnor_sum}")
        if self.predicted_coeff is not None:
            lines.append(f"predicted log|t|^2 coefficient: {format_rational(self.predicted_coeff)}")
        if self.char_numbers_coeff is not None:
            lines.append(f"coefficient from characteristic numbers: {format_rational(self.char_numbers_coeff)}")
        if self.cross_check is not None:
            lines.append(f"cross-check: {'agree' if self.cross_check else 'DISAGREE'}")
        if self.verification:
            v = self.verification
            lines.append(f"verification ({v.mode}): target {format_rational(v.target)}, "
                         f"fitted {v.fitted_coeff}, relative error {v.relative_error}, "
                         f"{'passed' if v.passed else 'FAILED'} at threshold {v.threshold}")
            if v.chi_mass is not None:
                lines.append(f"  cutoff mass {v.chi_mass}")
            if v.error:
                lines.append(f"  error: {v.error}")
            lines.append(f"  log coefficient {v.log_coeff}, two-point slope {v.two_point_slope}, "
                         f"condition {v.condition_estimate}, held-out rms {v.residual_rms}")
        for error in self.errors:
            lines.append(f"error: {error}")
        if self.timings:
            for phase, seconds in sorted(self.timings.items()):
                lines.append(f"time {phase}: {seconds:.3f}s")
        return "\n".join(lines) + "\n"
