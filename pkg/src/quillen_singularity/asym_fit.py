"""
Least-squares fits of sampled germs to finite pieces of the expansion space

    C^inf  +  sum over r in (0, 1], k <= k_max of |t|^{2r} (log|t|)^k C^inf

together with the divergent column log|t|^2.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from quillen_singularity.errors import IllConditioned, InsufficientSamples
from quillen_singularity.fiber_integrals import IntegralSample

logger = logging.getLogger(__name__)

# (exponent a, log power k) of the column |t|^{2a} (log|t|)^k
TermKey = Tuple[Fraction, int]

CONDITION_THRESHOLD = 1e12
SCAN_IMPROVEMENT = 0.1


@dataclass(frozen=True, kw_only=True)
class ExpansionModel:
    """
    Columns of a fit.

    Attributes:
        smooth_order (int): Largest j of the smooth columns |t|^{2j}.
        exponents (tuple[Fraction, ...]): Singular exponents r in (0, 1].
        max_log_power (int): Largest power k of log|t| next to a singular exponent.
        singular_order (int): Largest j of the columns |t|^{2(r+j)} (log|t|)^k; the smooth
            factor of each singular term is expanded that far.
    """
    smooth_order: int = 3
    exponents: Tuple[Fraction, ...] = ()
    max_log_power: int = 1
    singular_order: int = 0

    def __post_init__(self):
        exponents = tuple(Fraction(r) for r in self.exponents)
        if any(not 0 < r <= 1 for r in exponents):
            raise ValueError(f"Exponents must lie in (0, 1], got {[str(r) for r in exponents]}.")
        if self.smooth_order < 0 or self.max_log_power < 0 or self.singular_order < 0:
            raise ValueError("Orders and the log power must be non-negative.")
        object.__setattr__(self, "exponents", exponents)

    def with_exponent(self, r: Fraction) -> "ExpansionModel":
        return replace(self, exponents=tuple(sorted(self.exponents + (Fraction(r),))))

    def term_keys(self) -> List[TermKey]:
        """
        Keys of every column besides 1 and log|t|^2, smooth columns first.

        A singular column without logarithm that coincides with a smooth one is left out.
        """
        keys = [(Fraction(j), 0) for j in range(1, self.smooth_order + 1)]
        for r in self.exponents:
            for j in range(self.singular_order + 1):
                a = r + j
                for k in range(self.max_log_power + 1):
                    if k == 0 and a.denominator == 1 and a <= self.smooth_order:
                        continue
                    keys.append((a, k))
        return keys

    @property
    def parameter_count(self) -> int:
        return 2 + len(self.term_keys())


def _column(key: TermKey) -> Callable[[np.ndarray], np.ndarray]:
    a, k = key
    return lambda r: r ** (2 * float(a)) * np.log(r) ** k


@dataclass(frozen=True, kw_only=True)
class FitResult:
    """
    Attributes:
        log_coeff (float): Coefficient of log|t|^2.
        constant (float): Coefficient of 1.
        term_coeffs (dict[tuple[Fraction, int], float]): Coefficient of |t|^{2a} (log|t|)^k per (a, k).
        residual_rms (float): Root mean square residual on the held-out radii.
        condition_estimate (float): Condition number of the column-scaled design matrix.
        model (ExpansionModel): The model that was fitted.
    """
    log_coeff: float
    constant: float
    term_coeffs: Dict[TermKey, float] = field(default_factory=dict)
    residual_rms: float
    condition_estimate: float
    model: ExpansionModel

    def evaluate(self, radius: np.ndarray) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        total = self.constant + self.log_coeff * np.log(radius ** 2)
        for key, coeff in self.term_coeffs.items():
            total = total + coeff * _column(key)(radius)
        return total


def _split_by_radius(samples: Sequence[IntegralSample]) -> Tuple[List[IntegralSample], List[IntegralSample]]:
    """Fit rows and held-out rows: every second distinct radius, counted from the smallest, is held out."""
    groups = _group_by_radius(samples)
    fit, held_out = [], []
    for index, group in enumerate(groups):
        (held_out if index % 2 else fit).extend(group)
    return fit, held_out


def _group_by_radius(samples: Sequence[IntegralSample]) -> List[List[IntegralSample]]:
    ordered = sorted(samples, key=lambda s: s.radius)
    groups: List[List[IntegralSample]] = []
    for sample in ordered:
        if groups and math.isclose(sample.radius, groups[-1][0].radius, rel_tol=1e-9):
            groups[-1].append(sample)
        else:
            groups.append([sample])
    return groups


def fit_b0(samples: Sequence[IntegralSample], model: ExpansionModel,
           condition_threshold: float = CONDITION_THRESHOLD) -> FitResult:
    """
    Fit samples to 1, log|t|^2 and the columns of the model.

    Columns are scaled to unit norm before the least-squares solve; the condition number
    is taken on the scaled matrix. The residual is measured on every second radius, which
    is left out of the solve.

    Args:
        samples (Sequence[IntegralSample]): Samples at t != 0, possibly several per radius.
        model (ExpansionModel): Columns to fit.
        condition_threshold (float): Largest acceptable condition number.

    Returns:
        FitResult: Coefficients and diagnostics.

    Raises:
        InsufficientSamples: If there are fewer than two fit rows per parameter.
        IllConditioned: If the scaled design matrix has condition number above the threshold.
    """
    if any(s.radius == 0 for s in samples):
        raise ValueError("Samples at t = 0 cannot be fitted against log|t|^2.")
    fit_rows, held_out = _split_by_radius(samples)
    keys = model.term_keys()
    parameters = 2 + len(keys)
    if len(fit_rows) < 2 * parameters:
        raise InsufficientSamples(f"{len(fit_rows)} fit samples for {parameters} parameters; need {2 * parameters}.")

    columns = [lambda r: np.ones_like(r), lambda r: np.log(r ** 2)] + [_column(key) for key in keys]

    def design(rows: Sequence[IntegralSample]) -> np.ndarray:
        radius = np.array([s.radius for s in rows])
        return np.column_stack([column(radius) for column in columns])

    matrix = design(fit_rows)
    values = np.array([s.value for s in fit_rows])
    norms = np.linalg.norm(matrix, axis=0)
    norms[norms == 0] = 1.0
    scaled = matrix / norms
    condition = float(np.linalg.cond(scaled))
    if not condition <= condition_threshold:
        raise IllConditioned(f"Design matrix condition number {condition:.3g} exceeds {condition_threshold:.3g}.", condition)

    solution, *_ = np.linalg.lstsq(scaled, values, rcond=None)
    coeffs = solution / norms
    if held_out:
        residual = design(held_out) @ coeffs - np.array([s.value for s in held_out])
        residual_rms = float(np.sqrt(np.mean(residual ** 2)))
    else:
        residual_rms = float("nan")
    logger.info("Fitted %d parameters on %d samples, condition %.3g, held-out rms %.3g.",
                parameters, len(fit_rows), condition, residual_rms)
    return FitResult(
        log_coeff=float(coeffs[1]),
        constant=float(coeffs[0]),
        term_coeffs={key: float(c) for key, c in zip(keys, coeffs[2:])},
        residual_rms=residual_rms,
        condition_estimate=condition,
        model=model,
    )


def s1_average(raw: Sequence[IntegralSample]) -> List[IntegralSample]:
    """
    Average samples over the angles of each radius.

    The averaged sample sits at t = radius; its error is the mean error over sqrt(angles).
    """
    averaged = []
    for group in _group_by_radius(raw):
        radius = float(np.mean([s.radius for s in group]))
        value = float(np.mean([s.value for s in group]))
        error = float(np.mean([s.est_error for s in group])) / math.sqrt(len(group))
        averaged.append(IntegralSample(t=complex(radius), value=value, est_error=error))
    return averaged


def exponent_scan(samples: Sequence[IntegralSample], base_model: ExpansionModel, candidates: Sequence[Fraction],
                  improvement: float = SCAN_IMPROVEMENT, condition_threshold: float = CONDITION_THRESHOLD) -> ExpansionModel:
    """
    Greedy forward selection of singular exponents.

    Each round adds the candidate with the smallest held-out residual, as long as it cuts
    the residual by at least `improvement` and the residual is above the noise floor of the
    data. Candidates whose model is ill-conditioned are skipped. This is a heuristic: it
    can only find exponents from the candidate list.
    """
    values = np.array([s.value for s in samples])
    floor = 1e-10 * max(1.0, float(np.max(np.abs(values)))) if len(values) else 0.0
    floor = max(floor, float(np.median([s.est_error for s in samples])) if len(samples) else 0.0)

    model = base_model
    score = fit_b0(samples, model, condition_threshold).residual_rms
    remaining = [Fraction(r) for r in candidates if Fraction(r) not in base_model.exponents]
    while remaining and score > floor:
        best: Optional[Tuple[float, Fraction]] = None
        for r in remaining:
            try:
                trial = fit_b0(samples, model.with_exponent(r), condition_threshold).residual_rms
            except (IllConditioned, InsufficientSamples) as e:
                logger.warning("Skipping exponent %s: %s", r, e)
                continue
            if best is None or trial < best[0]:
                best = (trial, r)
        if best is None or best[0] > (1 - improvement) * score:
            break
        score, chosen = best
        logger.debug("Selected exponent %s, held-out rms %.3g.", chosen, score)
        model = model.with_exponent(chosen)
        remaining.remove(chosen)
    return model


def integrate_radial(term_coeffs: Mapping[TermKey, float]) -> Dict[TermKey, float]:
    """
    Coefficients of G(r) = integral from 0 to r of g(u) du/u, for g(u) = sum c u^{2a} (log u)^k.

    Uses integral_0^r u^{m-1} (log u)^k du = r^m sum_l (-1)^{k-l} k!/(l! m^{k-l+1}) (log r)^l
    with m = 2a. Applied to (r d/dr)^2 f this gives r d/dr f up to its constant.

    Raises:
        ValueError: If an exponent is not positive.
    """
    result: Dict[TermKey, float] = {}
    for (a, k), coeff in term_coeffs.items():
        a = Fraction(a)
        if a <= 0:
            raise ValueError(f"u^{2 * a} (log u)^{k} / u is not integrable at 0.")
        m = 2 * a
        for l in range(k + 1):
            factor = (-1) ** (k - l) * Fraction(factorial(k), factorial(l)) / m ** (k - l + 1)
            result[(a, l)] = result.get((a, l), 0.0) + coeff * float(factor)
    return result


def two_point_slope(samples: Sequence[IntegralSample]) -> float:
    """
    (psi(r1) - psi(r2)) / (log r1^2 - log r2^2) on the two smallest radii, after averaging
    over angles.

    Raises:
        InsufficientSamples: If fewer than two radii are present.
    """
    averaged = s1_average(samples)
    if len(averaged) < 2:
        raise InsufficientSamples("A two-point slope needs two distinct radii.")
    first, second = averaged[0], averaged[1]
    return (first.value - second.value) / (math.log(first.radius ** 2) - math.log(second.radius ** 2))
