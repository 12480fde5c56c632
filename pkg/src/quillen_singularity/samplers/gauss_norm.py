from dataclasses import dataclass
from typing import Tuple

from quillen_singularity.asym_fit import ExpansionModel
from quillen_singularity.fiber_integrals import (
    CLOSED_FORM_TOLERANCE,
    IntegralSample,
    gauss_norm_integral_with_error,
)
from quillen_singularity.milnor import PolynomialGerm


@dataclass(kw_only=True, frozen=True)
class GaussNorm:
    """
    Samples the sum over the critical points of the integral of log||dpi||^2 against
    (dd^c log||dpi||^2)^n on the Milnor fiber. Its log|t|^2 coefficient is the sum of
    the Milnor numbers.

    Attributes:
        germs (tuple[PolynomialGerm, ...]): Local models, each c*z0*z1 or c*sum z_i^2.
        cutoff_radius (float): Radius of the Milnor ball.
        tolerance (float): Quadrature tolerance.
    """
    germs: Tuple[PolynomialGerm, ...]
    cutoff_radius: float = 1.0
    tolerance: float = CLOSED_FORM_TOLERANCE

    def __call__(self, counter: int, t: complex) -> IntegralSample:
        value, error = 0.0, 0.0
        for germ in self.germs:
            v, e = gauss_norm_integral_with_error(t, germ, self.cutoff_radius, self.tolerance)
            value, error = value + v, error + e
        return IntegralSample(t=t, value=value, est_error=error)

    def default_model(self) -> ExpansionModel:
        return ExpansionModel(smooth_order=2, exponents=(1,), max_log_power=1, singular_order=1)
