from dataclasses import dataclass
from fractions import Fraction

from quillen_singularity.asym_fit import ExpansionModel
from quillen_singularity.fiber_integrals import (
    CLOSED_FORM_TOLERANCE,
    IntegralSample,
    MonomialExponents,
    monomial_f_sample,
)


@dataclass(kw_only=True, frozen=True)
class Monomial:
    """
    Samples the model fiber integral f(t) of z^nu over (P^1)^n.
    """
    nu: MonomialExponents
    tolerance: float = CLOSED_FORM_TOLERANCE

    def __call__(self, counter: int, t: complex) -> IntegralSample:
        return monomial_f_sample(t, self.nu, self.tolerance)

    def default_model(self) -> ExpansionModel:
        """Exponents 1/nu_i and 1 to first order, with log powers up to the number of factors."""
        exponents = sorted({Fraction(1, v) for v in self.nu.nu if v > 0} | {Fraction(1)})
        return ExpansionModel(smooth_order=2, exponents=tuple(exponents), max_log_power=self.nu.n, singular_order=1)
