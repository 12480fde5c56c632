from dataclasses import dataclass
from typing import Optional

from quillen_singularity.asym_fit import ExpansionModel
from quillen_singularity.fiber_integrals import (
    MONTE_CARLO_TOLERANCE,
    BumpSpec,
    IntegralSample,
    derive_seed,
    psi_integral,
)
from quillen_singularity.milnor import PolynomialGerm


@dataclass(kw_only=True, frozen=True)
class Psi:
    """
    Samples psi(t), the integral of log|F - t|^2 against a bump chi, by quasi-Monte-Carlo.

    Every grid point gets its own seed, hashed from the run seed and its position.
    """
    germ: PolynomialGerm
    chi: BumpSpec
    seed: int = 0
    log2_points: int = 12
    batches: int = 8
    tolerance: Optional[float] = MONTE_CARLO_TOLERANCE

    def __post_init__(self):
        if self.germ.nvars != self.chi.nvars:
            raise ValueError(f"Germ has {self.germ.nvars} variables but the bump has {self.chi.nvars}.")

    def __call__(self, counter: int, t: complex) -> IntegralSample:
        return psi_integral(self.germ, self.chi, t, seed=derive_seed(self.seed, counter),
                            log2_points=self.log2_points, batches=self.batches, tolerance=self.tolerance)

    def default_model(self) -> ExpansionModel:
        """Smooth part, plus |t|^2 times log powers up to the fiber dimension."""
        return ExpansionModel(smooth_order=2, exponents=(1,), max_log_power=self.germ.nvars - 1, singular_order=0)
