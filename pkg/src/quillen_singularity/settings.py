from dataclasses import dataclass, field, replace
from typing import Any

from quillen_singularity.asym_fit import CONDITION_THRESHOLD
from quillen_singularity.fiber_integrals import CLOSED_FORM_TOLERANCE, MONTE_CARLO_TOLERANCE, SampleGrid
from quillen_singularity.series_ring import DEFAULT_ORDER, MAX_ORDER


@dataclass(kw_only=True, frozen=True)
class RunSettings:
    """
    Defaults of a run. Command-line flags override the family spec, which overrides these.

    Attributes:
        order (int): Truncation order of printed series.
        grid (SampleGrid): Values of t sampled by verify.
        seed (int): Seed of the Monte-Carlo paths.
        threads (int): Number of sampling workers.
        monte_carlo_threshold (float): Pass threshold of Monte-Carlo verifications.
        closed_form_threshold (float): Pass threshold of verifications by deterministic quadrature.
        condition_threshold (float): Largest acceptable condition number of a fit.
        closed_form_tolerance (float): Quadrature tolerance of the deterministic paths.
        monte_carlo_tolerance (float): Largest acceptable relative error estimate of a Monte-Carlo integral.
        log2_points (int): Each Monte-Carlo batch uses 2**log2_points Sobol points.
        batches (int): Number of independent scramblings per Monte-Carlo integral.
    """
    order: int = DEFAULT_ORDER
    grid: SampleGrid = field(default_factory=SampleGrid.geometric)
    seed: int = 0
    threads: int = 1
    monte_carlo_threshold: float = 0.05
    closed_form_threshold: float = 0.01
    condition_threshold: float = CONDITION_THRESHOLD
    closed_form_tolerance: float = CLOSED_FORM_TOLERANCE
    monte_carlo_tolerance: float = MONTE_CARLO_TOLERANCE
    log2_points: int = 12
    batches: int = 8

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"Order must lie in 0..{MAX_ORDER}, got {self.order}.")
        if self.threads < 1:
            raise ValueError(f"Need at least one thread, got {self.threads}.")
        if self.batches < 2:
            raise ValueError(f"Need at least two Monte-Carlo batches, got {self.batches}.")

    def override(self, **values: Any) -> "RunSettings":
        """A copy with every value that is not None replaced."""
        return replace(self, **{key: value for key, value in values.items() if value is not None})

