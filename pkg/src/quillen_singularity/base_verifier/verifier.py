import logging
from dataclasses import dataclass
from typing import List, Optional

from quillen_singularity.asym_fit import (
    CONDITION_THRESHOLD,
    ExpansionModel,
    FitResult,
    fit_b0,
    s1_average,
    two_point_slope,
)
from quillen_singularity.fiber_integrals import IntegralSample, SampleGrid, evaluate_grid
from quillen_singularity.samplers.protocols import Sampler

logger = logging.getLogger(__name__)


@dataclass(kw_only=True, frozen=True)
class VerificationOutcome:
    """
    Attributes:
        raw_samples (list[IntegralSample]): One sample per grid point, in grid order.
        averaged (list[IntegralSample]): Samples averaged over the angles of each radius.
        fit (FitResult): Least-squares fit of the averaged samples.
        slope (float): Two-point log slope on the two smallest radii.
    """
    raw_samples: List[IntegralSample]
    averaged: List[IntegralSample]
    fit: FitResult
    slope: float


@dataclass(kw_only=True, frozen=True)
class Verifier:
    """
    Samples a fiber integral on a grid and fits its expansion near t = 0.

    Attributes:
        sampler (Sampler): Evaluates the integral at one t.
        grid (SampleGrid): Values of t.
        model (Optional[ExpansionModel]): Columns of the fit; the sampler's default when None.
        threads (int): Number of workers used for sampling.
        condition_threshold (float): Largest acceptable condition number of the fit.
    """
    sampler: Sampler
    grid: SampleGrid
    model: Optional[ExpansionModel] = None
    threads: int = 1
    condition_threshold: float = CONDITION_THRESHOLD

    def sample(self) -> List[IntegralSample]:
        """
        Evaluate the sampler on every grid point.

        Returns:
            List[IntegralSample]: The samples in grid order.

        Raises:
            QuadratureFailure: If one of the integrals does not reach its tolerance.
        """
        return evaluate_grid(self.sampler, self.grid, self.threads)

    def verify(self) -> VerificationOutcome:
        """
        Sample, average over angles and fit.

        Returns:
            VerificationOutcome: Samples, fit and two-point slope.

        Raises:
            QuadratureFailure: If sampling fails.
            IllConditioned: If the fit is numerically rank deficient.
            InsufficientSamples: If the grid is too small for the model.
        """
        raw = self.sample()
        averaged = s1_average(raw)
        model = self.model or self.sampler.default_model()
        fit = fit_b0(averaged, model, self.condition_threshold)
        slope = two_point_slope(averaged)
        logger.info("log|t|^2 coefficient %.6g, two-point slope %.6g.", fit.log_coeff, slope)
        return VerificationOutcome(raw_samples=raw, averaged=averaged, fit=fit, slope=slope)
