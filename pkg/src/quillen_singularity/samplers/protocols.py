from typing import Protocol

from quillen_singularity.asym_fit import ExpansionModel
from quillen_singularity.fiber_integrals import IntegralSample


class Sampler(Protocol):
    """
    Protocol for any callable that evaluates a fiber integral at one point of the base.

    Methods:
        default_model() -> ExpansionModel:
            The expansion the sampled function is expected to follow near t = 0.
    """
    def __call__(self, counter: int, t: complex) -> IntegralSample:
        """
        Evaluate the integral at t.

        Args:
            counter (int): Position of t in the sample grid; seeds are derived from it.
            t (complex): Point of the base disc.

        Returns:
            IntegralSample: The value and its error estimate.
        """
        ...

    def default_model(self) -> ExpansionModel:
        ...
