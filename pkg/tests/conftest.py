import hypothesis
import numpy as np
import pytest

from quillen_singularity.fiber_integrals import IntegralSample, SampleGrid

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)


@pytest.fixture
def small_grid() -> SampleGrid:
    return SampleGrid.geometric(1e-4, 1e-1, 12, 4)


@pytest.fixture
def exact_samples():
    """Builds samples of a radial function on a geometric grid, one angle per radius."""
    def build(func, r_min: float = 1e-6, r_max: float = 1e-1, count: int = 40):
        return [IntegralSample(t=complex(r), value=float(func(r)), est_error=0.0)
                for r in np.geomspace(r_min, r_max, count)]
    return build
