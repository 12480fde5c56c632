import math
from fractions import Fraction

import numpy as np
import pytest

from quillen_singularity.asym_fit import (
    ExpansionModel,
    exponent_scan,
    fit_b0,
    integrate_radial,
    s1_average,
    two_point_slope,
)
from quillen_singularity.errors import IllConditioned, InsufficientSamples
from quillen_singularity.fiber_integrals import IntegralSample, MonomialExponents, monomial_density, monomial_f
from quillen_singularity.samplers import Monomial

HALF, THIRD = Fraction(1, 2), Fraction(1, 3)


def test_log_plus_constant_is_recovered(exact_samples):
    fit = fit_b0(exact_samples(lambda r: 3 + math.log(r ** 2)), ExpansionModel(smooth_order=0))
    assert fit.log_coeff == pytest.approx(1.0, rel=1e-9)
    assert fit.constant == pytest.approx(3.0, rel=1e-9)
    assert fit.residual_rms < 1e-9


def test_smooth_germ_has_no_log_term(exact_samples):
    fit = fit_b0(exact_samples(lambda r: math.log1p(r ** 2)), ExpansionModel())
    assert fit.log_coeff == pytest.approx(0.0, abs=1e-6)
    assert fit.term_coeffs[(Fraction(1), 0)] == pytest.approx(1.0, abs=1e-5)


def test_half_exponent_is_recovered(exact_samples):
    model = ExpansionModel(smooth_order=2, exponents=(HALF,), max_log_power=0, singular_order=2)
    fit = fit_b0(exact_samples(lambda r: math.log1p(r)), model)
    assert fit.log_coeff == pytest.approx(0.0, abs=1e-5)
    assert fit.term_coeffs[(HALF, 0)] == pytest.approx(1.0, abs=1e-4)


def test_function_in_the_span_is_exact(exact_samples):
    def func(r):
        return 2 + 0.5 * math.log(r ** 2) + 3 * r ** 2 - 0.7 * r ** 2 * math.log(r)

    model = ExpansionModel(smooth_order=1, exponents=(Fraction(1),), max_log_power=1)
    fit = fit_b0(exact_samples(func, 1e-3, 0.9), model)
    assert fit.constant == pytest.approx(2.0, rel=1e-9)
    assert fit.log_coeff == pytest.approx(0.5, rel=1e-9)
    assert fit.term_coeffs[(Fraction(1), 0)] == pytest.approx(3.0, rel=1e-9)
    assert fit.term_coeffs[(Fraction(1), 1)] == pytest.approx(-0.7, rel=1e-9)
    radii = np.geomspace(1e-3, 0.9, 7)
    np.testing.assert_allclose(fit.evaluate(radii), [func(r) for r in radii], rtol=1e-9)


def test_residual_is_measured_on_held_out_radii(exact_samples):
    samples = exact_samples(lambda r: 1 + math.log(r ** 2), count=20)
    shifted = [IntegralSample(t=s.t, value=s.value + (index % 2), est_error=0.0) for index, s in enumerate(samples)]
    fit = fit_b0(shifted, ExpansionModel(smooth_order=0))
    assert fit.log_coeff == pytest.approx(1.0, rel=1e-9)
    assert fit.residual_rms == pytest.approx(1.0, rel=1e-9)


def test_duplicate_exponent_is_ill_conditioned(exact_samples):
    model = ExpansionModel(smooth_order=0, exponents=(HALF, HALF), max_log_power=0)
    with pytest.raises(IllConditioned) as info:
        fit_b0(exact_samples(lambda r: r), model)
    assert info.value.condition_estimate > 1e12


def test_too_few_samples(exact_samples):
    with pytest.raises(InsufficientSamples):
        fit_b0(exact_samples(lambda r: r, count=5), ExpansionModel())


def test_singular_fiber_sample_is_rejected(exact_samples):
    samples = exact_samples(lambda r: r) + [IntegralSample(t=0j, value=0.0, est_error=0.0)]
    with pytest.raises(ValueError):
        fit_b0(samples, ExpansionModel())


def test_term_keys():
    model = ExpansionModel(smooth_order=1, exponents=(HALF, Fraction(1)), max_log_power=1)
    assert model.term_keys() == [(Fraction(1), 0), (HALF, 0), (HALF, 1), (Fraction(1), 1)]
    assert model.parameter_count == 6
    assert model.with_exponent(THIRD).exponents == (THIRD, HALF, Fraction(1))
    with pytest.raises(ValueError):
        ExpansionModel(exponents=(Fraction(3, 2),))
    with pytest.raises(ValueError):
        ExpansionModel(smooth_order=-1)


def test_s1_average_removes_angular_noise():
    raw = [IntegralSample(t=r * np.exp(2j * np.pi * k / 8), value=math.log(r) + 0.1 * math.cos(2 * math.pi * k / 8), est_error=0.08)
           for r in [1e-3, 1e-2, 1e-1] for k in range(8)]
    averaged = s1_average(raw)
    assert len(averaged) == 3
    for sample, r in zip(averaged, [1e-3, 1e-2, 1e-1]):
        assert sample.t == pytest.approx(r)
        assert sample.value == pytest.approx(math.log(r), abs=1e-12)
        assert sample.est_error == pytest.approx(0.08 / math.sqrt(8))


def test_s1_average_single_angle_is_identity(exact_samples):
    samples = exact_samples(math.log, count=6)
    assert [s.value for s in s1_average(samples)] == [s.value for s in samples]


def test_scan_finds_half_exponent(exact_samples):
    samples = exact_samples(lambda r: r)
    model = exponent_scan(samples, ExpansionModel(smooth_order=2, max_log_power=0), [THIRD, HALF, Fraction(1)])
    assert model.exponents == (HALF,)


def test_scan_finds_logarithmic_term(exact_samples):
    samples = exact_samples(lambda r: r ** (2 / 3) * math.log(r))
    model = exponent_scan(samples, ExpansionModel(smooth_order=2, max_log_power=1), [HALF, THIRD])
    assert model.exponents == (THIRD,)
    fit = fit_b0(samples, model)
    assert fit.term_coeffs[(THIRD, 1)] == pytest.approx(1.0, rel=1e-6)


def test_scan_keeps_smooth_model(exact_samples):
    samples = exact_samples(lambda r: 1 + r ** 2 - r ** 4)
    base = ExpansionModel(smooth_order=2, max_log_power=0)
    assert exponent_scan(samples, base, [THIRD, HALF]) == base


def test_integrate_radial():
    assert integrate_radial({(Fraction(1), 0): 1.0}) == {(Fraction(1), 0): 0.5}
    # (r d/dr) of r^{2a} (log r)^2 is 2a r^{2a} (log r)^2 + 2 r^{2a} log r
    a = THIRD
    primitive = integrate_radial({(a, 2): 2 * float(a), (a, 1): 2.0})
    assert primitive[(a, 2)] == pytest.approx(1.0)
    assert primitive[(a, 1)] == pytest.approx(0.0, abs=1e-12)
    assert primitive[(a, 0)] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        integrate_radial({(Fraction(0), 0): 1.0})


@pytest.mark.slow
def test_density_fit_integrates_to_function_fit(exact_samples):
    nu = MonomialExponents(nu=(1, 1))
    model = Monomial(nu=nu).default_model()
    f_fit = fit_b0(exact_samples(lambda r: monomial_f(r, nu)), model)
    g_fit = fit_b0(exact_samples(lambda r: monomial_density(r, nu)), model)
    # f = -r^2 log r^2 / (1 - r^2), so both fits lie in B0
    assert f_fit.log_coeff == pytest.approx(0.0, abs=1e-3)
    assert g_fit.log_coeff == pytest.approx(0.0, abs=1e-3)
    one = Fraction(1)
    assert f_fit.term_coeffs[(one, 1)] == pytest.approx(-2.0, abs=1e-2)
    assert g_fit.term_coeffs[(one, 1)] == pytest.approx(-8.0, abs=2e-2)
    leading = {key: c for key, c in g_fit.term_coeffs.items() if key[0] == one}
    twice = integrate_radial(integrate_radial(leading))
    for k in range(model.max_log_power + 1):
        assert twice.get((one, k), 0.0) == pytest.approx(f_fit.term_coeffs.get((one, k), 0.0), abs=2e-2)


def test_two_point_slope(exact_samples):
    assert two_point_slope(exact_samples(lambda r: 0.25 * math.log(r ** 2) + 5, count=3)) == pytest.approx(0.25)
    with pytest.raises(InsufficientSamples):
        two_point_slope(exact_samples(math.log, count=1))
