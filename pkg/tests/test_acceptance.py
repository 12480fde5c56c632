"""End-to-end checks of the whole pipeline at desk scale."""
import itertools
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from quillen_singularity.base_verifier.verifier import Verifier
from quillen_singularity.chern_calculus import CharNumbers, char_numbers_coefficient, milnor_coefficient
from quillen_singularity.cli import cmd_verify
from quillen_singularity.family_spec import parse_family_spec
from quillen_singularity.fiber_integrals import BumpSpec, MonomialExponents, SampleGrid, monomial_f, monomial_f_direct
from quillen_singularity.milnor import milnor_number, milnor_quasihomogeneous
from quillen_singularity.samplers import GaussNorm
from quillen_singularity.settings import RunSettings
from quillen_singularity.string_utils import convert_text_to_polynomial

RADII = np.geomspace(1e-3, 0.5, 10)


@pytest.mark.parametrize("nodes, rank", itertools.product([0, 1, 2, 5], [1, 2, 3]))
def test_nodal_families(nodes, rank):
    expected = Fraction(-nodes * rank, 6)
    assert char_numbers_coefficient(CharNumbers.points(nodes), rank) == expected
    assert milnor_coefficient(1, rank, nodes) == expected


@pytest.mark.parametrize("text", ["z0^2 + z1^2", "z0^3 + z1^2", "z0^4 + z1^2", "z0^5 + z1^2", "z0^6 + z1^2",
                                  "z0^2*z1 + z1^3", "z0^2 + z1^2 + z2^2", "z0^2 + z1^2 + z2^2 + z3^2"])
def test_milnor_number_matches_weighted_count(text):
    result = milnor_number(convert_text_to_polynomial(text))
    assert result.weights is not None
    assert result.mu == milnor_quasihomogeneous(result.weights)


@pytest.mark.parametrize("nu", [nu for n in (1, 2) for nu in itertools.product([1, 2, 3], repeat=n)])
def test_peeled_closed_form_matches_direct_quadrature(nu):
    exponents = MonomialExponents(nu=nu)
    for r in RADII:
        assert monomial_f(r, exponents) == pytest.approx(monomial_f_direct(r, exponents), abs=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("nu", [(1, 1, 1), (1, 2, 3), (3, 3, 2)])
def test_peeled_closed_form_matches_direct_quadrature_in_three_factors(nu):
    exponents = MonomialExponents(nu=nu)
    for r in RADII:
        assert monomial_f(r, exponents) == pytest.approx(monomial_f_direct(r, exponents), abs=1e-8)


def test_circle_invariance():
    exponents = MonomialExponents(nu=(1, 2))
    for r in RADII:
        values = [monomial_f(r * np.exp(2j * np.pi * k / 8), exponents) for k in range(8)]
        assert max(values) - min(values) < 1e-10


def test_nodal_log_coefficient_on_default_grid():
    sampler = GaussNorm(germs=(convert_text_to_polynomial("z0*z1"),))
    outcome = Verifier(sampler=sampler, grid=SampleGrid.geometric()).verify()
    assert outcome.fit.log_coeff == pytest.approx(1.0, abs=0.05)
    halved = Verifier(sampler=sampler, grid=SampleGrid.geometric(r_min=5e-7)).verify()
    assert halved.fit.log_coeff == pytest.approx(outcome.fit.log_coeff, rel=0.01)


def test_verify_reports_are_byte_identical():
    spec = parse_family_spec({"fiber_dimension": 1, "germs": ["z0*z1"], "seed": 9,
                              "verify": {"mode": "psi", "grid": "1e-3,1e-1,24,2"}})
    settings = replace(RunSettings(), grid=spec.verify.grid, seed=spec.seed, threads=2)
    first, _ = cmd_verify(spec, settings)
    second, _ = cmd_verify(spec, replace(settings, threads=1))
    assert first.to_json() == second.to_json()
    assert first.verification.target == 0
    assert abs(first.verification.log_coeff) < 0.05
    assert first.verification.passed
    assert first.verification.chi_mass == pytest.approx(BumpSpec(nvars=2).mass())
