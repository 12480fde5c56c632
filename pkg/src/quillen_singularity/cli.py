"""
Command line: print genera, predict the log|t|^2 coefficient of a degeneration, verify it
numerically, compute Milnor numbers and fit sample tables.

Exit codes: 0 on success, 1 when a verification fails or a numerical step breaks down,
2 on invalid input.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import click

from quillen_singularity.asym_fit import (
    ExpansionModel,
    FitResult,
    exponent_scan,
    fit_b0,
    s1_average,
)
from quillen_singularity.base_verifier.verifier import Verifier
from quillen_singularity.chern_calculus import (
    char_numbers_coefficient,
    e_genus_rank2,
    milnor_coefficient,
)
from quillen_singularity.datatypes import INFINITE, GenusName, VerifyMode
from quillen_singularity.errors import (
    BoundExceeded,
    IllConditioned,
    InsufficientSamples,
    QuadratureFailure,
    UnknownGenus,
    UnsupportedGerm,
    SpecError,
)
from quillen_singularity.family_spec import FamilySpec, load_family_spec
from quillen_singularity.fiber_integrals import IntegralSample
from quillen_singularity.file_utils import dump_json, read_sample_table, write_sample_table
from quillen_singularity.milnor import PolynomialGerm, milnor_number
from quillen_singularity.report import MilnorEntry, Report, VerificationSummary, relative_error
from quillen_singularity.samplers import GaussNorm, Monomial, Psi, Sampler
from quillen_singularity.series_ring import MAX_ORDER, td_inverse_series, td_series
from quillen_singularity.settings import RunSettings
from quillen_singularity.string_utils import (
    convert_text_to_grid,
    convert_text_to_polynomial,
    convert_text_to_rational,
    format_rational,
)

logger = logging.getLogger(__name__)

# Numerical breakdowns; every other domain error is an input error.
NUMERICAL_ERRORS = (QuadratureFailure, IllConditioned, InsufficientSamples, UnsupportedGerm)


def cmd_genus(name: str, order: int) -> List[Fraction]:
    """
    Coefficients of a genus up to the given order: powers of x for td and td-inv, powers
    of c2 for e.

    Raises:
        UnknownGenus: If the name is not td, td-inv or e.
    """
    try:
        genus = GenusName(name)
    except ValueError:
        raise UnknownGenus(f"Unknown genus '{name}'; use one of {[g.value for g in GenusName]}.")
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"Order must lie in 0..{MAX_ORDER}, got {order}.")
    if genus is GenusName.td:
        return list(td_series(order).coeffs)
    if genus is GenusName.td_inv:
        return list(td_inverse_series(order).coeffs)
    e_genus = e_genus_rank2(order)
    return [e_genus.coefficient(k) for k in range(order + 1)]


def _milnor_entries(germs: Sequence[PolynomialGerm], threads: int) -> Tuple[MilnorEntry, ...]:
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        results = list(pool.map(milnor_number, germs))
    entries = []
    for germ, result in zip(germs, results):
        entries.append(MilnorEntry(
            label=germ.label,
            polynomial=str(germ),
            mu="infinite" if result.mu is INFINITE else result.mu,
            degree_bound_used=result.degree_bound_used,
            quasi_homogeneous_mu=result.quasi_homogeneous_mu,
        ))
    return tuple(entries)


def cmd_milnor(germs: Sequence[PolynomialGerm], threads: int = 1) -> Report:
    entries = _milnor_entries(germs, threads)
    total = None if any(e.mu == "infinite" for e in entries) else sum(e.mu for e in entries)
    return Report(command="milnor", milnor_table=entries, milnor_sum=total)


def cmd_predict(spec: FamilySpec, settings: RunSettings) -> Report:
    """
    Exact log|t|^2 coefficient of the family from the Milnor numbers of its germs, and from
    the characteristic numbers of the critical locus when those are given.

    Raises:
        BoundExceeded: If a germ does not have an isolated critical point.
        MissingCharNumber: If a characteristic number of top degree is absent.
    """
    entries = _milnor_entries(spec.germs, settings.threads)
    for entry in entries:
        if entry.mu == "infinite":
            raise BoundExceeded(f"Germ {entry.label or entry.polynomial} has no isolated critical point "
                                f"below degree {entry.degree_bound_used}.", last_dimension=0)
    total = sum(entry.mu for entry in entries)
    predicted = milnor_coefficient(spec.fiber_dimension, spec.bundle_rank, total)
    logger.info("Milnor table computed: sum %d, predicted coefficient %s.", total, predicted)

    char_coeff, cross_check = None, None
    if spec.char_numbers is not None:
        char_coeff = char_numbers_coefficient(spec.char_numbers, spec.bundle_rank)
        # the two formulas only describe the same data for nodes of a family of curves
        if spec.fiber_dimension == 1 and spec.char_numbers.dimension == 0:
            cross_check = char_coeff == predicted
    return Report(
        command="predict",
        fiber_dimension=spec.fiber_dimension,
        bundle_rank=spec.bundle_rank,
        milnor_table=entries,
        milnor_sum=total,
        predicted_coeff=predicted,
        char_numbers_coeff=char_coeff,
        cross_check=cross_check,
    )


def _build_sampler(spec: FamilySpec, settings: RunSettings, predicted: Fraction) -> Tuple[Sampler, Fraction, Fraction, float]:
    """The sampler, the exact target, the factor taking the log coefficient to the target scale, and the threshold."""
    verify = spec.verify
    if verify.mode is VerifyMode.gauss_norm:
        sampler = GaussNorm(germs=spec.germs, cutoff_radius=verify.cutoff_radius,
                            tolerance=settings.closed_form_tolerance)
        target = predicted
        scale = milnor_coefficient(spec.fiber_dimension, spec.bundle_rank, 1)
        default_threshold = settings.closed_form_threshold
    elif verify.mode is VerifyMode.monomial:
        sampler = Monomial(nu=verify.nu, tolerance=settings.closed_form_tolerance)
        target, scale = Fraction(0), Fraction(1)
        default_threshold = settings.closed_form_threshold
    else:
        germ = verify.polynomial or (spec.germs[0] if spec.germs else None)
        if germ is None:
            raise SpecError("verify.polynomial", "is required when the family has no germs")
        sampler = Psi(germ=germ, chi=verify.chi, seed=settings.seed, log2_points=settings.log2_points,
                      batches=settings.batches, tolerance=settings.monte_carlo_tolerance)
        target, scale = Fraction(0), Fraction(1)
        default_threshold = settings.monte_carlo_threshold
    threshold = verify.threshold if verify.threshold is not None else default_threshold
    return sampler, target, scale, threshold


def cmd_verify(spec: FamilySpec, settings: RunSettings, timings: bool = False) -> Tuple[Report, List[IntegralSample]]:
    """
    Prediction plus numerical verification: sample the integral of the verify mode on the
    grid, average over angles, fit and compare with the exact target.

    Numerical failures are recorded in the report; they do not raise.

    Returns:
        Tuple[Report, List[IntegralSample]]: The report and the raw samples.

    Raises:
        SpecError: If the family has no verify block.
    """
    if spec.verify is None:
        raise SpecError("verify", "is required by the verify command")
    clock: Dict[str, float] = {}
    start = time.perf_counter()
    prediction = cmd_predict(spec, settings)
    clock["predict"] = time.perf_counter() - start

    sampler, target, scale, threshold = _build_sampler(spec, settings, prediction.predicted_coeff)
    chi_mass = sampler.chi.mass() if isinstance(sampler, Psi) else None
    verifier = Verifier(sampler=sampler, grid=settings.grid, threads=settings.threads,
                        condition_threshold=settings.condition_threshold)
    raw: List[IntegralSample] = []
    errors: Tuple[str, ...] = ()
    start = time.perf_counter()
    try:
        outcome = verifier.verify()
    except NUMERICAL_ERRORS as e:
        logger.warning("Verification stopped: %s", e)
        errors = (f"{type(e).__name__}: {e}",)
        summary = VerificationSummary(mode=spec.verify.mode.value, target=target, threshold=threshold,
                                      passed=False, error=errors[0], chi_mass=chi_mass)
    else:
        raw = outcome.raw_samples
        fitted = float(scale) * outcome.fit.log_coeff
        error = relative_error(fitted, target)
        summary = VerificationSummary(
            mode=spec.verify.mode.value,
            target=target,
            log_coeff=outcome.fit.log_coeff,
            fitted_coeff=fitted,
            relative_error=error,
            threshold=threshold,
            passed=abs(fitted) < threshold if target == 0 else error < threshold,
            condition_estimate=outcome.fit.condition_estimate,
            residual_rms=outcome.fit.residual_rms,
            two_point_slope=outcome.slope,
            term_coeffs=_term_coeffs(outcome.fit),
            sample_count=len(raw),
            chi_mass=chi_mass,
        )
    clock["verify"] = time.perf_counter() - start
    report = replace(prediction, command="verify", verification=summary, errors=prediction.errors + errors,
                     timings=clock if timings else None)
    return report, raw


def _term_coeffs(fit: FitResult) -> Dict[str, float]:
    return {f"{format_rational(a)}:{k}": value for (a, k), value in fit.term_coeffs.items()}


def fit_to_dict(fit: FitResult) -> Dict[str, object]:
    return {
        "log_coeff": fit.log_coeff,
        "constant": fit.constant,
        "term_coeffs": _term_coeffs(fit),
        "residual_rms": fit.residual_rms,
        "condition_estimate": fit.condition_estimate,
        "exponents": [format_rational(r) for r in fit.model.exponents],
    }


def cmd_fit(samples: Sequence[IntegralSample], model: ExpansionModel, candidates: Sequence[Fraction] = (),
            condition_threshold: float = RunSettings().condition_threshold) -> FitResult:
    """Average over angles, optionally scan for exponents, and fit."""
    averaged = s1_average(samples)
    if candidates:
        model = exponent_scan(averaged, model, candidates, condition_threshold=condition_threshold)
    return fit_b0(averaged, model, condition_threshold)


def _configure_logging(verbose: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(name)s:%(levelname)s:%(message)s", force=True)


def _fail(ctx: click.Context, error: Exception) -> None:
    click.echo(f"error: {type(error).__name__}: {error}", err=True)
    ctx.exit(1 if isinstance(error, NUMERICAL_ERRORS) else 2)


def _emit(report: Report, output_format: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(report.to_json())
    click.echo(report.to_json() if output_format == "json" else report.to_text(), nl=False)


def _settings(spec: FamilySpec, grid: Optional[str], seed: Optional[int], threads: Optional[int]) -> RunSettings:
    settings = RunSettings().override(
        seed=spec.seed,
        grid=spec.verify.grid if spec.verify else None,
    )
    return settings.override(
        seed=seed,
        grid=convert_text_to_grid(grid) if grid else None,
        threads=threads,
    )


def _apply_tolerance(spec: FamilySpec, tolerance: Optional[float]) -> FamilySpec:
    if tolerance is None or spec.verify is None:
        return spec
    return replace(spec, verify=replace(spec.verify, threshold=tolerance))


spec_option = click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), help="Family specification (JSON).")
grid_option = click.option("--grid", help="Sample grid as rmin,rmax,count,angles.")
seed_option = click.option("--seed", type=int, help="Seed of the Monte-Carlo paths.")
threads_option = click.option("--threads", type=click.IntRange(min=1), help="Number of sampling workers.")
format_option = click.option("--format", "output_format", type=click.Choice(["json", "text"]), default="text", show_default=True)
output_option = click.option("--output", type=click.Path(dir_okay=False, writable=True), help="Write the JSON report to this file.")


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
def main(verbose: int) -> None:
    """Quillen metric singularities: predictions and numerical checks."""
    _configure_logging(verbose)


@main.command()
@click.argument("name")
@click.option("--order", type=click.IntRange(0, MAX_ORDER), default=RunSettings().order, show_default=True)
@format_option
@click.pass_context
def genus(ctx: click.Context, name: str, order: int, output_format: str) -> None:
    """Print the coefficients of the td, td-inv or e genus."""
    try:
        coeffs = cmd_genus(name, order)
    except ValueError as e:
        _fail(ctx, e)
    if output_format == "json":
        click.echo(dump_json({"genus": name, "order": order, "coefficients": [format_rational(c) for c in coeffs]}), nl=False)
    else:
        click.echo(", ".join(format_rational(c) for c in coeffs))


@main.command()
@spec_option
@threads_option
@format_option
@output_option
@click.pass_context
def predict(ctx: click.Context, spec_path: Optional[str], threads: Optional[int], output_format: str, output: Optional[str]) -> None:
    """Exact log|t|^2 coefficient of a family."""
    try:
        if not spec_path:
            raise SpecError("--spec", "is required")
        spec = load_family_spec(spec_path)
        report = cmd_predict(spec, _settings(spec, None, None, threads))
    except ValueError as e:
        _fail(ctx, e)
    _emit(report, output_format, output)


@main.command()
@spec_option
@grid_option
@seed_option
@threads_option
@click.option("--tolerance", type=float, help="Pass threshold of the verification.")
@format_option
@output_option
@click.option("--samples", "samples_path", type=click.Path(dir_okay=False, writable=True), help="Write the raw samples (.csv or .xlsx).")
@click.option("--timings", is_flag=True, help="Add wall-clock times to the report.")
@click.pass_context
def verify(ctx: click.Context, spec_path: Optional[str], grid: Optional[str], seed: Optional[int], threads: Optional[int],
           tolerance: Optional[float], output_format: str, output: Optional[str], samples_path: Optional[str], timings: bool) -> None:
    """Sample, fit and compare with the prediction."""
    try:
        if not spec_path:
            raise SpecError("--spec", "is required")
        spec = _apply_tolerance(load_family_spec(spec_path), tolerance)
        report, raw = cmd_verify(spec, _settings(spec, grid, seed, threads), timings=timings)
        if samples_path:
            write_sample_table(raw, samples_path)
    except ValueError as e:
        _fail(ctx, e)
    _emit(report, output_format, output)
    if not report.passed:
        ctx.exit(1)


@main.command()
@click.argument("germ", required=False)
@spec_option
@click.option("--nvars", type=click.IntRange(min=1), help="Number of variables of GERM.")
@threads_option
@format_option
@output_option
@click.pass_context
def milnor(ctx: click.Context, germ: Optional[str], spec_path: Optional[str], nvars: Optional[int], threads: Optional[int],
           output_format: str, output: Optional[str]) -> None:
    """Milnor numbers of GERM or of the germs of a family."""
    try:
        if germ:
            germs: Sequence[PolynomialGerm] = (convert_text_to_polynomial(germ, nvars),)
        elif spec_path:
            germs = load_family_spec(spec_path).germs
        else:
            raise SpecError("GERM", "give a polynomial or --spec")
        report = cmd_milnor(germs, threads or 1)
    except ValueError as e:
        _fail(ctx, e)
    if output_format == "text" and germ:
        if output:
            with open(output, "w", encoding="utf-8") as handle:
                handle.write(report.to_json())
        click.echo(report.milnor_table[0].mu)
    else:
        _emit(report, output_format, output)


@main.command()
@click.argument("table", type=click.Path(exists=True, dir_okay=False))
@click.option("--exponents", default="", help="Singular exponents r in (0, 1], comma separated p/q.")
@click.option("--smooth-order", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--max-log-power", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--singular-order", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--scan", default="", help="Candidate exponents for a greedy scan, comma separated p/q.")
@format_option
@click.pass_context
def fit(ctx: click.Context, table: str, exponents: str, smooth_order: int, max_log_power: int, singular_order: int,
        scan: str, output_format: str) -> None:
    """Fit a sample table (columns t_re, t_im, value, est_error)."""
    try:
        model = ExpansionModel(smooth_order=smooth_order, exponents=_rationals(exponents),
                               max_log_power=max_log_power, singular_order=singular_order)
        result = cmd_fit(read_sample_table(table), model, _rationals(scan))
    except ValueError as e:
        _fail(ctx, e)
    document = fit_to_dict(result)
    if output_format == "json":
        click.echo(dump_json(document), nl=False)
    else:
        click.echo(f"log|t|^2 coefficient: {result.log_coeff}")
        click.echo(f"constant: {result.constant}")
        for key, value in document["term_coeffs"].items():
            click.echo(f"  {key}: {value}")
        click.echo(f"held-out rms {result.residual_rms}, condition {result.condition_estimate}")


def _rationals(text: str) -> Tuple[Fraction, ...]:
    return tuple(convert_text_to_rational(part) for part in text.split(",") if part.strip())


if __name__ == "__main__":
    main()
