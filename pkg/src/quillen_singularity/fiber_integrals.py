"""
Model fiber integrals near a critical value.

All integrals over P^1 use the Fubini-Study form of mass one. In the radial variable
u = |z|^2 it reads du/(1+u)^2, and with u = e^x it becomes the logistic density
e^x/(1+e^x)^2 dx on the real line, which is what the quadratures below integrate against.
"""
import cmath
import hashlib
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.stats import qmc

from quillen_singularity.errors import (
    BothZero,
    NonCompactSupport,
    QuadratureFailure,
    UnsupportedGerm,
)
from quillen_singularity.milnor import PolynomialGerm

logger = logging.getLogger(__name__)

CLOSED_FORM_TOLERANCE = 1e-8
MONTE_CARLO_TOLERANCE = 1e-2


@dataclass(frozen=True)
class SampleGrid:
    """
    Values of t = r e^{i theta} at which a germ is sampled.

    Attributes:
        radii (tuple[float, ...]): Strictly increasing radii in (0, 1).
        angles (int): Number of equally spaced angles per radius.
    """
    radii: Tuple[float, ...]
    angles: int = 8

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise ValueError("A sample grid needs at least one radius.")
        if any(not 0 < r < 1 for r in radii):
            raise ValueError("All radii must lie in (0, 1).")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("Radii must be strictly increasing.")
        if self.angles < 1:
            raise ValueError(f"Need at least one angle, got {self.angles}.")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def geometric(cls, r_min: float = 1e-6, r_max: float = 1e-1, count: int = 40, angles: int = 8) -> "SampleGrid":
        if count < 2:
            raise ValueError(f"A geometric grid needs at least two radii, got {count}.")
        if not 0 < r_min < r_max:
            raise ValueError(f"Need 0 < r_min < r_max, got {r_min}, {r_max}.")
        return cls(radii=tuple(np.geomspace(r_min, r_max, count).tolist()), angles=angles)

    def points(self) -> List[complex]:
        """All t values, radius-major, angle-minor."""
        return [r * cmath.exp(2j * math.pi * k / self.angles) for r in self.radii for k in range(self.angles)]


@dataclass(frozen=True)
class IntegralSample:
    """
    Attributes:
        t (complex): Point of the base disc.
        value (float): Integral at t.
        est_error (float): Error estimate reported by the quadrature.
    """
    t: complex
    value: float
    est_error: float

    @property
    def radius(self) -> float:
        return abs(self.t)


@dataclass(frozen=True)
class MonomialExponents:
    """
    Exponents of F(z) = z_1^{nu_1} ... z_n^{nu_n}.

    Attributes:
        nu (tuple[int, ...]): Non-negative exponents, at least one positive.
    """
    nu: Tuple[int, ...]

    def __post_init__(self):
        nu = tuple(int(v) for v in self.nu)
        if not nu or min(nu) < 0:
            raise ValueError(f"Exponents must be non-negative, got {nu}.")
        if max(nu) == 0:
            raise ValueError("At least one exponent must be positive.")
        object.__setattr__(self, "nu", nu)

    @property
    def n(self) -> int:
        return len(self.nu)

    def peeled(self) -> Tuple[Tuple[int, ...], int]:
        """Positive exponents split into (the others, the last one)."""
        positive = [v for v in self.nu if v > 0]
        return tuple(positive[:-1]), positive[-1]


def _smootherstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x ** 4 * (35 - 84 * x + 70 * x ** 2 - 20 * x ** 3)


@dataclass(frozen=True)
class BumpSpec:
    """
    Cutoff chi(z) = prod_i h(|z_i|) times the Euclidean volume form, with h = 1 on
    |z_i| <= inner, h = 0 on |z_i| >= outer and a C^3 polynomial spline in between.

    Attributes:
        nvars (int): Number of complex variables.
        inner (float): Radius where the transition starts.
        outer (float): Radius of the support.
        domain_radius (float): Radius of the polydisc Omega.
    """
    nvars: int
    inner: float = 0.5
    outer: float = 0.75
    domain_radius: float = 1.0

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError(f"A bump needs at least one variable, got {self.nvars}.")
        if not 0 <= self.inner < self.outer:
            raise ValueError(f"Need 0 <= inner < outer, got {self.inner}, {self.outer}.")
        if self.outer > self.domain_radius:
            raise NonCompactSupport(f"Support radius {self.outer} leaves the domain of radius {self.domain_radius}.")

    def profile(self, rho: np.ndarray) -> np.ndarray:
        """The one-variable factor h(rho)."""
        return 1.0 - _smootherstep((np.asarray(rho) - self.inner) / (self.outer - self.inner))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return np.prod(self.profile(np.abs(np.asarray(z))), axis=-1)

    def mass(self) -> float:
        """Total integral of chi over C^n."""
        one_disc, _ = integrate.quad(lambda r: 2 * math.pi * r * float(self.profile(r)), 0.0, self.outer, points=[self.inner])
        return one_disc ** self.nvars


def derive_seed(seed: int, counter: int) -> int:
    """64-bit seed for the counter-th evaluation, by hashing."""
    digest = hashlib.blake2b(f"{seed}:{counter}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _logistic_density(x: float) -> float:
    e = math.exp(-abs(x))
    return e / (1.0 + e) ** 2


def _logistic_cdf(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _quad(func: Callable[[float], float], a: float, b: float, tolerance: float) -> Tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=integrate.IntegrationWarning)
        value, error = integrate.quad(func, a, b, epsabs=tolerance, epsrel=tolerance, limit=200)
    return value, error


def _logistic_nested_quad(func: Callable[[Sequence[float]], float], dims: int, tolerance: float) -> Tuple[float, float]:
    """
    Integrate func over R^dims against the product of logistic densities.

    Returns:
        tuple[float, float]: The value and the largest error estimate seen at any level.
    """
    worst = [0.0]

    def level(prefix: Tuple[float, ...]) -> float:
        if len(prefix) == dims:
            return func(prefix)

        def inner(x: float) -> float:
            return level(prefix + (x,)) * _logistic_density(x)

        value, error = _quad(inner, -math.inf, math.inf, tolerance)
        worst[0] = max(worst[0], error)
        return value

    return level(()), worst[0]


def base_p1_integral(A: complex, B: complex, nu: int) -> float:
    """
    Integral over P^1 of log|A z^nu + B|^2 against the Fubini-Study form:
    nu * log(|A|^{2/nu} + |B|^{2/nu}). The factor nu counts the roots of A z^nu + B,
    each of which contributes log(|A|^{2/nu} + |B|^{2/nu}).

    Raises:
        BothZero: If A = B = 0.
    """
    if nu < 1:
        raise ValueError(f"Exponent must be positive, got {nu}.")
    if A == 0 and B == 0:
        raise BothZero("log|A z^nu + B|^2 is not integrable for A = B = 0.")
    return nu * math.log(abs(A) ** (2.0 / nu) + abs(B) ** (2.0 / nu))


def _softplus_log(y: float, log_c: float) -> float:
    """log(e^y + e^{log_c}), with log_c = -inf for c = 0."""
    if log_c == -math.inf:
        return y
    return float(np.logaddexp(y, log_c))


def monomial_f(t: complex, nu: MonomialExponents, tolerance: float = CLOSED_FORM_TOLERANCE) -> float:
    """
    f(t) = integral over (P^1)^n of log|z^nu - t|^2 against the product of Fubini-Study forms.

    The last positive exponent is integrated in closed form with base_p1_integral; the
    remaining factors only see |z_i|, so they are integrated radially.

    Raises:
        QuadratureFailure: If the error estimate exceeds the tolerance.
    """
    value, error = _monomial_f_with_error(t, nu, tolerance)
    return value


def _monomial_f_with_error(t: complex, nu: MonomialExponents, tolerance: float) -> Tuple[float, float]:
    others, last = nu.peeled()
    r = abs(t)
    if not others:
        return base_p1_integral(1.0, -t, last), 0.0

    weights = [v / last for v in others]
    log_c = (2.0 / last) * math.log(r) if r > 0 else -math.inf

    def integrand(x: Sequence[float]) -> float:
        return _softplus_log(sum(w * xi for w, xi in zip(weights, x)), log_c)

    value, error = _logistic_nested_quad(integrand, len(others), tolerance * 1e-3)
    value, error = last * value, last * error
    if not error <= tolerance:
        raise QuadratureFailure(f"monomial_f at |t|={r:g}, nu={nu.nu}: error {error:g}", value, error)
    return value, error


def monomial_f_sample(t: complex, nu: MonomialExponents, tolerance: float = CLOSED_FORM_TOLERANCE) -> IntegralSample:
    value, error = _monomial_f_with_error(t, nu, tolerance)
    return IntegralSample(t=t, value=value, est_error=error)


def _logistic_tail_mean(k: float) -> float:
    """Integral over (k, inf) of (x - k) against the logistic density, i.e. log(1 + e^{-k})."""
    return math.log1p(math.exp(-abs(k))) + max(-k, 0.0)


def monomial_f_direct(t: complex, nu: MonomialExponents, tolerance: float = CLOSED_FORM_TOLERANCE) -> float:
    """
    f(t) by radial quadrature over all n factors, independent of the closed-form peeling.

    Averaging over the angle of one variable with positive exponent turns
    log|z^nu - t|^2 into log max(|z^nu|^2, |t|^2) (Jensen's formula), so
    f(t) = integral over R^n of max(sum nu_i x_i, log|t|^2) against logistic densities.
    The innermost integral of the piecewise linear integrand is exact; the others are
    done numerically.
    """
    positive = [v for v in nu.nu if v > 0]
    outer, last = positive[:-1], positive[-1]
    r = abs(t)
    log_t2 = 2.0 * math.log(r) if r > 0 else -math.inf

    def innermost(prefix: Sequence[float]) -> float:
        s = sum(v * x for v, x in zip(outer, prefix))
        if log_t2 == -math.inf:
            return s
        # max(s + last x, L) = L + last * max(x - k, 0) with kink k
        kink = (log_t2 - s) / last
        return log_t2 + last * _logistic_tail_mean(kink)

    value, error = _logistic_nested_quad(innermost, len(outer), tolerance * 1e-3)
    if not error <= tolerance:
        raise QuadratureFailure(f"direct quadrature at |t|={r:g}, nu={nu.nu}: error {error:g}", value, error)
    return value


def monomial_density(t: complex, nu: MonomialExponents, tolerance: float = CLOSED_FORM_TOLERANCE) -> float:
    """
    g(r) = (r d/dr)^2 f(r), by differentiating the peeled integrand under the integral.

    With c = r^{2/nu_last} and P the remaining monomial, (r d/dr)^2 of nu_last log(P + c)
    equals (4/nu_last) c P/(P + c)^2 = (4/nu_last) / (4 cosh^2((log P - log c)/2)).
    """
    others, last = nu.peeled()
    r = abs(t)
    if r == 0:
        return 0.0
    scale = 4.0 / last
    log_c = (2.0 / last) * math.log(r)

    def kernel(log_p: float) -> float:
        half = 0.5 * (log_p - log_c)
        if abs(half) > 350:
            return 0.0
        return 1.0 / (4.0 * math.cosh(half) ** 2)

    if not others:
        return scale * kernel(0.0)
    weights = [v / last for v in others]
    value, error = _logistic_nested_quad(lambda x: kernel(sum(w * xi for w, xi in zip(weights, x))), len(others), tolerance * 1e-3)
    if not error <= tolerance:
        raise QuadratureFailure(f"monomial_density at |t|={r:g}: error {error:g}", value, error)
    return scale * value


def radial_log_derivative(func: Callable[[float], float], r: float, order: int = 1, step: float = 1e-3) -> float:
    """
    Central finite difference of (r d/dr)^order func at r, taken in s = log r.

    Only orders 1 and 2 are supported.
    """
    up, down = func(r * math.exp(step)), func(r * math.exp(-step))
    if order == 1:
        return (up - down) / (2 * step)
    if order == 2:
        return (up - 2 * func(r) + down) / step ** 2
    raise ValueError(f"Unsupported derivative order {order}.")


def psi_integral(F: PolynomialGerm, chi: BumpSpec, t: complex, seed: int = 0, log2_points: int = 12,
                 batches: int = 8, tolerance: Optional[float] = MONTE_CARLO_TOLERANCE) -> IntegralSample:
    """
    psi(t) = integral over Omega of log|F(z) - t|^2 chi(z).

    Quasi-Monte-Carlo over the support polydisc: each disc is sampled uniformly in area
    (rho = outer * sqrt(u), theta = 2 pi v) from scrambled Sobol points. The value is
    the median of `batches` independent scramblings and the error is their spread
    divided by sqrt(batches). The logarithmic singularity is integrable; |F - t|^2 is
    clamped at the smallest positive double.

    Args:
        F (PolynomialGerm): Holomorphic polynomial on Omega.
        chi (BumpSpec): Compactly supported cutoff.
        t (complex): Point of the base.
        seed (int): Seed of the scramblings.
        log2_points (int): Each batch uses 2**log2_points points.
        batches (int): Number of independent scramblings.
        tolerance (Optional[float]): Largest acceptable error estimate; None disables the check.

    Raises:
        QuadratureFailure: If the error estimate exceeds the tolerance.
    """
    if F.nvars != chi.nvars:
        raise ValueError(f"Germ has {F.nvars} variables but the bump has {chi.nvars}.")
    n = F.nvars
    volume = (math.pi * chi.outer ** 2) ** n
    tiny = np.finfo(float).tiny
    means = []
    for child in np.random.SeedSequence(seed).spawn(batches):
        sampler = qmc.Sobol(d=2 * n, scramble=True, seed=np.random.default_rng(child))
        u = sampler.random_base2(m=log2_points)
        rho = chi.outer * np.sqrt(u[:, 0::2])
        z = rho * np.exp(2j * np.pi * u[:, 1::2])
        weight = np.prod(chi.profile(rho), axis=1)
        log_term = np.log(np.maximum(np.abs(F.evaluate(z) - t) ** 2, tiny))
        means.append(volume * float(np.mean(weight * log_term)))
    means = np.asarray(means)
    value = float(np.median(means))
    error = float(np.std(means, ddof=1) / math.sqrt(batches)) if batches > 1 else float("inf")
    if tolerance is not None and not error <= tolerance * max(1.0, abs(value)):
        raise QuadratureFailure(f"psi at t={t:g}: error {error:g}", value, error)
    return IntegralSample(t=t, value=value, est_error=error)


def _classify_gauss_germ(germ: PolynomialGerm) -> Tuple[str, complex]:
    """('node', c) for c z0 z1, ('quadric', c) for c sum z_i^2."""
    if germ.nvars == 2 and len(germ.terms) == 1 and germ.terms[0][0] == (1, 1):
        return "node", complex(germ.terms[0][1])
    squares = {tuple(2 if i == j else 0 for j in range(germ.nvars)) for i in range(germ.nvars)}
    coefficients = {coef for _, coef in germ.terms}
    if germ.nvars >= 2 and {exps for exps, _ in germ.terms} == squares and len(coefficients) == 1:
        return "quadric", complex(coefficients.pop())
    raise UnsupportedGerm(f"Gauss-norm integral only handles c*z0*z1 and c*sum z_i^2, got {germ}.")


def _log_cosh(w: float) -> float:
    a = abs(w)
    return a + math.log1p(math.exp(-2 * a)) - math.log(2)


def _sech2(w: float) -> float:
    e = math.exp(-2 * abs(w))
    return 4 * e / (1 + e) ** 2


def gauss_norm_integral_with_error(t: complex, germ: PolynomialGerm, cutoff_radius: float = 1.0,
                                   tolerance: float = CLOSED_FORM_TOLERANCE) -> Tuple[float, float]:
    """
    L(t) = integral over X_t ∩ B(cutoff) of log||dpi||^2 (dd^c log||dpi||^2)^n.

    Node c z0 z1: on the fiber z0 = z, z1 = s/z with s = t/c, and w = log|z|^2 - log|s|,
    ||dpi||^2 = 2|c|^2 |s| cosh w and dd^c log||dpi||^2 = sech^2 w dw. The ball is |w| <= W
    with 2|s| cosh W = cutoff^2.

    Quadric c sum z_i^2 in N = n + 1 variables: z -> [z] is a double cover of P^n minus the
    quadric, and (dd^c log|z|^2)^n is the pulled back Fubini-Study volume. On the line through
    a unit vector v the fiber point has |z|^2 = |s|/|q(v)| with q(v) = sum v_i^2, and
    tau = |q(v)|^2 is Beta(1, n/2) distributed, so
    L = 2 E[log(4 |c|^2 |s| / sqrt(tau)); sqrt(tau) >= |s|/cutoff^2].

    Raises:
        UnsupportedGerm: For germs outside these two families.
        ValueError: If the fiber does not meet the ball.
        QuadratureFailure: If the error estimate exceeds the tolerance.
    """
    kind, c = _classify_gauss_germ(germ)
    s = abs(t / c)
    if s == 0:
        raise ValueError("The Gauss-norm integral diverges on the singular fiber t = 0.")
    log_c2 = math.log(abs(c) ** 2)

    if kind == "node":
        ratio = cutoff_radius ** 2 / (2 * s)
        if ratio <= 1:
            raise ValueError(f"The fiber at |t|={abs(t):g} misses the ball of radius {cutoff_radius}.")
        W = math.acosh(ratio)
        shift = log_c2 + math.log(2 * s)
        half, error = _quad(lambda w: (shift + _log_cosh(w)) * _sech2(w), 0.0, W, tolerance * 1e-3)
        value, error = 2 * half, 2 * error
    else:
        beta = (germ.nvars - 1) / 2
        lower = (s / cutoff_radius ** 2) ** 2
        if lower >= 1:
            raise ValueError(f"The fiber at |t|={abs(t):g} misses the ball of radius {cutoff_radius}.")
        shift = math.log(4 * abs(c) ** 2 * s)
        # E[log tau] over all of [0, 1], minus the part below the ball
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=integrate.IntegrationWarning)
            full_log, e1 = integrate.quad(lambda tau: beta, 0.0, 1.0, weight="alg-loga", wvar=(0.0, beta - 1.0),
                                          epsabs=tolerance * 1e-3, epsrel=tolerance * 1e-3, limit=200)
            low_log, e2 = integrate.quad(lambda tau: beta * (1.0 - tau) ** (beta - 1.0), 0.0, lower,
                                         weight="alg-loga", wvar=(0.0, 0.0),
                                         epsabs=tolerance * 1e-3, epsrel=tolerance * 1e-3, limit=200)
        inside = (1.0 - lower) ** beta
        value = 2 * (shift * inside - 0.5 * (full_log - low_log))
        error = e1 + e2

    if not error <= tolerance:
        raise QuadratureFailure(f"Gauss-norm integral at |t|={abs(t):g}: error {error:g}", value, error)
    return value, error


def gauss_norm_integral(t: complex, germ: PolynomialGerm, cutoff_radius: float = 1.0) -> float:
    value, _ = gauss_norm_integral_with_error(t, germ, cutoff_radius)
    return value


def evaluate_grid(func: Callable[[int, complex], IntegralSample], grid: SampleGrid, threads: int = 1) -> List[IntegralSample]:
    """
    Evaluate func(counter, t) on every grid point, in parallel, keeping grid order.

    The counter is the position of t in grid.points() so that seeds derived from it do not
    depend on scheduling.
    """
    points = grid.points()
    logger.info("Sampling %d points with %d worker(s).", len(points), threads)
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        samples = list(pool.map(func, range(len(points)), points))
    return samples
