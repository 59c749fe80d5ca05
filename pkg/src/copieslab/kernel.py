"""Sphere and annulus kernel machinery.

Surface areas of spheres, the limiting overlap kernel ``K_r`` of two thin
spherical shells, Monte Carlo estimates of the normalised shell overlap
``phi_delta``, and the radial quadrature that checks
``integral of K_r = (surface area)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .errors import (
    InvalidSamplerError,
    QuadratureError,
    SingularPointError,
    ZeroMeanError,
)
from .sampling import SamplerConfig, binomial_se, unit_sphere

EQUALITY_TOL = 1e-12
MIN_OVERLAP_SAMPLES = 10_000

BINOMIAL = "binomial"
CONDITIONAL = "conditional"


def half_integer_gamma(x: float) -> float:
    """Gamma function at a positive integer or half-integer.

    Uses the recursion Gamma(x + 1) = x Gamma(x) seeded with Gamma(1) = 1 and
    Gamma(1/2) = sqrt(pi), so no approximation is involved.
    """
    twice = round(2 * x)
    if twice <= 0 or abs(2 * x - twice) > 1e-12:
        raise ValueError(f"x must be a positive multiple of 1/2, got {x}")
    if twice % 2 == 0:
        return float(math.factorial(twice // 2 - 1))
    value = math.sqrt(math.pi)
    t = Fraction(1, 2)
    target = Fraction(twice, 2)
    while t < target:
        value *= float(t)
        t += 1
    return value


def ball_volume(dim: int, radius: float) -> float:
    return math.pi ** (dim / 2) * radius**dim / half_integer_gamma(dim / 2 + 1)


def shell_volume(dim: int, inner: float, thickness: float) -> float:
    """Volume of the annulus ``inner <= |x| <= inner + thickness``.

    Computed as ``inner**d * expm1(d * log1p(thickness/inner))`` so thin
    shells keep full relative precision.
    """
    unit = math.pi ** (dim / 2) / half_integer_gamma(dim / 2 + 1)
    return unit * inner**dim * math.expm1(dim * math.log1p(thickness / inner))


@dataclass(frozen=True)
class KernelSpec:
    dimension: int
    radius: float

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.dimension}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class AnnulusSpec:
    kernel: KernelSpec
    thickness: float
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0 < self.thickness < self.kernel.radius:
            raise ValueError("thickness must lie in (0, radius)")
        if self.center is not None and len(self.center) != self.kernel.dimension:
            raise ValueError("center has the wrong dimension")

    @property
    def volume(self) -> float:
        return shell_volume(self.kernel.dimension, self.kernel.radius, self.thickness)


def surface_area(spec: KernelSpec) -> float:
    d, r = spec.dimension, spec.radius
    return d * r ** (d - 1) * math.pi ** (d / 2) / half_integer_gamma(d / 2 + 1)


def _kernel_prefactor(d: int, r: float) -> float:
    return 2 * r * r * math.pi ** ((d - 1) / 2) / half_integer_gamma((d - 1) / 2)


def kernel_profile(spec: KernelSpec, rho) -> np.ndarray:
    """``K_r`` as a function of ``rho = |v|`` (vectorised over ``rho``)."""
    d, r = spec.dimension, spec.radius
    rho = np.asarray(rho, dtype=np.float64)
    out = np.zeros_like(rho)
    singular = (np.abs(rho) <= EQUALITY_TOL) | (np.abs(rho - 2 * r) <= EQUALITY_TOL)
    inside = (rho < 2 * r) & ~singular
    ri = rho[inside]
    gap = (r - ri / 2) * (r + ri / 2)
    out[inside] = _kernel_prefactor(d, r) * gap ** ((d - 3) / 2) / ri
    out[singular] = np.inf
    return out


def kernel_value(spec: KernelSpec, v) -> float:
    """Kernel ``K_r(v)``; ``math.inf`` at ``v = 0`` and ``|v| = 2r``."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (spec.dimension,):
        raise ValueError(f"v must have shape ({spec.dimension},)")
    return float(kernel_profile(spec, np.linalg.norm(v)))


# -- annulus overlap ---------------------------------------------------------


@dataclass(frozen=True)
class OverlapEstimate:
    value: float
    std_error: float
    samples: int
    method: str


def _as_vector(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 0:
        out = np.zeros(dim)
        out[0] = float(v)
        return out
    if v.shape != (dim,):
        raise ValueError(f"v must have shape ({dim},)")
    return v


def _shell_radii(u: np.ndarray, r: float, delta: float, d: int) -> np.ndarray:
    # inverse CDF of |x| for x uniform in the shell r <= |x| <= r + delta
    growth = math.expm1(d * math.log1p(delta / r))
    return r * np.exp(np.log1p(u * growth) / d)


def _polar_cdf(u: np.ndarray, d: int) -> np.ndarray:
    # cos of the angle between a uniform direction and a fixed axis:
    # (1 + u) / 2 ~ Beta((d-1)/2, (d-1)/2)
    a = (d - 1) / 2
    return betainc(a, a, np.clip((1.0 + u) / 2.0, 0.0, 1.0))


def annulus_overlap(
    spec: AnnulusSpec,
    v,
    sampler: SamplerConfig,
    method: str = BINOMIAL,
    chunk: int = 1_000_000,
) -> OverlapEstimate:
    """Monte Carlo estimate of ``delta**-2 * vol(A(0) & A(v))``.

    ``method="binomial"`` samples the first shell uniformly and counts hits
    in the shifted shell.  ``method="conditional"`` samples only the radius,
    one point per equal-probability stratum, and integrates the angular
    direction exactly; it has far smaller variance and is what the
    convergence table uses.
    """
    if sampler.samples < MIN_OVERLAP_SAMPLES:
        raise InvalidSamplerError(
            f"annulus overlap needs at least {MIN_OVERLAP_SAMPLES} samples, got {sampler.samples}"
        )
    d, r, delta = spec.kernel.dimension, spec.kernel.radius, spec.thickness
    vec = _as_vector(v, d)
    rho = float(np.linalg.norm(vec))
    vol = spec.volume
    scale = vol / delta**2
    n = int(sampler.samples)

    if rho > 2 * r + 2 * delta:
        return OverlapEstimate(0.0, 0.0, n, method)
    if rho == 0.0:
        return OverlapEstimate(scale, 0.0, n, method)

    if method == BINOMIAL:
        hits = 0
        lo2, hi2 = r * r, (r + delta) ** 2
        for i, start in enumerate(range(0, n, chunk)):
            m = min(chunk, n - start)
            rng = sampler.rng(0, i)
            x = unit_sphere(rng, m, d) * _shell_radii(rng.random(m), r, delta, d)[:, None]
            dist2 = np.einsum("ij,ij->i", x - vec, x - vec)
            hits += int(np.count_nonzero((dist2 >= lo2) & (dist2 < hi2)))
        p = hits / n
        return OverlapEstimate(scale * p, scale * binomial_se(p, n), n, method)

    if method == CONDITIONAL:
        total = 0.0
        pair_sq = 0.0
        for i, start in enumerate(range(0, n, chunk)):
            m = min(chunk, n - start)
            rng = sampler.rng(1, i)
            u = (start + np.arange(m) + rng.random(m)) / n
            R = _shell_radii(u, r, delta, d)
            base = R * R + rho * rho
            hi = (base - r * r) / (2 * R * rho)
            lo = (base - (r + delta) ** 2) / (2 * R * rho)
            h = _polar_cdf(np.clip(hi, -1, 1), d) - _polar_cdf(np.clip(lo, -1, 1), d)
            total += math.fsum(h)
            even = h[: m - m % 2]
            pair_sq += float(np.sum((even[0::2] - even[1::2]) ** 2))
        mean = total / n
        se = math.sqrt(pair_sq) / n
        return OverlapEstimate(scale * mean, scale * se, n, method)

    raise ValueError(f"unknown overlap method {method!r}")


# -- kernel integral ---------------------------------------------------------


def tanh_sinh(integrand, points: int, x_max: float = 5.0):
    """Tanh-sinh rule on (0, 1) with ``points`` nodes.

    ``integrand(t, s)`` receives both ``t`` and ``s = 1 - t``, each computed
    without cancellation, so endpoint singularities are handled.
    """
    x = np.linspace(-x_max, x_max, points)
    h = x[1] - x[0]
    y = 0.5 * math.pi * np.sinh(x)
    t = 1.0 / (1.0 + np.exp(-2.0 * y))
    s = 1.0 / (1.0 + np.exp(2.0 * y))
    weights = h * math.pi * np.cosh(x) * t * s
    return math.fsum(weights * integrand(t, s))


def kernel_integral(spec: KernelSpec, quadrature_points: int = 101, rtol: float = 1e-13, max_levels: int = 12) -> float:
    """Integral of ``K_r`` over R^d by radial quadrature.

    The radial integral is taken in the variable ``t`` with
    ``rho = 2 r sqrt(t)``; the resulting integrand behaves like
    ``(t (1 - t))**((d - 3)/2)`` and is integrated with a tanh-sinh rule whose
    step is halved until two successive levels agree to ``rtol``.
    """
    if quadrature_points < 100:
        raise ValueError("quadrature_points must be >= 100")
    d, r = spec.dimension, spec.radius
    pref = _kernel_prefactor(d, r)

    def radial(t, s):
        rho = 2 * r * np.sqrt(t)
        kernel = pref * (r * r * s) ** ((d - 3) / 2) / rho
        # rho**(d-1) * d(rho)/dt
        jac = rho ** (d - 1) * r / np.sqrt(t)
        return kernel * jac

    unit_area = surface_area(KernelSpec(d, 1.0))
    points = quadrature_points
    previous = tanh_sinh(radial, points)
    for _ in range(max_levels):
        points = 2 * points - 1
        current = tanh_sinh(radial, points)
        if abs(current - previous) <= rtol * abs(current):
            return current * unit_area
        previous = current
    raise QuadratureError(f"radial quadrature did not converge after {max_levels} refinements")


# -- convergence of phi_delta ------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    delta: float
    phi: float
    phi_se: float
    kernel: float
    gap: float
    l1_mass: float
    l1_gap: float


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list[ConvergenceRow]
    fitted_order: float
    l1_ratios: list[float] = field(default_factory=list)


def l1_mass(spec: KernelSpec, delta: float) -> float:
    """Exact ``delta**-2 * vol(shell)**2``, the total mass of ``phi_delta``."""
    vol = shell_volume(spec.dimension, spec.radius, delta)
    return (vol / delta) ** 2


def fitted_order(deltas: Sequence[float], gaps: Sequence[float]) -> float:
    """Least-squares slope of log(gap) against log(delta)."""
    x = np.log(np.asarray(deltas, dtype=float))
    y = np.log(np.maximum(np.asarray(gaps, dtype=float), np.finfo(float).tiny))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def phi_convergence_table(
    spec: KernelSpec,
    v,
    deltas: Sequence[float],
    sampler: SamplerConfig,
    method: str = CONDITIONAL,
) -> ConvergenceTable:
    d, r = spec.dimension, spec.radius
    vec = _as_vector(v, d)
    rho = float(np.linalg.norm(vec))
    if rho <= EQUALITY_TOL or abs(rho - 2 * r) <= EQUALITY_TOL:
        raise SingularPointError(f"|v| = {rho} is a singular point of the kernel")
    if not 0 < rho < 2 * r:
        raise ValueError("v must satisfy 0 < |v| < 2r")
    deltas = [float(x) for x in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")

    k = kernel_value(spec, vec)
    area_sq = surface_area(spec) ** 2
    rows = []
    for i, delta in enumerate(deltas):
        est = annulus_overlap(AnnulusSpec(spec, delta), vec, sampler.with_seed(sampler.seed + i), method)
        mass = l1_mass(spec, delta)
        rows.append(ConvergenceRow(delta, est.value, est.std_error, k, abs(est.value - k), mass, mass - area_sq))
    order = fitted_order(deltas, [row.gap for row in rows])
    ratios = [row.l1_gap / row.delta for row in rows]
    return ConvergenceTable(rows, order, ratios)


# -- Chebyshev deviation bound -----------------------------------------------


@dataclass(frozen=True)
class ChebyshevQuery:
    sample_values: tuple[float, ...]
    domain_measure: float
    theta: float

    def __post_init__(self):
        if len(self.sample_values) == 0:
            raise ValueError("need at least one sample value")
        if any(not (g >= 0) for g in self.sample_values):
            raise ValueError("sample values must be non-negative")
        if not self.domain_measure > 0:
            raise ValueError("domain_measure must be positive")
        if not self.theta > 0:
            raise ValueError("theta must be positive")


def chebyshev_bound(query: ChebyshevQuery) -> tuple[float, float]:
    """Measure of the large-deviation set and its second-moment bound.

    Integrals are replaced by sample means over an equal-weight
    discretisation of the domain.  Arithmetic is exact (rationals), so the
    returned floats always satisfy ``lhs <= rhs``.
    """
    values = [Fraction(float(g)) for g in query.sample_values]
    n = len(values)
    total = sum(values)
    if total == 0:
        raise ZeroMeanError("sample values sum to zero")
    mean = total / n
    theta = Fraction(float(query.theta))
    measure = Fraction(float(query.domain_measure))
    deviating = sum(1 for g in values if abs(g - mean) >= theta * mean)
    variance = sum((g - mean) ** 2 for g in values) / n
    lhs = measure * deviating / n
    # theta**-2 * |D| * (|D| * int g^2 / (int g)^2 - 1)  with sample-mean quadrature
    rhs = measure * variance / (theta * theta * mean * mean)
    return float(lhs), float(rhs)
