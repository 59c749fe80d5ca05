"""Density and sphere-coverage estimators for membership-oracle sets.

Finite-scale stand-ins for the density notions used throughout: ball
densities, the best ball at a given radius, spherical coverage ``g_r(x)``
and the two integral identities for ``g_r`` (mean and mean square).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyRegionError, UnboundedOracleError
from .kernel import KernelSpec, ball_volume, kernel_profile, surface_area
from .sampling import (
    LATTICE,
    SamplerConfig,
    binomial_se,
    ordered_map,
    shifted_lattice_ball,
    unit_ball,
    unit_sphere,
)
from .sets import BallRegion, SetOracle

_BATCH = 2048


@dataclass(frozen=True)
class CoverageRecord:
    center: tuple[float, ...]
    radius: float
    fraction: float
    std_error: float

    def measure(self, dimension: int) -> float:
        """Estimate of ``g_r(x)``, the surface measure of the set on the sphere."""
        return self.fraction * surface_area(KernelSpec(dimension, self.radius))


@dataclass(frozen=True)
class DenseBall:
    center: tuple[float, ...]
    radius: float
    density: float
    std_error: float
    candidates: int

    @property
    def region(self) -> BallRegion:
        return BallRegion(self.center, self.radius)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    lhs_se: float
    rhs_se: float

    @property
    def combined_se(self) -> float:
        return math.hypot(self.lhs_se, self.rhs_se)

    @property
    def relative_gap(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return abs(self.lhs - self.rhs) / abs(self.rhs)


@dataclass(frozen=True)
class ScanResult:
    found: bool
    point: Optional[tuple[float, ...]]
    coverages: tuple[float, ...]
    best_point: Optional[tuple[float, ...]]
    best_min_coverage: float
    candidates_checked: int


def _ball_points(sampler: SamplerConfig, dim: int, *key: int) -> np.ndarray:
    rng = sampler.rng(*key)
    if sampler.mode == LATTICE:
        return shifted_lattice_ball(rng, sampler.samples, dim)
    return unit_ball(rng, sampler.samples, dim)


def ball_density(oracle: SetOracle, ball: BallRegion, sampler: SamplerConfig) -> tuple[float, float]:
    """Estimate ``vol(E & B) / vol(B)`` and its standard error.

    In lattice mode the points form a randomly shifted grid; the reported
    error is then the binomial value for the same point count, a nominal
    resolution rather than a sampling error.
    """
    pts = ball.center_array + ball.radius * _ball_points(sampler, oracle.dimension)
    hits = oracle.contains(pts)
    p = float(np.mean(hits))
    return p, binomial_se(p, len(pts))


def densest_ball_scan(
    oracle: SetOracle,
    radius: float,
    search_region: BallRegion,
    grid_step: float,
    sampler: SamplerConfig,
    threads: int | None = None,
) -> DenseBall:
    """Grid center maximising the estimated density of ``B_radius(center)``.

    All candidate balls share the same sample pattern (common random
    numbers), so differences between candidates are not sampling noise.
    Ties go to the first center in lexicographic grid order.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    centers = search_region.grid(grid_step)
    if len(centers) == 0:
        raise EmptyRegionError("search grid is empty")
    offsets = radius * _ball_points(sampler, oracle.dimension)

    def density(c):
        return float(np.mean(oracle.contains(c + offsets)))

    values = np.array(ordered_map(density, centers, threads))
    best = int(np.argmax(values))
    p = float(values[best])
    return DenseBall(tuple(centers[best]), radius, p, binomial_se(p, len(offsets)), len(centers))


def sphere_coverage(oracle: SetOracle, center, radius: float, sampler: SamplerConfig, *key: int) -> CoverageRecord:
    """Fraction of the sphere ``S_radius(center)`` lying in the set.

    ``key`` selects a seed substream; the same key and seed give the same
    sphere points, which makes coverage of a set and of its complement sum
    to exactly one.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=np.float64)
    pts = c + radius * unit_sphere(sampler.rng(*key), sampler.samples, oracle.dimension)
    p = float(np.mean(oracle.contains(pts)))
    return CoverageRecord(tuple(c), float(radius), p, binomial_se(p, sampler.samples))


def _require_bounded(oracle: SetOracle) -> BallRegion:
    if not oracle.bounded:
        raise UnboundedOracleError(f"oracle {oracle.label!r} has no bounding ball")
    return oracle.bounding_hint


def _check_region(hint: BallRegion, radius: float, region: BallRegion) -> None:
    gap = np.linalg.norm(hint.center_array - region.center_array) + hint.radius + radius
    if gap > region.radius * (1 + 1e-12):
        raise ValueError("integration region must contain the bounding ball inflated by the radius")


def _set_volume(oracle: SetOracle, hint: BallRegion, sampler: SamplerConfig, count: int) -> tuple[float, float]:
    vol = ball_volume(oracle.dimension, hint.radius)
    sub = SamplerConfig(sampler.seed, count, sampler.mode)
    pts = hint.center_array + hint.radius * _ball_points(sub, oracle.dimension, 7)
    p = float(np.mean(oracle.contains(pts)))
    return vol * p, vol * binomial_se(p, len(pts))


def _nested_sphere_hits(
    oracle: SetOracle,
    radius: float,
    region: BallRegion,
    sampler: SamplerConfig,
    inner: int,
    threads: int | None,
) -> list[np.ndarray]:
    """Per outer point, the number of inner sphere samples landing in E."""
    d = oracle.dimension
    n = sampler.samples
    starts = list(range(0, n, _BATCH))

    def batch(args):
        b, start = args
        m = min(_BATCH, n - start)
        rng = sampler.rng(11, b)
        outer = region.center_array + region.radius * unit_ball(rng, m, d)
        dirs = unit_sphere(rng, m * inner, d).reshape(m, inner, d)
        pts = (outer[:, None, :] + radius * dirs).reshape(-1, d)
        return oracle.contains(pts).reshape(m, inner).sum(axis=1)

    return ordered_map(batch, list(enumerate(starts)), threads)


def mean_identity_check(
    oracle: SetOracle,
    radius: float,
    integration_region: BallRegion,
    sampler: SamplerConfig,
    inner_samples: int = 128,
    threads: int | None = None,
) -> IdentityCheck:
    """Compare ``integral of g_r`` with ``surface area * vol(E)``.

    ``sampler.samples`` outer points are drawn in the region, each carrying
    ``inner_samples`` points on its sphere.
    """
    hint = _require_bounded(oracle)
    _check_region(hint, radius, integration_region)
    area = surface_area(KernelSpec(oracle.dimension, radius))
    region_vol = ball_volume(oracle.dimension, integration_region.radius)
    hits = np.concatenate(_nested_sphere_hits(oracle, radius, integration_region, sampler, inner_samples, threads))
    g = area * hits / inner_samples
    lhs = region_vol * float(np.mean(g))
    lhs_se = region_vol * float(np.std(g, ddof=1)) / math.sqrt(len(g)) if len(g) > 1 else 0.0
    vol, vol_se = _set_volume(oracle, hint, sampler, min(sampler.samples * inner_samples, 4_000_000))
    return IdentityCheck(lhs, area * vol, lhs_se, area * vol_se)


def kernel_pair_integral(
    first: SetOracle,
    second: SetOracle,
    radius: float,
    sampler: SamplerConfig,
    chunk: int = 500_000,
) -> tuple[float, float]:
    """Monte Carlo estimate of ``integral over E1 x E2 of K_r(y - z)``.

    Pairs are drawn uniformly from the product of the two bounding balls and
    weighted by membership.  A pair landing exactly on a singularity of the
    kernel is redrawn.
    """
    h1, h2 = _require_bounded(first), _require_bounded(second)
    d = first.dimension
    spec = KernelSpec(d, radius)
    weight = ball_volume(d, h1.radius) * ball_volume(d, h2.radius)
    n = sampler.samples
    total = 0.0
    total_sq = 0.0
    for b, start in enumerate(range(0, n, chunk)):
        m = min(chunk, n - start)
        rng = sampler.rng(21, b)
        y = h1.center_array + h1.radius * unit_ball(rng, m, d)
        z = h2.center_array + h2.radius * unit_ball(rng, m, d)
        k = kernel_profile(spec, np.linalg.norm(y - z, axis=1))
        bad = ~np.isfinite(k)
        while bad.any():
            cnt = int(bad.sum())
            y[bad] = h1.center_array + h1.radius * unit_ball(rng, cnt, d)
            z[bad] = h2.center_array + h2.radius * unit_ball(rng, cnt, d)
            k[bad] = kernel_profile(spec, np.linalg.norm(y[bad] - z[bad], axis=1))
            bad = ~np.isfinite(k)
        vals = np.where(first.contains(y) & second.contains(z), k, 0.0)
        total += math.fsum(vals)
        total_sq += math.fsum(vals * vals)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return weight * mean, weight * math.sqrt(var / n)


def meansq_identity_check(
    oracle: SetOracle,
    radius: float,
    integration_region: BallRegion,
    sampler: SamplerConfig,
    inner_samples: int = 128,
    pair_samples: int = 1_000_000,
    threads: int | None = None,
) -> IdentityCheck:
    """Compare ``integral of g_r**2`` with ``double integral of K_r over E x E``.

    The left side squares the spherical coverage with the unbiased
    ``k (k - 1) / (n (n - 1))`` estimator of ``p**2``; the right side samples
    independent pairs.  The two estimators share no samples.
    """
    _require_bounded(oracle)
    _check_region(oracle.bounding_hint, radius, integration_region)
    if inner_samples < 2:
        raise ValueError("inner_samples must be >= 2")
    area = surface_area(KernelSpec(oracle.dimension, radius))
    region_vol = ball_volume(oracle.dimension, integration_region.radius)
    k = np.concatenate(_nested_sphere_hits(oracle, radius, integration_region, sampler, inner_samples, threads))
    k = k.astype(np.float64)
    g2 = area**2 * k * (k - 1) / (inner_samples * (inner_samples - 1))
    lhs = region_vol * float(np.mean(g2))
    lhs_se = region_vol * float(np.std(g2, ddof=1)) / math.sqrt(len(g2)) if len(g2) > 1 else 0.0
    rhs, rhs_se = kernel_pair_integral(oracle, oracle, radius, SamplerConfig(sampler.seed, pair_samples))
    return IdentityCheck(lhs, rhs, lhs_se, rhs_se)


def _coverages(oracle: SetOracle, point, radii: Sequence[float], sampler: SamplerConfig, index: int) -> list[float]:
    return [sphere_coverage(oracle, point, r, sampler, 31, index, j).fraction for j, r in enumerate(radii)]


def concentric_sphere_scan(
    oracle: SetOracle,
    center_candidates,
    radii: Sequence[float],
    rho_prime: float,
    sampler: SamplerConfig,
) -> ScanResult:
    """First candidate in E whose spheres of every radius are covered beyond ``rho_prime``.

    Returns a failure report carrying the best candidate (largest minimum
    coverage among candidates in E) when none qualifies.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("radii must be non-empty and positive")
    best, best_cov, checked = None, -1.0, 0
    for i, cand, cov in iter_qualifying_centers(oracle, center_candidates, radii, sampler, report_all=True):
        checked = i + 1
        if cov is None:
            continue
        low = min(cov)
        if low > best_cov:
            best, best_cov = cand, low
        if low > rho_prime:
            return ScanResult(True, cand, tuple(cov), cand, low, checked)
    return ScanResult(False, None, (), best, max(best_cov, 0.0), checked)


def iter_qualifying_centers(oracle, center_candidates, radii, sampler, report_all=False):
    """Yield ``(index, candidate, coverages)`` for candidates in E.

    With ``report_all`` candidates outside E are yielded with coverages
    ``None`` so callers can count them.
    """
    pts = np.atleast_2d(np.asarray(center_candidates, dtype=np.float64))
    if len(pts) == 0:
        return
    inside = oracle.contains(pts)
    for i, (p, ok) in enumerate(zip(pts, inside)):
        if not ok:
            if report_all:
                yield i, tuple(p), None
            continue
        yield i, tuple(p), _coverages(oracle, p, radii, sampler, i)
