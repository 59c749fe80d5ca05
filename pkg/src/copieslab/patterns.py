"""Patterns, rotations and searches for translated or similar copies.

Searches are Las Vegas: every returned witness has been re-checked against
the membership oracle; ``None`` means nothing was found within budget, not
that no copy exists.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegeneratePatternError, PointNotInSetError
from .measure import densest_ball_scan, iter_qualifying_centers, sphere_coverage
from .sampling import SamplerConfig, substream
from .sets import BallRegion, SetOracle

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Pattern:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or len(pts) < 2:
            raise DegeneratePatternError("a pattern needs at least two points given as rows")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if pdist(pts).min() == 0.0:
            raise DegeneratePatternError("pattern points must be distinct")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def sep(self) -> float:
        return float(pdist(self.points).min())

    @property
    def diam(self) -> float:
        return float(pdist(self.points).max())

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "points": self.points.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "Pattern":
        pts = np.asarray(doc["points"], dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != int(doc["dimension"]):
            raise ValueError("points do not match the declared dimension")
        return cls(pts)

    @classmethod
    def load(cls, path) -> "Pattern":
        return cls.from_json(json.loads(Path(path).read_text()))


def pattern_stats(P: Pattern) -> tuple[float, float]:
    d = pdist(P.points)
    return float(d.min()), float(d.max())


def equilateral_triangle(side: float = 1.0, dim: int = 2) -> Pattern:
    pts = np.zeros((3, dim))
    pts[1, 0] = side
    pts[2, 0] = side / 2
    pts[2, 1] = side * math.sqrt(3) / 2
    return Pattern(pts)


def progression(n: int, step: float = 1.0, dim: int = 2) -> Pattern:
    pts = np.zeros((n, dim))
    pts[:, 0] = step * np.arange(n)
    return Pattern(pts)


@dataclass(frozen=True)
class Placement:
    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.rotation, dtype=np.float64)
        d = Q.shape[0]
        if Q.shape != (d, d):
            raise ValueError("rotation must be square")
        if np.max(np.abs(Q.T @ Q - np.eye(d))) > ORTHO_TOL or abs(np.linalg.det(Q) - 1) > ORTHO_TOL:
            raise ValueError("rotation must be in SO(d)")
        object.__setattr__(self, "rotation", Q)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64))

    def apply(self, points) -> np.ndarray:
        return self.scale * np.asarray(points) @ self.rotation.T + self.translation

    def to_json(self) -> dict:
        return {
            "scale": self.scale,
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
        }


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    key = seed if isinstance(seed, tuple) else (seed,)
    return np.random.default_rng(substream(*key))


def random_rotation(d: int, seed) -> np.ndarray:
    """Haar-distributed element of SO(d).

    QR of a Gaussian matrix with the signs of R's diagonal moved into Q gives
    Haar measure on O(d); flipping one column when ``det = -1`` carries it
    to SO(d).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = _rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_rotations(d: int, count: int, seed) -> np.ndarray:
    """``count`` independent Haar rotations as a ``(count, d, d)`` array."""
    rng = _rng(seed)
    g = rng.standard_normal((count, d, d))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    q = q * signs[:, None, :]
    flip = np.linalg.det(q) < 0
    q[flip, :, 0] *= -1
    return q


@dataclass(frozen=True)
class RotationMeasure:
    estimate: float
    std_error: float
    lower_bound: float
    lower_bound_se: float
    coverages: tuple[float, ...]


def rotation_success_measure(
    oracle: SetOracle,
    x0,
    P: Pattern,
    samples: int,
    seed: int,
    coverage_samples: int = 20_000,
) -> RotationMeasure:
    """Haar measure of rotations about ``x0`` that carry P into E.

    ``lower_bound = 1 - sum_i (1 - f_i)`` where ``f_i`` is the coverage of the
    sphere about ``x0`` through the i-th pattern point: the union bound
    that makes a good rotation exist once every ``f_i > (n-2)/(n-1)``.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if not oracle.contains(x0)[0]:
        raise PointNotInSetError("x0 is not in the set")
    rel = P.points - x0
    radii = np.linalg.norm(rel, axis=1)
    moving = rel[radii > 0]
    Qs = random_rotations(P.dimension, samples, (seed, 1))
    images = np.einsum("sij,pj->spi", Qs, moving) + x0
    ok = oracle.contains(images.reshape(-1, P.dimension)).reshape(samples, len(moving)).all(axis=1)
    p = float(ok.mean())
    cov_sampler = SamplerConfig(seed, coverage_samples)
    records = [sphere_coverage(oracle, x0, r, cov_sampler, 41, i) for i, r in enumerate(radii[radii > 0])]
    f = [c.fraction for c in records]
    lower = 1.0 - sum(1.0 - x for x in f)
    lower_se = math.sqrt(sum(c.std_error**2 for c in records))
    return RotationMeasure(p, math.sqrt(p * (1 - p) / samples), lower, lower_se, tuple(f))


@dataclass(frozen=True)
class SearchConfig:
    rotation_samples: int = 10_000
    translation_grid_step: Optional[float] = None
    candidate_region: Optional[BallRegion] = None
    seed: int = 42
    coverage_samples: int = 2_000
    density_samples: int = 2_000
    max_centers: int = 5_000

    def __post_init__(self):
        if self.rotation_samples < 1:
            raise ValueError("rotation_samples must be >= 1")


def _verified(oracle: SetOracle, images: np.ndarray) -> bool:
    return bool(oracle.contains(images).all())


def _region(oracle: SetOracle, config: SearchConfig, fallback: float) -> BallRegion:
    if config.candidate_region is not None:
        return config.candidate_region
    return BallRegion.at_origin(oracle.dimension, fallback)


def find_translated_copy(oracle: SetOracle, P: Pattern, r: float, config: SearchConfig) -> Optional[np.ndarray]:
    """Translation z with ``z + r P`` inside E, or None.

    Locates a ball where E is densest and then scans translations on a grid
    inside it.  A set of density above ``(n-1)/n`` in a ball is guaranteed to
    contain such a z there, since the n translates of E by ``-r p_i`` cannot
    all miss a common point.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    pts = r * (P.points - P.points[0])
    reach = float(np.linalg.norm(pts, axis=1).max())
    step = config.translation_grid_step or max(r * P.sep / 10, 1e-9)
    region = _region(oracle, config, 4 * reach + 4 * step)
    ball_radius = max(reach, step)
    sampler = SamplerConfig(config.seed, config.density_samples)
    dense = densest_ball_scan(oracle, ball_radius, region, max(ball_radius / 2, step), sampler)
    starts = BallRegion(dense.center, ball_radius).grid(step)
    for chunk in np.array_split(starts, max(1, len(starts) // 4096)):
        if len(chunk) == 0:
            continue
        images = chunk[:, None, :] + pts[None, :, :]
        ok = oracle.contains(images.reshape(-1, P.dimension)).reshape(len(chunk), P.n).all(axis=1)
        for i in np.flatnonzero(ok):
            z = chunk[i] - r * P.points[0]
            if _verified(oracle, z + r * P.points):
                return z
    return None


def find_similar_copy(oracle: SetOracle, P: Pattern, r: float, config: SearchConfig) -> Optional[Placement]:
    """A verified placement ``r Q P + z`` inside E, or None.

    Candidate centers for the first pattern point come from a grid over the
    densest ball found; a center is kept only if it lies in E and the
    spheres through the other pattern points are covered beyond
    ``(n-2)/(n-1)``.  Rotations are then sampled at that center (identity
    first) until every image point lands in E.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    x0 = P.points[0]
    rel = r * (P.points - x0)
    radii = np.linalg.norm(rel[1:], axis=1)
    reach = float(radii.max())
    rho_prime = (P.n - 2) / (P.n - 1)
    step = config.translation_grid_step or r * P.sep / 10
    region = _region(oracle, config, 2 * reach)
    sampler = SamplerConfig(config.seed, config.coverage_samples)
    dense = densest_ball_scan(
        oracle, reach, region, max(reach / 2, step), SamplerConfig(config.seed, config.density_samples)
    )
    centers = BallRegion(dense.center, reach).grid(step)[: config.max_centers]
    d = P.dimension
    batch = min(config.rotation_samples, 1024)
    for i, center, cov in iter_qualifying_centers(oracle, centers, radii, sampler):
        if min(cov) <= rho_prime:
            continue
        c = np.asarray(center)
        if _verified(oracle, c + rel):
            return Placement(r, np.eye(d), c - r * x0)
        tried = 0
        b = 0
        while tried < config.rotation_samples:
            m = min(batch, config.rotation_samples - tried)
            Qs = random_rotations(d, m, (config.seed, 2, i, b))
            images = np.einsum("sij,pj->spi", Qs, rel) + c
            ok = oracle.contains(images.reshape(-1, d)).reshape(m, P.n).all(axis=1)
            for j in np.flatnonzero(ok):
                placement = Placement(r, Qs[j], c - r * Qs[j] @ x0)
                if _verified(oracle, placement.apply(P.points)):
                    return placement
            tried += m
            b += 1
    return None


def rho_min_bounds(n: int) -> tuple[float, float]:
    """Bracket for the critical density guaranteeing all large copies of n-point patterns."""
    if n < 2:
        raise ValueError("n must be >= 2")
    eps = 10 * math.log(n) / n**0.2
    return max(0.0, 1.0 - eps), 1.0 - 1.0 / (n - 1)
