"""Membership-oracle sets and a few standard ones.

A :class:`SetOracle` wraps a *vectorised* predicate: it receives an
``(m, d)`` array of points and returns an ``(m,)`` boolean array.  Predicates
must be deterministic and safe to call from several threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Membership = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BallRegion:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @classmethod
    def at_origin(cls, dim: int, radius: float) -> "BallRegion":
        return cls((0.0,) * dim, radius)

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=np.float64)

    def contains(self, points) -> np.ndarray:
        diff = np.atleast_2d(np.asarray(points, dtype=np.float64)) - self.center_array
        return np.einsum("ij,ij->i", diff, diff) <= self.radius**2

    def inflated(self, by: float) -> "BallRegion":
        return BallRegion(self.center, self.radius + by)

    def grid(self, step: float) -> np.ndarray:
        """Points ``center + step * k`` (k integer) inside the ball.

        Rows are in lexicographic order of the integer index ``k``.
        """
        if not step > 0:
            raise ValueError("grid step must be positive")
        kmax = int(np.floor(self.radius / step))
        axis = np.arange(-kmax, kmax + 1)
        d = self.dimension
        idx = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        pts = self.center_array + step * idx
        return pts[self.contains(pts)]


@dataclass(frozen=True)
class SetOracle:
    dimension: int
    membership: Membership
    bounding_hint: Optional[BallRegion] = None
    label: str = ""

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if self.bounding_hint is not None and self.bounding_hint.dimension != self.dimension:
            raise ValueError("bounding hint has the wrong dimension")

    @property
    def bounded(self) -> bool:
        return self.bounding_hint is not None

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dimension:
            raise ValueError(f"points must have {self.dimension} columns")
        out = np.asarray(self.membership(pts), dtype=bool)
        if self.bounding_hint is not None:
            out &= self.bounding_hint.contains(pts)
        return out[0:1] if single else out

    def __contains__(self, point) -> bool:
        return bool(self.contains(point)[0])

    @classmethod
    def from_pointwise(cls, dimension: int, predicate: Callable[[np.ndarray], bool], **kw) -> "SetOracle":
        """Wrap a scalar predicate ``point -> bool``."""

        def membership(points):
            return np.fromiter((bool(predicate(p)) for p in points), dtype=bool, count=len(points))

        return cls(dimension, membership, **kw)


def everything(dim: int) -> SetOracle:
    return SetOracle(dim, lambda p: np.ones(len(p), dtype=bool), label="everything")


def empty(dim: int) -> SetOracle:
    # the empty set is trivially bounded
    return SetOracle(dim, lambda p: np.zeros(len(p), dtype=bool), BallRegion.at_origin(dim, 1.0), "empty")


def ball(center, radius: float) -> SetOracle:
    region = BallRegion(tuple(center), radius)
    return SetOracle(region.dimension, region.contains, region, f"ball(r={radius})")


def halfspace(normal, offset: float = 0.0) -> SetOracle:
    """``{x : <normal, x> >= offset}``."""
    n = np.asarray(normal, dtype=np.float64)
    return SetOracle(len(n), lambda p: p @ n >= offset, label="halfspace")


def complement(oracle: SetOracle) -> SetOracle:
    return SetOracle(oracle.dimension, lambda p: ~oracle.contains(p), label=f"not({oracle.label})")


def union(*oracles: SetOracle) -> SetOracle:
    dim = oracles[0].dimension

    def membership(p):
        out = np.zeros(len(p), dtype=bool)
        for o in oracles:
            out |= o.contains(p)
        return out

    hint = None
    if all(o.bounded for o in oracles):
        # smallest origin-free enclosing ball is overkill; enclose around the first center
        c = oracles[0].bounding_hint.center_array
        rad = max(np.linalg.norm(o.bounding_hint.center_array - c) + o.bounding_hint.radius for o in oracles)
        hint = BallRegion(tuple(c), float(rad))
    return SetOracle(dim, membership, hint, "union")


def intersection(*oracles: SetOracle, hint: Optional[BallRegion] = None) -> SetOracle:
    dim = oracles[0].dimension

    def membership(p):
        out = np.ones(len(p), dtype=bool)
        for o in oracles:
            out &= o.contains(p)
        return out

    if hint is None:
        bounded = [o.bounding_hint for o in oracles if o.bounded]
        hint = min(bounded, key=lambda b: b.radius) if bounded else None
    return SetOracle(dim, membership, hint, "intersection")


def cube(half_side: float, dim: int) -> SetOracle:
    """Axis-aligned cube ``[-h, h]^d`` as an intersection of half-spaces."""
    faces = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        faces.append(halfspace(e, -half_side))
        faces.append(halfspace(-e, -half_side))
    hint = BallRegion.at_origin(dim, half_side * np.sqrt(dim) * (1 + 1e-12))
    return intersection(*faces, hint=hint)


def periodic_cell(dim: int, density: float, period: float = 1.0) -> SetOracle:
    """Complement of a periodic array of cubic holes.

    Each unit cell ``[0, period)^d`` loses the cube ``[0, h)^d`` with
    ``(h/period)**d = 1 - density``.
    """
    if not 0 < density < 1:
        raise ValueError("density must lie in (0, 1)")
    hole = period * (1.0 - density) ** (1.0 / dim)

    def membership(p):
        local = np.mod(p, period)
        return ~np.all(local < hole, axis=1)

    return SetOracle(dim, membership, label=f"periodic_cell(density={density})")
