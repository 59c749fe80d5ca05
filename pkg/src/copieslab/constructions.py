"""Annular sets, quadratic radial sequences and the AP-avoidance certificate.

If ``x_0, ..., x_{n-1}`` is an isometric image of ``0, r, ..., (n-1) r`` then
``a_k = |x_k|^2`` obeys ``a_{k+2} - 2 a_{k+1} + a_k = 2 r^2``, hence
``a_k = r^2 k^2 + A k + B``.  The annular set
``{x : dist(|x|^2, Z) < (1 - eps)/2}`` contains the progression only if the
first n terms of ``a_k mod 1`` miss the arc ``[(1-eps)/2, (1+eps)/2]``.
The certificate here shows that, for a given n and scale, every choice of
``A`` and ``B`` hits that arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional, Sequence

import numpy as np

from .compensated import GOLDEN_Z, dd_from_decimal, frac_mul, frac_sum
from .discrepancy import extreme_discrepancy_rows
from .errors import GridTooCoarseError
from .sampling import ordered_map
from .sets import SetOracle

# largest k with k*k exactly representable
_MAX_TERMS = 94_906_265


def _dist_to_int(t):
    return np.abs(t - np.round(t))


@dataclass(frozen=True)
class AnnularSet:
    dimension: int
    gap: float

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if not 0 < self.gap < 1:
            raise ValueError("gap must lie in (0, 1)")

    @property
    def radial_density(self) -> float:
        return 1.0 - self.gap

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return _dist_to_int(np.einsum("ij,ij->i", p, p)) < (1.0 - self.gap) / 2

    def oracle(self) -> SetOracle:
        return SetOracle(self.dimension, self.contains, label=f"annular(eps={self.gap})")


@dataclass(frozen=True)
class BourgainSet:
    dimension: int
    s: float

    def __post_init__(self):
        if not 0 < self.s < 0.25:
            raise ValueError("s must lie in (0, 1/4)")

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        sq = np.einsum("ij,ij->i", p, p)
        return sq - np.floor(sq) <= self.s

    def oracle(self) -> SetOracle:
        return SetOracle(self.dimension, self.contains, label=f"bourgain(s={self.s})")


def annular_membership(annular: AnnularSet, x) -> bool:
    return bool(annular.contains(x)[0])


def epsilon_of_n(n: int) -> tuple[float, bool]:
    """``(10 log n / n^(1/5), void)`` where ``void`` means the value is >= 1."""
    if n < 2:
        raise ValueError("n must be >= 2")
    eps = 10 * math.log(n) / n**0.2
    return eps, eps >= 1


@dataclass(frozen=True)
class AdmissibleScale:
    """Scale ``r`` with ``r^2 = offset + z``, z the golden ratio ``(sqrt5 - 1)/2``."""

    offset: int

    def __post_init__(self):
        if int(self.offset) != self.offset or self.offset < 0:
            raise ValueError("offset must be a non-negative integer")

    @property
    def r_squared_dd(self) -> tuple[float, float]:
        return dd_from_decimal(Decimal(int(self.offset)) + Decimal(GOLDEN_Z))

    @property
    def r_squared(self) -> float:
        return self.r_squared_dd[0]

    @property
    def r(self) -> float:
        return float((Decimal(int(self.offset)) + Decimal(GOLDEN_Z)).sqrt())


def admissible_scale(m: int) -> AdmissibleScale:
    return AdmissibleScale(m)


@dataclass(frozen=True)
class QuadraticSeq:
    """Parameters of ``a_k = r^2 k^2 + A k + B``.

    ``r_squared`` is a float or a double-double ``(hi, lo)`` pair.
    """

    r_squared: float | tuple[float, float]
    A: float
    B: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.n > _MAX_TERMS:
            raise ValueError(f"n must be <= {_MAX_TERMS}")

    @property
    def r_squared_dd(self) -> tuple[float, float]:
        if isinstance(self.r_squared, tuple):
            return float(self.r_squared[0]), float(self.r_squared[1])
        return float(self.r_squared), 0.0


def quadratic_terms(r_squared_dd: tuple[float, float], A, B, n: int) -> np.ndarray:
    """``(r^2 k^2 + A k + B) mod 1`` for ``k < n``; ``A`` and ``B`` may be arrays.

    With array ``A``/``B`` of shape ``(rows,)`` the result has shape
    ``(rows, n)``.
    """
    hi, lo = r_squared_dd
    k = np.arange(n, dtype=np.float64)
    quad = frac_mul(hi, lo, k * k)
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim == 0 and B.ndim == 0:
        lin = frac_mul(float(A), 0.0, k)
        return frac_sum(quad, lin, np.full(n, float(B) - math.floor(float(B))))
    A = np.broadcast_to(A, np.broadcast(A, B).shape)[:, None]
    B = np.broadcast_to(B, A.shape[:1])[:, None]
    lin = frac_mul(A, 0.0, k[None, :])
    return frac_sum(np.broadcast_to(quad, lin.shape), lin, np.broadcast_to(B - np.floor(B), lin.shape))


def quadratic_sequence(params: QuadraticSeq) -> np.ndarray:
    return quadratic_terms(params.r_squared_dd, params.A, params.B, params.n)


def verify_parallelogram_recurrence(points, r: float) -> np.ndarray:
    """Residuals ``a_{k+2} - 2 a_{k+1} + a_k - 2 r^2`` with ``a_k = |x_k|^2``."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or len(x) < 3:
        raise ValueError("need at least three points given as rows")
    a = np.einsum("ij,ij->i", x, x)
    return a[2:] - 2 * a[1:-1] + a[:-2] - 2 * r * r


def gap_hit_test(seq, eps: float) -> Optional[int]:
    """Smallest k with ``seq[k]`` in ``[(1-eps)/2, (1+eps)/2]``, or None."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    s = np.asarray(seq, dtype=np.float64)
    hit = np.flatnonzero((s >= (1 - eps) / 2) & (s <= (1 + eps) / 2))
    return int(hit[0]) if len(hit) else None


def bourgain_triple_search(r_squared: float | tuple[float, float], s: float, step: float) -> np.ndarray:
    """Grid ``(A, B)`` in ``[0,1)^2`` with ``B``, ``r^2+A+B``, ``4r^2+2A+B`` all in ``[0, s]`` mod 1.

    These are the squared norms of an isometric image of ``{0, r, 2r}``, so
    an empty result means no such image lies in the Bourgain set (at grid
    resolution).
    """
    hi, lo = r_squared if isinstance(r_squared, tuple) else (float(r_squared), 0.0)
    grid = np.arange(0.0, 1.0, step)
    A, B = np.meshgrid(grid, grid, indexing="ij")
    A, B = A.ravel(), B.ravel()
    one = frac_sum(np.full_like(A, frac_mul(hi, lo, 1.0)), A, B)
    four = frac_sum(np.full_like(A, frac_mul(hi, lo, 4.0)), frac_mul(A, 0.0, 2.0), B)
    ok = (B <= s) & (one <= s) & (four <= s)
    return np.column_stack([A[ok], B[ok]])


# -- certificate -------------------------------------------------------------


@dataclass(frozen=True)
class AvoidanceCertificate:
    n: int
    scale: AdmissibleScale
    eps0: float
    a_grid_step: float
    max_discrepancy_found: float
    lipschitz_slack: float
    verdict: bool
    worst_A: float = 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "offset": self.scale.offset,
            "r_squared": self.scale.r_squared,
            "eps0": self.eps0,
            "a_grid_step": self.a_grid_step,
            "max_discrepancy": self.max_discrepancy_found,
            "slack": self.lipschitz_slack,
            "verdict": self.verdict,
        }


def grid_discrepancies(n: int, scale: AdmissibleScale, a_grid_step: float, threads: int | None = None, block: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Extreme discrepancy of the first n terms for every A on the grid (B = 0)."""
    grid = np.arange(0.0, 1.0, a_grid_step)
    dd = scale.r_squared_dd
    blocks = [grid[i : i + block] for i in range(0, len(grid), block)]
    parts = ordered_map(lambda a: extreme_discrepancy_rows(quadratic_terms(dd, a, 0.0, n)), blocks, threads)
    return grid, np.concatenate(parts)


def ap_avoidance_certificate(
    n: int,
    scale: AdmissibleScale,
    eps0: float,
    a_grid_step: float,
    threads: int | None = None,
) -> AvoidanceCertificate:
    """Certify that every quadratic sequence at this scale hits every arc of length ``eps0``.

    Discrepancy is invariant under rotation of the circle, which covers all
    B at once.  Moving A by at most ``a_grid_step`` moves term k by at most
    ``k * a_grid_step``, so the discrepancy changes by at most
    ``2 (n-1) a_grid_step``; the verdict is true iff the grid maximum plus
    that slack stays below ``eps0``.
    """
    if not 0 < eps0 < 1:
        raise ValueError("eps0 must lie in (0, 1)")
    if not a_grid_step > 0:
        raise ValueError("a_grid_step must be positive")
    slack = 2 * (n - 1) * a_grid_step
    if slack >= eps0:
        raise GridTooCoarseError(f"slack 2(n-1)*step = {slack} >= eps0 = {eps0}")
    grid, disc = grid_discrepancies(n, scale, a_grid_step, threads)
    worst = int(np.argmax(disc))
    top = float(disc[worst])
    return AvoidanceCertificate(n, scale, eps0, a_grid_step, top, slack, top + slack < eps0, float(grid[worst]))


def calibrated_certificate(
    n: int,
    scale: AdmissibleScale,
    a_grid_step: float,
    factor: float = 1.05,
    threads: int | None = None,
) -> AvoidanceCertificate:
    """Certificate at ``eps0 = factor * (grid maximum + slack)``, clamped below 1."""
    _, disc = grid_discrepancies(n, scale, a_grid_step, threads)
    slack = 2 * (n - 1) * a_grid_step
    eps0 = min(factor * (float(disc.max()) + slack), math.nextafter(1.0, 0.0))
    return ap_avoidance_certificate(n, scale, eps0, a_grid_step, threads)


def certificate_spot_check(cert: AvoidanceCertificate, samples: int, seed: int, chunk: int = 20_000) -> list[tuple[float, float]]:
    """Random ``(A, B)`` pairs whose first n terms miss the forbidden arc.

    An empty list is what a true verdict predicts.
    """
    rng = np.random.default_rng(seed)
    lo, hi = (1 - cert.eps0) / 2, (1 + cert.eps0) / 2
    dd = cert.scale.r_squared_dd
    misses = []
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        A, B = rng.random(m), rng.random(m)
        terms = quadratic_terms(dd, A, B, cert.n)
        hit = np.any((terms >= lo) & (terms <= hi), axis=1)
        misses.extend(zip(A[~hit].tolist(), B[~hit].tolist()))
    return misses
