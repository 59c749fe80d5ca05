"""Seeded samplers shared by the Monte Carlo estimators."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import InvalidSamplerError

UNIFORM = "uniform-monte-carlo"
LATTICE = "lattice-grid"
MODES = (UNIFORM, LATTICE)

DEFAULT_SEED = 42
THREADS_ENV = "COPIES_LAB_THREADS"

_MASK64 = (1 << 64) - 1

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = DEFAULT_SEED
    samples: int = 10_000
    mode: str = UNIFORM

    def __post_init__(self):
        if int(self.samples) < 1:
            raise InvalidSamplerError(f"samples must be >= 1, got {self.samples}")
        if self.mode not in MODES:
            raise InvalidSamplerError(f"unknown sampler mode {self.mode!r}")

    def rng(self, *key: int) -> np.random.Generator:
        """Generator for the substream addressed by ``key``.

        Distinct keys give statistically independent streams; the same key
        always gives the same stream.
        """
        return np.random.default_rng(substream(self.seed, *key))

    def with_samples(self, samples: int) -> "SamplerConfig":
        return SamplerConfig(self.seed, samples, self.mode)

    def with_seed(self, seed: int) -> "SamplerConfig":
        return SamplerConfig(seed, self.samples, self.mode)


def substream(seed: int, *key: int) -> np.random.SeedSequence:
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in key]
    return np.random.SeedSequence(entropy)


def unit_sphere(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform points on S^{dim-1} by normalising Gaussian vectors."""
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian vector has probability zero, but guard anyway
    bad = norms == 0.0
    while bad.any():
        g[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
        bad = norms == 0.0
    return g / norms[:, None]


def unit_ball(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    directions = unit_sphere(rng, count, dim)
    radii = rng.random(count) ** (1.0 / dim)
    return directions * radii[:, None]


def shifted_lattice_ball(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Randomly shifted cubic lattice restricted to the unit ball.

    The spacing is chosen so that roughly ``count`` lattice points fall in
    the ball.
    """
    from .kernel import ball_volume

    spacing = (ball_volume(dim, 1.0) / count) ** (1.0 / dim)
    per_axis = int(np.ceil(2.0 / spacing)) + 2
    shift = rng.random(dim)
    axes = [(np.arange(per_axis) + shift[i]) * spacing - 1.0 - spacing for i in range(dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    return grid[np.einsum("ij,ij->i", grid, grid) <= 1.0]


def binomial_se(p: float, count: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / count))


def thread_count(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], threads: int | None = None) -> list[R]:
    """Map ``fn`` over ``items`` and return results in input order.

    Work is spread over a thread pool when more than one thread is allowed;
    the output is identical either way.
    """
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
