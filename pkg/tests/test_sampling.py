import numpy as np
import pytest
from scipy import stats

from copieslab.errors import InvalidSamplerError
from copieslab.sampling import (
    LATTICE,
    THREADS_ENV,
    SamplerConfig,
    binomial_se,
    ordered_map,
    shifted_lattice_ball,
    thread_count,
    unit_ball,
    unit_sphere,
)


def test_sampler_validation():
    with pytest.raises(InvalidSamplerError):
        SamplerConfig(samples=0)
    with pytest.raises(InvalidSamplerError):
        SamplerConfig(mode="quasi")
    with pytest.raises(ValueError):
        SamplerConfig(samples=-3)


def test_default_seed_is_42():
    assert SamplerConfig().seed == 42


def test_substreams_are_reproducible_and_distinct():
    s = SamplerConfig(5)
    a = s.rng(1, 2).random(4)
    assert np.array_equal(a, s.rng(1, 2).random(4))
    assert not np.array_equal(a, s.rng(2, 1).random(4))
    assert not np.array_equal(a, SamplerConfig(6).rng(1, 2).random(4))


def test_unit_sphere_points_have_unit_norm_and_uniform_marginal():
    rng = np.random.default_rng(0)
    pts = unit_sphere(rng, 20_000, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    # on S^2 each coordinate is uniform on [-1, 1]
    assert stats.kstest(pts[:, 2], "uniform", args=(-1, 2)).pvalue > 0.01


def test_unit_ball_radius_distribution():
    rng = np.random.default_rng(1)
    r = np.linalg.norm(unit_ball(rng, 20_000, 2), axis=1)
    assert stats.kstest(r**2, "uniform").pvalue > 0.01


def test_lattice_ball_size_and_containment():
    pts = shifted_lattice_ball(np.random.default_rng(2), 10_000, 2)
    assert np.all(np.linalg.norm(pts, axis=1) <= 1)
    assert abs(len(pts) - 10_000) < 500
    assert SamplerConfig(mode=LATTICE).mode == LATTICE


def test_binomial_se():
    assert binomial_se(0.5, 100) == pytest.approx(0.05)
    assert binomial_se(1.0, 10) == 0.0


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count() == 3
    assert thread_count(2) == 2
    monkeypatch.setenv(THREADS_ENV, "junk")
    assert thread_count() == 1


def test_ordered_map_is_thread_independent():
    items = list(range(50))
    f = lambda x: x * x  # noqa: E731
    assert ordered_map(f, items, 1) == ordered_map(f, items, 8) == [x * x for x in items]
