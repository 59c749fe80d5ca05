import math

import numpy as np
import pytest

from copieslab.constructions import AdmissibleScale, AnnularSet
from copieslab.errors import EmptyRegionError, UnboundedOracleError
from copieslab.measure import (
    ball_density,
    concentric_sphere_scan,
    densest_ball_scan,
    kernel_pair_integral,
    mean_identity_check,
    meansq_identity_check,
    sphere_coverage,
)
from copieslab.sampling import LATTICE, SamplerConfig
from copieslab.sets import (
    BallRegion,
    SetOracle,
    ball,
    complement,
    cube,
    empty,
    everything,
    halfspace,
    intersection,
    periodic_cell,
    union,
)


# -- sets ---------------------------------------------------------------------


def test_ball_region_grid_is_lexicographic_and_inside():
    g = BallRegion.at_origin(2, 1.0).grid(0.5)
    assert np.all(np.linalg.norm(g, axis=1) <= 1.0)
    assert len(g) == 13
    assert [tuple(p) for p in g] == sorted(tuple(p) for p in g)


def test_oracle_shapes_and_membership():
    o = ball([0.0, 0.0], 1.0)
    assert o.contains([0.5, 0.0]).shape == (1,)
    assert o.contains(np.zeros((5, 2))).shape == (5,)
    assert [0.0, 0.9] in o and [0.0, 1.1] not in o
    with pytest.raises(ValueError):
        o.contains(np.zeros((2, 3)))


def test_from_pointwise_matches_vectorised():
    f = SetOracle.from_pointwise(2, lambda p: p[0] > p[1])
    pts = np.random.default_rng(0).standard_normal((100, 2))
    assert np.array_equal(f.contains(pts), pts[:, 0] > pts[:, 1])


def test_set_algebra():
    pts = np.random.default_rng(1).uniform(-3, 3, (2000, 2))
    a, b = ball([0, 0], 1.5), ball([1, 0], 1.5)
    assert np.array_equal(union(a, b).contains(pts), a.contains(pts) | b.contains(pts))
    assert np.array_equal(intersection(a, b).contains(pts), a.contains(pts) & b.contains(pts))
    assert np.array_equal(complement(a).contains(pts), ~a.contains(pts))
    c = cube(1.0, 2)
    assert np.array_equal(c.contains(pts), np.all(np.abs(pts) <= 1.0, axis=1))
    assert union(a, b).bounded and not complement(a).bounded


def test_periodic_cell_density():
    o = periodic_cell(2, 0.9)
    p, se = ball_density(o, BallRegion.at_origin(2, 50.0), SamplerConfig(3, 200_000))
    assert abs(p - 0.9) < 4 * se


# -- densities and coverage ------------------------------------------------------


def test_ball_density_trivial_sets():
    region = BallRegion((3.0, -2.0), 4.0)
    assert ball_density(everything(2), region, SamplerConfig()) == (1.0, 0.0)
    assert ball_density(empty(2), region, SamplerConfig()) == (0.0, 0.0)


@pytest.mark.parametrize("mode", ["uniform-monte-carlo", LATTICE])
def test_annular_radial_density(mode):
    p, se = ball_density(AnnularSet(2, 0.2).oracle(), BallRegion.at_origin(2, 200.0), SamplerConfig(4, 200_000, mode))
    assert abs(p - 0.8) < max(3 * se, 0.002)
    assert abs(p - 0.8) < 0.01


def test_densest_ball_single_ball():
    res = densest_ball_scan(ball([0, 0], 1.0), 1.0, BallRegion.at_origin(2, 5.0), 0.5, SamplerConfig(0, 4000))
    assert np.linalg.norm(res.center) <= 0.5
    assert res.density == 1.0


def test_densest_ball_everything_and_empty_grid(monkeypatch):
    res = densest_ball_scan(everything(2), 1.0, BallRegion.at_origin(2, 2.0), 1.0, SamplerConfig())
    assert res.density == 1.0
    # the grid always holds the region's center, so force an empty one
    monkeypatch.setattr(BallRegion, "grid", lambda self, step: np.empty((0, 2)))
    with pytest.raises(EmptyRegionError):
        densest_ball_scan(everything(2), 1.0, BallRegion((0.05, 0.05), 0.01), 0.1, SamplerConfig())
    monkeypatch.undo()
    with pytest.raises(ValueError):
        densest_ball_scan(everything(2), 1.0, BallRegion.at_origin(2, 2.0), 0.0, SamplerConfig())


def test_densest_ball_halfspace_against_exact_segment_density():
    step = 0.5
    region = BallRegion.at_origin(2, 3.0)
    res = densest_ball_scan(halfspace([1.0, 0.0]), 1.0, region, step, SamplerConfig(1, 4000))

    def exact(c):  # fraction of the unit disc at c with x >= 0
        t = np.clip(c[0], -1, 1)
        return (math.pi - math.acos(t) + t * math.sqrt(1 - t * t)) / math.pi

    best = max(exact(c) for c in region.grid(step))
    assert best == 1.0
    assert res.center[0] >= 1 - step
    assert res.density == pytest.approx(1.0)


def test_densest_ball_thread_independent():
    o = periodic_cell(2, 0.6)
    a = densest_ball_scan(o, 0.7, BallRegion.at_origin(2, 2.0), 0.25, SamplerConfig(9, 500), threads=1)
    b = densest_ball_scan(o, 0.7, BallRegion.at_origin(2, 2.0), 0.25, SamplerConfig(9, 500), threads=4)
    assert a == b


def test_sphere_coverage_examples():
    s = SamplerConfig(2, 20_000)
    assert sphere_coverage(ball([0, 0, 0], 2.0), [0, 0, 0], 1.0, s).fraction == 1.0
    half = sphere_coverage(halfspace([0.0, 1.0, 0.0]), [0, 0, 0], 1.0, s)
    assert abs(half.fraction - 0.5) < 3 * half.std_error
    ann = sphere_coverage(AnnularSet(2, 0.2).oracle(), [math.sqrt(3), 0.0], 0.01, s)
    assert ann.fraction == 1.0
    assert half.measure(3) == pytest.approx(half.fraction * 4 * math.pi)


def test_coverage_of_set_and_complement_sum_to_one():
    o = periodic_cell(2, 0.7)
    s = SamplerConfig(8, 5000)
    a = sphere_coverage(o, [0.3, 0.1], 2.0, s, 5)
    b = sphere_coverage(complement(o), [0.3, 0.1], 2.0, s, 5)
    assert a.fraction + b.fraction == pytest.approx(1.0, abs=1e-12)


# -- integral identities ------------------------------------------------------------


def test_mean_identity_requires_bounded_oracle():
    with pytest.raises(UnboundedOracleError):
        mean_identity_check(everything(2), 0.5, BallRegion.at_origin(2, 2.0), SamplerConfig())


def test_mean_identity_rejects_small_region():
    with pytest.raises(ValueError):
        mean_identity_check(ball([0, 0], 1.0), 0.5, BallRegion.at_origin(2, 1.2), SamplerConfig())


def test_mean_identity_empty_set():
    chk = mean_identity_check(empty(2), 0.5, BallRegion.at_origin(2, 2.0), SamplerConfig(1, 2000))
    assert chk.lhs == 0.0 and chk.rhs == 0.0


def test_mean_identity_three_dimensions():
    chk = mean_identity_check(ball([0, 0, 0], 2.0), 0.1, BallRegion.at_origin(3, 2.1), SamplerConfig(3, 40_000), 64)
    exact = 4 * math.pi * 0.01 * (4 / 3) * math.pi * 8
    assert chk.rhs == pytest.approx(exact, rel=1e-12)
    assert abs(chk.lhs - exact) < 4 * chk.lhs_se
    assert abs(chk.lhs - exact) / exact < 0.01


def test_mean_identity_unit_disc_quick():
    chk = mean_identity_check(ball([0, 0], 1.0), 0.5, BallRegion.at_origin(2, 1.5), SamplerConfig(5, 20_000), 64)
    assert chk.rhs == pytest.approx(math.pi**2, rel=1e-12)
    assert abs(chk.lhs - chk.rhs) < 4 * chk.combined_se


def test_meansq_identity_empty_and_quick_disc():
    chk = meansq_identity_check(empty(2), 0.5, BallRegion.at_origin(2, 2.0), SamplerConfig(1, 1000), pair_samples=1000)
    assert chk.lhs == 0.0 and chk.rhs == 0.0
    chk = meansq_identity_check(ball([0, 0], 1.0), 0.5, BallRegion.at_origin(2, 1.5), SamplerConfig(5, 20_000), 64, 200_000)
    assert abs(chk.lhs - chk.rhs) < 4 * chk.combined_se


def test_pair_integral_vanishes_for_far_apart_balls():
    a, b = ball([0, 0], 0.5), ball([5, 0], 0.5)
    val, se = kernel_pair_integral(a, b, 1.0, SamplerConfig(0, 10_000))
    assert val == 0.0 and se == 0.0


def test_pair_integral_everything_in_ball_equals_area_times_overlap():
    # E = B_R with R much larger than 2r: integral of K over E x E ~ A^2 vol(E), minus a boundary layer
    val, se = kernel_pair_integral(ball([0, 0], 1.0), ball([0, 0], 1.0), 0.05, SamplerConfig(2, 400_000))
    assert 0.8 * (2 * math.pi * 0.05) ** 2 * math.pi < val < (2 * math.pi * 0.05) ** 2 * math.pi + 4 * se


# -- concentric scan ------------------------------------------------------------------


def test_concentric_scan_trivial():
    cands = np.array([[1.0, 2.0], [3.0, 4.0]])
    res = concentric_sphere_scan(everything(2), cands, [1.0, 5.0], 0.9, SamplerConfig())
    assert res.found and res.point == (1.0, 2.0)
    res = concentric_sphere_scan(empty(2), cands, [1.0], 0.5, SamplerConfig())
    assert not res.found and res.point is None and res.best_point is None


def test_concentric_scan_annular_fixture():
    s = AdmissibleScale(1600).r
    oracle = AnnularSet(2, 0.05).oracle()
    res = concentric_sphere_scan(oracle, BallRegion.at_origin(2, 50.0).grid(1.0), [s, 2 * s], 0.5, SamplerConfig(42, 2000))
    assert res.found
    assert res.point == (-50.0, 0.0)
    assert res.point in oracle
    assert min(res.coverages) > 0.9
