import json
import math

import numpy as np
import pytest
from scipy import stats

from copieslab.constructions import AnnularSet
from copieslab.errors import DegeneratePatternError, PointNotInSetError
from copieslab.patterns import (
    Pattern,
    Placement,
    SearchConfig,
    equilateral_triangle,
    find_similar_copy,
    find_translated_copy,
    pattern_stats,
    progression,
    random_rotation,
    random_rotations,
    rho_min_bounds,
    rotation_success_measure,
)
from copieslab.sets import BallRegion, SetOracle, ball, empty, everything, halfspace, periodic_cell


def test_pattern_stats_examples():
    assert pattern_stats(Pattern([[0, 0], [1, 0], [3, 0]])) == (1.0, 3.0)
    sep, diam = pattern_stats(Pattern([[0, 0], [1, 0], [0, 1], [1, 1]]))
    assert sep == 1.0 and diam == pytest.approx(math.sqrt(2))
    with pytest.raises(DegeneratePatternError):
        Pattern([[0, 0], [0, 0]])
    with pytest.raises(DegeneratePatternError):
        Pattern([[0, 0]])


@pytest.mark.parametrize("r", [0.5, 2.0, 10.0])
def test_pattern_stats_scale_exactly(r):
    # integer points at integer distances keep every step exact
    P = Pattern([[0.0, 0.0], [3.0, 4.0], [6.0, 8.0], [-5.0, 12.0]])
    sep, diam = pattern_stats(P)
    assert pattern_stats(Pattern(r * P.points)) == (r * sep, r * diam)
    Q = Pattern(np.random.default_rng(0).random((6, 3)))
    sep, diam = pattern_stats(Q)
    got = pattern_stats(Pattern(r * Q.points))
    assert got == pytest.approx((r * sep, r * diam), rel=4e-16)


def test_pattern_json_roundtrip(tmp_path):
    P = equilateral_triangle()
    path = tmp_path / "p.json"
    path.write_text(json.dumps(P.to_json()))
    Q = Pattern.load(path)
    assert np.array_equal(P.points, Q.points)
    with pytest.raises(ValueError):
        Pattern.from_json({"dimension": 3, "points": [[0, 0], [1, 0]]})


def test_points_are_read_only():
    P = progression(3)
    with pytest.raises(ValueError):
        P.points[0, 0] = 5.0


@pytest.mark.parametrize("d", [2, 3, 5])
def test_random_rotation_is_special_orthogonal(d):
    Q = random_rotation(d, 7)
    assert np.allclose(Q.T @ Q, np.eye(d), atol=1e-12)
    assert np.linalg.det(Q) == pytest.approx(1.0)
    Qs = random_rotations(d, 200, 3)
    assert np.allclose(np.linalg.det(Qs), 1.0)
    Placement(1.0, Q, np.zeros(d))


def test_random_rotation_deterministic():
    assert np.array_equal(random_rotation(3, 11), random_rotation(3, 11))
    assert not np.array_equal(random_rotation(3, 11), random_rotation(3, 12))


def test_planar_rotation_angle_uniform():
    Qs = random_rotations(2, 10_000, 5)
    angle = np.mod(np.arctan2(Qs[:, 1, 0], Qs[:, 0, 0]), 2 * np.pi)
    assert stats.kstest(angle, "uniform", args=(0, 2 * np.pi)).pvalue > 0.01


def test_haar_first_column_uniform_on_sphere():
    # the image of e1 under a Haar rotation of R^3 is uniform on S^2
    Qs = random_rotations(3, 10_000, 9)
    assert stats.kstest(Qs[:, 2, 0], "uniform", args=(-1, 2)).pvalue > 0.01


def test_placement_validation_and_json():
    with pytest.raises(ValueError):
        Placement(1.0, np.diag([1.0, -1.0]), np.zeros(2))
    with pytest.raises(ValueError):
        Placement(1.0, 2 * np.eye(2), np.zeros(2))
    pl = Placement(2.0, np.eye(2), np.array([1.0, 1.0]))
    assert pl.to_json() == {"scale": 2.0, "rotation": [[1.0, 0.0], [0.0, 1.0]], "translation": [1.0, 1.0]}
    assert np.array_equal(pl.apply([[1.0, 0.0]]), [[3.0, 1.0]])


def test_rotation_measure_everything():
    rm = rotation_success_measure(everything(2), [0, 0], equilateral_triangle(), 1000, 1)
    assert rm.estimate == 1.0 and rm.lower_bound == 1.0


def test_rotation_measure_hemisphere():
    P = Pattern([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    rm = rotation_success_measure(halfspace([0.0, 0.0, 1.0]), [0, 0, 0], P, 20_000, 3)
    assert abs(rm.estimate - 0.5) < 3 * rm.std_error
    assert abs(rm.lower_bound - 0.5) < 3 * rm.lower_bound_se


def test_rotation_measure_annular_lower_bound():
    oracle = AnnularSet(2, 0.05).oracle()
    x0 = np.array([3.0, 0.0])
    P = Pattern(x0 + 40 * equilateral_triangle().points)
    rm = rotation_success_measure(oracle, x0, P, 20_000, 4)
    assert min(rm.coverages) > 0.5
    assert rm.estimate >= rm.lower_bound - 3 * (rm.std_error + rm.lower_bound_se)


def test_rotation_measure_reseeding():
    oracle = AnnularSet(2, 0.3).oracle()
    x0 = np.array([0.3, 0.2])
    P = Pattern(x0 + np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 7.0]]))
    a = rotation_success_measure(oracle, x0, P, 20_000, 1)
    b = rotation_success_measure(oracle, x0, P, 20_000, 2)
    assert 0.05 < a.estimate < 0.95
    assert abs(a.estimate - b.estimate) < 3 * math.hypot(a.std_error, b.std_error)


def test_rotation_measure_requires_x0_in_set():
    with pytest.raises(PointNotInSetError):
        rotation_success_measure(empty(2), [0, 0], equilateral_triangle(), 10, 0)


def test_translated_copy_examples():
    cfg = SearchConfig(seed=1)
    P = Pattern([[0.0, 0.0], [1.0, 0.0]])
    z = find_translated_copy(ball([0, 0], 10.0), P, 1.0, cfg)
    assert z is not None
    assert np.linalg.norm(z) <= 10 and np.linalg.norm(z + [1.0, 0.0]) <= 10
    assert find_translated_copy(empty(2), P, 1.0, cfg) is None
    oracle = periodic_cell(2, 0.9)
    z = find_translated_copy(oracle, progression(3), 5.0, cfg)
    assert z is not None and oracle.contains(z + 5.0 * progression(3).points).all()


def test_similar_copy_everything_uses_identity():
    pl = find_similar_copy(everything(3), progression(4, dim=3), 7.0, SearchConfig())
    assert np.array_equal(pl.rotation, np.eye(3))


def test_similar_copy_halfspace():
    oracle = halfspace([1.0, 1.0])
    P = Pattern([[0.0, 0.0], [0.0, 1.0]])
    config = SearchConfig(candidate_region=BallRegion((30.0, 30.0), 10.0))
    pl = find_similar_copy(oracle, P, 50.0, config)
    assert pl is not None and oracle.contains(pl.apply(P.points)).all()


def test_similar_copy_needs_a_rotation():
    # a thin horizontal strip: the vertical pair only fits after rotating
    strip = SetOracle(2, lambda p: np.abs(p[:, 1]) < 0.2)
    P = Pattern([[0.0, 0.0], [0.0, 1.0]])
    config = SearchConfig(candidate_region=BallRegion((0.0, 0.0), 1.0), translation_grid_step=0.25)
    pl = find_similar_copy(strip, P, 3.0, config)
    assert pl is not None
    assert not np.array_equal(pl.rotation, np.eye(2))
    assert strip.contains(pl.apply(P.points)).all()


def test_similar_copy_annular_r40():
    oracle = AnnularSet(2, 0.05).oracle()
    pl = find_similar_copy(oracle, equilateral_triangle(), 40.0, SearchConfig())
    assert pl is not None and pl.scale == 40.0
    assert oracle.contains(pl.apply(equilateral_triangle().points)).all()


def test_lying_oracle_witnesses_are_rejected():
    # large batches claim membership, small (verification-sized) queries are honest
    liar = SetOracle(2, lambda p: np.full(len(p), len(p) > 3))
    cfg = SearchConfig(rotation_samples=64, max_centers=20, coverage_samples=100, density_samples=100)
    assert find_similar_copy(liar, equilateral_triangle(), 5.0, cfg) is None
    assert find_translated_copy(liar, progression(3), 5.0, cfg) is None


def test_rho_min_bounds_examples():
    assert rho_min_bounds(2) == (0.0, 0.0)
    lo, hi = rho_min_bounds(10**15)
    assert lo == pytest.approx(1 - 345.388 / 1000, abs=1e-5) and hi == pytest.approx(1 - 1e-15, abs=1e-16)
    lo, hi = rho_min_bounds(10**5)
    assert lo == 0.0 and hi == pytest.approx(0.99999, abs=1e-9)
    with pytest.raises(ValueError):
        rho_min_bounds(1)


def test_rho_min_bounds_monotone_and_ordered():
    ns = np.unique(np.logspace(math.log10(3e12), 18, 200).astype(np.int64))
    lows = [rho_min_bounds(int(n))[0] for n in ns]
    assert all(b >= a for a, b in zip(lows, lows[1:]))
    rng = np.random.default_rng(0)
    for n in list(range(2, 200)) + list(rng.integers(2, 10**6, 500)):
        lo, hi = rho_min_bounds(int(n))
        assert lo <= hi
