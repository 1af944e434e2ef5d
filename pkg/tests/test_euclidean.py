"""Tests for the Euclidean functionals and their couplings."""

import math
from itertools import permutations

import numpy as np
import pytest

from flucert.densities import standard_density
from flucert.errors import (
    DomainError,
    InternalConsistencyError,
    ShapeError,
    SizeError,
)
from flucert.euclidean import (
    FunctionalValue,
    PointSet,
    distance_matrix,
    matching_exact,
    matching_length,
    move_surgery_bound,
    nn_sum,
    rhee_conservative_affinity,
    rhee_coupling_sample,
    rhee_gap_statistics,
    rhee_mixture_affinity,
    scaling_coupling,
    tour_length,
    tsp_2opt,
    tsp_exact,
)
from flucert.rng import seed_stream

UNIT_SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


def random_points(n, seed, half_line=False):
    pts = seed_stream(seed).standard_normal((n, 2))
    if half_line:
        pts = np.abs(pts)
    return PointSet(2, pts)


def brute_force_tour(ps):
    dist = distance_matrix(ps)
    n = ps.n
    best = math.inf
    for perm in permutations(range(1, n)):
        order = (0,) + perm
        value = sum(dist[order[i], order[(i + 1) % n]] for i in range(n))
        best = min(best, value)
    return best


def brute_force_matching(ps):
    dist = distance_matrix(ps)

    def rec(idx):
        if not idx:
            return 0.0
        i = idx[0]
        best = math.inf
        for k in range(1, len(idx)):
            j = idx[k]
            rest = idx[1:k] + idx[k + 1 :]
            best = min(best, dist[i, j] + rec(rest))
        return best

    return rec(tuple(range(ps.n)))


class TestPointSet:
    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            PointSet(3, np.zeros((4, 2)))

    def test_finite_validation(self):
        with pytest.raises(DomainError):
            PointSet(2, [[0.0, np.inf]])

    def test_csv_roundtrip(self, tmp_path):
        ps = random_points(6, 11)
        path = tmp_path / "pts.csv"
        ps.to_csv(path)
        again = PointSet.from_csv(path)
        np.testing.assert_allclose(again.points, ps.points)


class TestTspExact:
    def test_right_triangle(self):
        ps = PointSet(2, [[0, 0], [1, 0], [0, 1]])
        res = tsp_exact(ps)
        assert res.value == pytest.approx(2 + math.sqrt(2), abs=1e-12)

    def test_unit_square(self):
        assert tsp_exact(PointSet(2, UNIT_SQUARE)).value == pytest.approx(4.0)

    def test_matches_brute_force(self):
        for seed in range(10):
            ps = random_points(7, 100 + seed)
            res = tsp_exact(ps)
            assert res.value == pytest.approx(brute_force_tour(ps), abs=1e-10)

    def test_witness_recomputes(self):
        ps = random_points(9, 3)
        res = tsp_exact(ps)
        assert tour_length(ps, res.witness) == pytest.approx(res.value, abs=1e-12)

    def test_size_caps(self):
        with pytest.raises(SizeError):
            tsp_exact(random_points(2, 0))
        with pytest.raises(SizeError):
            tsp_exact(random_points(16, 0))


class TestTsp2opt:
    def test_convex_position_recovers_hull(self):
        # regular octagon: 2-opt always lands on the hull perimeter
        angles = np.linspace(0, 2 * math.pi, 8, endpoint=False)
        ps = PointSet(2, np.c_[np.cos(angles), np.sin(angles)])
        res = tsp_2opt(ps, seed_stream(17), restarts=5)
        assert res.value == pytest.approx(tsp_exact(ps).value, abs=1e-12)

    def test_dominates_exact_and_often_matches(self):
        hits = 0
        for seed in range(100):
            ps = random_points(9, 500 + seed)
            exact = tsp_exact(ps).value
            local = tsp_2opt(ps, seed_stream(900 + seed), restarts=20).value
            assert local >= exact - 1e-9
            if local <= exact + 1e-9:
                hits += 1
        assert hits >= 90

    def test_doubling_scales_exactly(self):
        ps = random_points(12, 8)
        a = tsp_2opt(ps, seed_stream(44), restarts=10).value
        b = tsp_2opt(ps.scaled(2.0), seed_stream(44), restarts=10).value
        assert b == 2.0 * a

    def test_min_size(self):
        with pytest.raises(SizeError):
            tsp_2opt(random_points(3, 0), seed_stream(0))


class TestMatching:
    def test_two_points(self):
        ps = PointSet(2, [[0, 0], [3, 4]])
        assert matching_exact(ps).value == pytest.approx(5.0)

    def test_unit_square(self):
        assert matching_exact(PointSet(2, UNIT_SQUARE)).value == pytest.approx(2.0)

    def test_matches_enumeration(self):
        for seed in range(10):
            ps = random_points(8, 200 + seed)
            res = matching_exact(ps)
            assert res.value == pytest.approx(brute_force_matching(ps), abs=1e-10)
            assert matching_length(ps, res.witness) == pytest.approx(
                res.value, abs=1e-12
            )

    def test_odd_rejected(self):
        with pytest.raises(SizeError):
            matching_exact(random_points(7, 0))


class TestNnSum:
    def test_pair(self):
        ps = PointSet(2, [[0, 0], [0, 2]])
        assert nn_sum(ps).value == pytest.approx(4.0)

    def test_unit_square(self):
        assert nn_sum(PointSet(2, UNIT_SQUARE)).value == pytest.approx(4.0)

    def test_matches_quadratic_oracle(self):
        ps = random_points(10, 5)
        expected = 0.0
        for i in range(10):
            expected += min(
                np.linalg.norm(ps.points[i] - ps.points[j])
                for j in range(10)
                if j != i
            )
        assert nn_sum(ps).value == pytest.approx(expected, abs=1e-12)


class TestStructuralBounds:
    def test_tour_dominates_nn_sum(self):
        for seed in range(20):
            ps = random_points(9, 300 + seed)
            assert tsp_exact(ps).value >= nn_sum(ps).value - 1e-9

    def test_matching_dominates_half_nn_sum(self):
        for seed in range(20):
            ps = random_points(10, 400 + seed)
            assert matching_exact(ps).value >= 0.5 * nn_sum(ps).value - 1e-9


class TestHomogeneity:
    @pytest.mark.parametrize("kind", ["tsp-exact", "matching-exact", "nn-sum"])
    @pytest.mark.parametrize("lam", [0.5, 2.0, 3.7])
    def test_scaling_identity(self, kind, lam):
        from flucert.euclidean import evaluate_functional

        for seed in range(10):
            ps = random_points(8, 600 + seed)
            base = evaluate_functional(ps, kind).value
            scaled = evaluate_functional(ps.scaled(lam), kind).value
            assert scaled == pytest.approx(lam * base, rel=1e-9)


class TestScalingCoupling:
    def test_alpha_zero(self):
        f = standard_density("exponential-rate-1")
        ps = random_points(10, 21, half_line=True)
        base, rescaled, tv = scaling_coupling(ps, 0.0, 1, "nn-sum", f)
        assert rescaled.value == base.value
        assert tv == 0.0

    def test_exact_ratio(self):
        f = standard_density("exponential-rate-1")
        ps = random_points(10, 22, half_line=True)
        base, rescaled, tv = scaling_coupling(ps, 0.5, 1, "tsp-exact", f)
        assert base.value / rescaled.value == pytest.approx(
            1 + 0.5 / math.sqrt(10), rel=1e-12
        )
        assert 0.0 < tv < 1.0

    def test_nn_sum_agrees(self):
        f = standard_density("std-gaussian")
        ps = random_points(12, 23)
        base, rescaled, _ = scaling_coupling(ps, 0.3, 1, "nn-sum", f)
        assert rescaled.value == pytest.approx(
            base.value / (1 + 0.3 / math.sqrt(12)), rel=1e-12
        )

    def test_wrong_degree_detected(self):
        f = standard_density("std-gaussian")
        ps = random_points(8, 24)
        with pytest.raises(InternalConsistencyError):
            scaling_coupling(ps, 0.5, 2, "nn-sum", f)


class TestRheeCoupling:
    def test_beta_zero_identity(self):
        x, xp, rc = rhee_coupling_sample(12, 0.3, 0.0, seed_stream(31), probes=5000)
        np.testing.assert_array_equal(x.points, xp.points)
        assert rc.exact_affinity_per_coordinate == 1.0
        assert rc.resample_indices == ()

    def test_affinity_formula(self):
        rho = rhee_mixture_affinity(0.25, 0.04)
        expected = 0.75 * math.sqrt(0.96) + 0.25 * math.sqrt(0.96 + 0.16)
        assert rho == pytest.approx(expected, abs=1e-15)
        assert rho == pytest.approx(0.999422, abs=1e-6)

    def test_affinity_full_cover(self):
        assert rhee_mixture_affinity(1.0, 0.3) == 1.0

    def test_affinity_small_theta_expansion(self):
        # 1 - rho ~ theta^2 (1 - v) / (8 v), the quadratic mixture law
        for v in (0.2, 0.5, 0.8):
            theta = 1e-3
            rho = rhee_mixture_affinity(v, theta)
            assert 1 - rho == pytest.approx(
                theta**2 * (1 - v) / (8 * v), rel=1e-2
            )

    def test_affinity_monotone_in_volume(self):
        grid = np.linspace(0.05, 1.0, 40)
        vals = [rhee_mixture_affinity(v, 0.1) for v in grid]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_conservative_affinity_below_estimate(self):
        _, _, rc = rhee_coupling_sample(12, 0.3, 0.5, seed_stream(33), probes=5000)
        theta = 0.5 / math.sqrt(12)
        assert rhee_conservative_affinity(rc, theta) <= (
            rc.exact_affinity_per_coordinate
        )

    def test_shared_prefix_and_support(self):
        x, xp, rc = rhee_coupling_sample(14, 0.4, 0.9, seed_stream(35), probes=5000)
        m = rc.m
        np.testing.assert_array_equal(x.points[:m], xp.points[:m])
        assert np.all((xp.points >= 0) & (xp.points <= 1))
        kept = [i for i in range(m, 14) if i not in rc.resample_indices]
        np.testing.assert_array_equal(x.points[kept], xp.points[kept])
        # every resampled point lies inside the region D
        for i in rc.resample_indices:
            d = np.min(np.linalg.norm(x.points[:m] - xp.points[i], axis=1))
            assert d <= rc.ball_radius

    def test_marginal_resampling_rate(self):
        # total resample count is Binomial(trials * (n - m), theta)
        n, beta, trials = 8, 0.9, 10**4
        theta = beta / math.sqrt(n)
        total = 0
        for rep in range(trials):
            _, _, rc = rhee_coupling_sample(
                n, 0.4, beta, seed_stream(77, rep), probes=200
            )
            total += len(rc.resample_indices)
        draws = trials * (n - n // 2)
        sigma = math.sqrt(draws * theta * (1 - theta))
        assert abs(total - draws * theta) <= 4 * sigma

    def test_gap_and_surgery_bound(self):
        for rep in range(20):
            x, xp, rc = rhee_coupling_sample(
                12, 0.3, 0.9, seed_stream(41, rep), probes=2000
            )
            gap = rhee_gap_statistics(x, xp, "tsp-exact")
            base = tsp_exact(x)
            pts = x.points[list(base.witness)]
            max_edge = float(
                np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1).max()
            )
            bound = move_surgery_bound(x, xp, rc.resample_indices, max_edge)
            assert abs(gap) <= bound + 1e-9
