import itertools

import numpy as np
import pytest

from svpenum.lattice import generate_basis, lll_reduce, norm_sq_exact
from svpenum.oracles import (
    DimensionGuardError,
    ExactCvp,
    ball_points,
    brute_force_cvp,
    brute_force_svp,
    tv_distance,
)

PAIR = np.array([[100, 101], [1, 1]])


def box_enumeration(basis, center, radius, bound):
    """Independent oracle: filter a plain coefficient box."""
    n = basis.shape[0]
    hits = set()
    for coeffs in itertools.product(range(-bound, bound + 1), repeat=n):
        v = basis @ np.array(coeffs)
        if np.linalg.norm(v - center) <= radius + 1e-9:
            hits.add(tuple(int(x) for x in v))
    return hits


class TestSvp:
    def test_diag(self):
        assert brute_force_svp(7 * np.eye(3, dtype=int)).norm_sq == 49

    def test_skewed_pair(self):
        assert brute_force_svp(PAIR).norm_sq == 1

    def test_nothing_shorter_dim6(self):
        b = generate_basis("uniform", 6, bits=6, seed=21)
        best = brute_force_svp(b)
        ball = ball_points(b, np.zeros(6), best.norm * 1.000001)
        norms = [norm_sq_exact(p.vector) for p in ball.points if p.vector.any()]
        assert min(norms) == best.norm_sq

    def test_invariant_under_reduction(self):
        for seed in range(4):
            b = generate_basis("uniform", 5, bits=7, seed=seed)
            assert brute_force_svp(b).norm_sq == brute_force_svp(lll_reduce(b)).norm_sq

    def test_dimension_guard(self):
        with pytest.raises(DimensionGuardError):
            brute_force_svp(np.eye(11, dtype=int))

    def test_membership(self):
        b = generate_basis("uniform", 4, bits=7, seed=3)
        pt = brute_force_svp(b)
        assert np.array_equal(b @ pt.coeffs, pt.vector)


class TestCvp:
    def test_plain(self):
        assert np.array_equal(brute_force_cvp(np.eye(2, dtype=int), [0.2, 0.7]).vector, [0, 1])

    def test_lattice_point_is_fixed(self):
        b = generate_basis("uniform", 3, bits=6, seed=5)
        v = b @ np.array([2, -1, 3])
        assert np.array_equal(brute_force_cvp(b, v.astype(float)).vector, v)

    def test_beats_every_ball_point(self):
        rng = np.random.default_rng(2)
        for seed in range(8):
            n = 2 + seed % 4
            b = generate_basis("uniform", n, bits=5, seed=seed)
            t = b.astype(float) @ rng.uniform(-0.5, 0.5, size=n)
            got = brute_force_cvp(b, t)
            dist = np.linalg.norm(got.vector - t)
            ball = ball_points(b, t, dist + 0.1)
            assert all(np.linalg.norm(p.vector - t) >= dist - 1e-9 for p in ball.points)

    def test_shift_equivariance_exact(self):
        b = generate_basis("uniform", 3, bits=6, seed=9)
        solver = ExactCvp(b)
        rng = np.random.default_rng(4)
        for _ in range(20):
            t = b.astype(float) @ rng.uniform(-0.5, 0.5, size=3)
            x = b @ rng.integers(-4, 5, size=3)
            assert np.array_equal(solver(t + x).vector, solver(t).vector + x)

    def test_dimension_guard(self):
        with pytest.raises(DimensionGuardError):
            brute_force_cvp(np.eye(11, dtype=int), np.zeros(11))


class TestBallPoints:
    def test_unit_ball_z2(self):
        ball = ball_points(np.eye(2, dtype=int), [0, 0], 1.0)
        assert len(ball.points) == 5

    def test_radius_between_shells(self):
        # no point of norm in (1, 1.173]
        ball = ball_points(np.eye(2, dtype=int), [0, 0], 1.173)
        assert len(ball.points) == 5

    def test_below_first_minimum(self):
        ball = ball_points(7 * np.eye(2, dtype=int), [0, 0], 3.0)
        assert [tuple(p.vector) for p in ball.points] == [(0, 0)]

    def test_monotone_in_radius(self):
        b = generate_basis("uniform", 3, bits=5, seed=13)
        small = {tuple(p.vector) for p in ball_points(b, [0.3, -0.2, 0.1], 6.0).points}
        large = {tuple(p.vector) for p in ball_points(b, [0.3, -0.2, 0.1], 9.0).points}
        assert small <= large

    def test_matches_box_enumeration(self):
        b = generate_basis("uniform", 3, bits=4, seed=17)
        center = np.array([0.4, -1.2, 2.0])
        radius = 8.0
        got = {tuple(p.vector) for p in ball_points(b, center, radius).points}
        want = box_enumeration(b, center, radius, bound=8)
        assert got == want

    def test_duplicate_free(self):
        b = generate_basis("uniform", 3, bits=5, seed=19)
        ball = ball_points(b, np.zeros(3), 10.0)
        keys = [tuple(p.vector) for p in ball.points]
        assert len(keys) == len(set(keys))

    def test_dimension_guard(self):
        with pytest.raises(DimensionGuardError):
            ball_points(np.eye(9, dtype=int), np.zeros(9), 1.0)


class TestTvDistance:
    def test_identical(self):
        assert tv_distance({0: 0.5, 1: 0.5}, {0: 0.5, 1: 0.5}) == 0.0

    def test_disjoint(self):
        assert tv_distance({0: 1.0}, {1: 1.0}) == 1.0

    def test_fair_coin_sample(self):
        rng = np.random.default_rng(0)
        draws = rng.integers(0, 2, size=100_000)
        hist = {0: int((draws == 0).sum()), 1: int((draws == 1).sum())}
        assert tv_distance(hist, {0: 0.5, 1: 0.5}) <= 0.01
