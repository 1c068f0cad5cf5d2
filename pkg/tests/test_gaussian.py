import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svpenum.gaussian import (
    EPSILON_RATE,
    TruncationError,
    WidthTooSmallError,
    epsilon_for_dim,
    reduced_dual,
    rho,
    sample_dual_set,
    sample_integer_gaussian,
    sample_lattice_gaussian,
    sample_lattice_gaussian_many,
    smoothing_parameter,
)
from svpenum.lattice import generate_basis, integer_coefficients, lll_reduce
from svpenum.oracles import brute_force_svp, tv_distance


def exact_gaussian_z2(s, box):
    """Exact restricted distribution of the width-s Gaussian on Z^2."""
    weights = {}
    for a in range(-box, box + 1):
        for b in range(-box, box + 1):
            weights[(a, b)] = math.exp(-math.pi * (a * a + b * b) / (s * s))
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


class TestRho:
    def test_at_origin(self):
        assert rho([0.0, 0.0, 0.0]) == 1.0
        assert rho(np.zeros(5), s=3.7) == 1.0

    def test_unit_vector(self):
        assert rho([1.0, 0.0]) == pytest.approx(math.exp(-math.pi), rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-5, 5), min_size=2, max_size=4),
        st.floats(0.1, 10),
    )
    def test_width_scaling_identity(self, x, s):
        x = np.array(x)
        assert rho(x, s) == pytest.approx(rho(x / s, 1.0), rel=1e-9, abs=1e-300)

    def test_strictly_below_one_off_lattice(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.uniform(0.05, 3.0, size=3)
            assert 0.0 < rho(x, s=1.5) < 1.0

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            rho([1.0], s=0.0)


class TestIntegerGaussian:
    def test_tiny_width_concentrates(self):
        rng = np.random.default_rng(1)
        draws = [sample_integer_gaussian(0.0, 0.05, rng) for _ in range(10_000)]
        freq0 = draws.count(0) / len(draws)
        # direct weight ratio: P(z != 0) < 2 exp(-pi (0.95/0.05)^2), utterly negligible
        assert freq0 > 0.9999

    def test_symmetry_about_half(self):
        rng = np.random.default_rng(2)
        n = 40_000
        draws = np.array([sample_integer_gaussian(0.5, 1.0, rng) for _ in range(n)])
        f0, f1 = (draws == 0).mean(), (draws == 1).mean()
        # each frequency is ~ Bernoulli(p); compare within 3 binomial sigmas
        sigma = math.sqrt(0.5 / n)
        assert abs(f0 - f1) <= 6 * sigma

    def test_mean_matches_center(self):
        rng = np.random.default_rng(3)
        n = 20_000
        draws = np.array([sample_integer_gaussian(3.0, 1.0, rng) for _ in range(n)])
        # truncated-series moments of the centered integer Gaussian at width 1
        ks = np.arange(-40, 41)
        w = np.exp(-math.pi * ks**2)
        var = float((w * ks**2).sum() / w.sum())
        assert abs(draws.mean() - 3.0) <= 3 * math.sqrt(var / n)


class TestLatticeSampler:
    def test_membership_is_exact(self):
        b = generate_basis("uniform", 3, bits=5, seed=4)
        red = lll_reduce(b)
        gso_floor = 1.2 * max(np.linalg.norm(red[:, j]) for j in range(3))
        pt = sample_lattice_gaussian(red, s=float(gso_floor) * 1.5, seed=9)
        assert np.array_equal(red @ pt.coeffs, pt.vector)
        integer_coefficients(red, pt.vector)  # does not raise

    def test_width_floor_enforced_with_minimum(self):
        with pytest.raises(WidthTooSmallError) as err:
            sample_lattice_gaussian_many(np.eye(2, dtype=int), 0.3, 10)
        assert err.value.minimum == pytest.approx(1.2)

    def test_z2_statistics(self):
        coeffs = sample_lattice_gaussian_many(np.eye(2, dtype=int), 2.0, 30_000, seed=5)
        hist = {}
        for a, b in coeffs:
            hist[(int(a), int(b))] = hist.get((int(a), int(b)), 0) + 1
        assert tv_distance(hist, exact_gaussian_z2(2.0, box=10)) <= 0.03

    def test_scaling_equivariance(self):
        # samples from 7 Z^2 at width 14, divided by 7, follow the width-2 law
        coeffs = sample_lattice_gaussian_many(7 * np.eye(2, dtype=int), 14.0, 30_000, seed=6)
        hist = {}
        for a, b in coeffs:
            hist[(int(a), int(b))] = hist.get((int(a), int(b)), 0) + 1
        assert tv_distance(hist, exact_gaussian_z2(2.0, box=10)) <= 0.03


class TestSmoothing:
    def test_z1_matches_series(self):
        # direct summation oracle: g(1) over Z \ {0}
        eps = 2.0 * sum(math.exp(-math.pi * k * k) for k in range(1, 60))
        assert eps == pytest.approx(0.0864348, abs=1e-6)
        q = smoothing_parameter(np.eye(1, dtype=int), eps)
        assert q.eta == pytest.approx(1.0, rel=1e-3)

    def test_scaling_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(3):
            c = int(rng.integers(2, 9))
            base = smoothing_parameter(np.eye(2, dtype=int), 0.05).eta
            scaled = smoothing_parameter(c * np.eye(2, dtype=int), 0.05).eta
            assert scaled == pytest.approx(c * base, rel=1e-3)

    def test_sandwich_invariant(self):
        b = generate_basis("uniform", 3, bits=4, seed=8)
        q = smoothing_parameter(b, 0.02)
        dual = reduced_dual(b)

        def dual_sum(s):
            # independent direct summation over a large dual coefficient box
            mat = dual.matrix
            rng_range = range(-8, 9)
            total = 0.0
            for i in rng_range:
                for j in rng_range:
                    for k in rng_range:
                        if i or j or k:
                            w = mat @ np.array([i, j, k])
                            total += math.exp(-math.pi * s * s * float(w @ w))
            return total

        assert dual_sum(q.eta) <= 0.02 * (1 + 1e-3)
        assert dual_sum(q.eta - q.tol) >= 0.02 * (1 - 1e-3)

    def test_monotone_in_epsilon(self):
        b = generate_basis("uniform", 2, bits=5, seed=9)
        etas = [smoothing_parameter(b, eps).eta for eps in (0.01, 0.05, 0.2, 0.5)]
        assert all(a >= b_ for a, b_ in zip(etas, etas[1:]))

    def test_dual_mode_matches_self_dual(self):
        a = smoothing_parameter(np.eye(2, dtype=int), 0.03, dual=False).eta
        b = smoothing_parameter(np.eye(2, dtype=int), 0.03, dual=True).eta
        assert a == pytest.approx(b, rel=1e-3)

    def test_first_minimum_lower_bound(self):
        # sqrt(log(1/eps)/pi) < lambda_1(L) * eta_eps(L*) on random 4-dim lattices
        for seed in range(4):
            b = generate_basis("uniform", 4, bits=6, seed=30 + seed)
            eps = epsilon_for_dim(4)
            eta_dual = smoothing_parameter(b, eps, dual=True).eta
            lam1 = brute_force_svp(b).norm
            assert lam1 * eta_dual > math.sqrt(math.log(1.0 / eps) / math.pi)

    def test_truncation_guard(self):
        with pytest.raises(TruncationError) as err:
            smoothing_parameter(np.eye(4, dtype=int), 0.9, max_points=10)
        assert err.value.suggested_radius is not None

    def test_first_minimum_sandwich_logged_not_asserted(self, capsys):
        # the upper side of the first-minimum sandwich is asymptotic; at
        # desk scale we only log violations (1.1 slack on the constant)
        rate = 2.0**0.802
        violations = []
        for seed in range(6):
            n = 2 + seed % 5
            b = generate_basis("uniform", n, bits=6, seed=70 + seed)
            eta_dual = smoothing_parameter(b, 0.5, dual=True).eta
            lam1 = brute_force_svp(b).norm
            upper = math.sqrt(rate * n / (2 * math.pi * math.e)) * 0.5 ** (-1.0 / n) * 1.1
            product = lam1 * eta_dual
            assert product > 0 and math.isfinite(product)
            if product >= upper:
                violations.append((n, seed, product, upper))
        if violations:
            print(f"upper sandwich exceeded on {len(violations)} instances: {violations}")

    def test_epsilon_domain(self):
        with pytest.raises(ValueError):
            smoothing_parameter(np.eye(2, dtype=int), 1.5)


class TestEpsilonSchedule:
    def test_half_at_rate_crossing(self):
        n_half = math.log(2.0) / EPSILON_RATE
        assert epsilon_for_dim(n_half) == pytest.approx(0.5, rel=1e-12)

    def test_value_at_ten(self):
        assert epsilon_for_dim(10) == pytest.approx(math.exp(-(2**0.802 / math.e) * 10), rel=1e-12)

    def test_strictly_monotone(self):
        values = [epsilon_for_dim(n) for n in range(1, 61)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_floor_clamp(self):
        assert epsilon_for_dim(1000) == 2.0**-60

    def test_domain(self):
        with pytest.raises(ValueError):
            epsilon_for_dim(0)


class TestDualSampleSet:
    def test_empty_forbidden(self):
        with pytest.raises(ValueError):
            sample_dual_set(np.eye(2, dtype=int), 2.0, 0)

    def test_seed_determinism(self):
        b = generate_basis("uniform", 3, bits=5, seed=10)
        rd = reduced_dual(b)
        s = max(rd.floor, 0.4)
        w1 = sample_dual_set(b, s, 64, seed=11, prepared=rd)
        w2 = sample_dual_set(b, s, 64, seed=11, prepared=rd)
        assert np.array_equal(w1.vectors, w2.vectors)
        assert np.array_equal(w1.coeffs, w2.coeffs)

    def test_membership_pairings(self):
        b = generate_basis("uniform", 4, bits=6, seed=12)
        rd = reduced_dual(b)
        ws = sample_dual_set(b, rd.floor * 1.3, 300, seed=13, prepared=rd)
        pairings = b.T.astype(float) @ ws.vectors.T
        assert np.abs(pairings - np.round(pairings)).max() < 1e-6
        assert np.abs(pairings - ws.coeffs.T).max() < 1e-6

    def test_self_dual_statistics(self):
        ws = sample_dual_set(np.eye(2, dtype=int), 2.0, 30_000, seed=14)
        hist = {}
        for row in ws.coeffs:
            key = (int(row[0]), int(row[1]))
            hist[key] = hist.get(key, 0) + 1
        assert tv_distance(hist, exact_gaussian_z2(2.0, box=10)) <= 0.03
