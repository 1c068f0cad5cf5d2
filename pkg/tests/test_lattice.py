import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svpenum.lattice import (
    BasisParseError,
    LatticePoint,
    NotInLatticeError,
    RankDeficientError,
    babai_round,
    basis_fingerprint,
    check_basis,
    coset_reduce,
    det_exact,
    dual_basis,
    format_basis,
    generate_basis,
    gram_schmidt,
    integer_coefficients,
    is_unimodular,
    lll_reduce,
    norm_sq_exact,
    parse_basis,
    read_basis,
    write_basis,
)
from svpenum.oracles import brute_force_svp

PAIR = np.array([[100, 101], [1, 1]])  # columns (100,1) and (101,1); spans Z^2


def columns(*vecs):
    return np.array(vecs, dtype=np.int64).T


class TestGramSchmidt:
    def test_identity(self):
        gso = gram_schmidt(np.eye(2, dtype=int))
        assert np.allclose(gso.orthogonal, np.eye(2))
        assert np.allclose(gso.mu, np.eye(2))

    def test_single_projection(self):
        gso = gram_schmidt(columns([1, 0], [1, 1]))
        assert np.allclose(gso.orthogonal[:, 0], [1, 0])
        assert np.allclose(gso.orthogonal[:, 1], [0, 1])
        assert gso.mu[1, 0] == pytest.approx(1.0)

    def test_first_vector_unchanged(self):
        b = generate_basis("uniform", 4, bits=6, seed=3)
        gso = gram_schmidt(b)
        assert np.allclose(gso.orthogonal[:, 0], b[:, 0])

    def test_random_reconstruction(self):
        b = generate_basis("uniform", 5, bits=8, seed=7)
        gso = gram_schmidt(b)
        rebuilt = gso.orthogonal @ gso.mu.T
        scale = np.abs(b).max()
        assert np.abs(rebuilt - b).max() < 1e-9 * scale

    def test_singular_rejected(self):
        with pytest.raises(RankDeficientError):
            check_basis([[1, 2], [2, 4]])


class TestLll:
    def test_identity_fixed(self):
        assert np.array_equal(lll_reduce(np.eye(3, dtype=int)), np.eye(3))

    def test_skewed_pair_finds_unit(self):
        reduced = lll_reduce(PAIR)
        norms = sorted(norm_sq_exact(reduced[:, j]) for j in range(2))
        assert norms[0] == 1

    def test_delta_range(self):
        with pytest.raises(ValueError):
            lll_reduce(np.eye(2, dtype=int), delta=1.5)

    def test_lattice_preserved_exactly(self):
        for seed in range(5):
            b = generate_basis("uniform", 5, bits=8, seed=seed)
            reduced, u = lll_reduce(b, return_transform=True)
            assert np.array_equal(b @ u, reduced)
            assert abs(det_exact(u)) == 1
            assert is_unimodular(b, reduced)

    def test_short_vector_bound_dim6(self):
        b = generate_basis("uniform", 6, bits=7, seed=11)
        reduced = lll_reduce(b)
        lam1_sq = brute_force_svp(b).norm_sq
        best = min(norm_sq_exact(reduced[:, j]) for j in range(6))
        assert best <= (2.0 / np.sqrt(3.0)) ** 12 * lam1_sq


class TestDualBasis:
    def test_identity(self):
        assert np.allclose(dual_basis(np.eye(3, dtype=int)), np.eye(3))

    def test_scaled_identity(self):
        assert np.allclose(dual_basis(2 * np.eye(2, dtype=int)), 0.5 * np.eye(2))

    def test_pairing_reduced_random(self):
        b = lll_reduce(generate_basis("uniform", 4, bits=8, seed=2))
        d = dual_basis(b)
        assert np.abs(b.T @ d - np.eye(4)).max() < 1e-9

    def test_double_dual(self):
        b = generate_basis("uniform", 4, bits=6, seed=9)
        dd = np.linalg.inv(dual_basis(b).T)
        assert np.abs(dd - b).max() < 1e-6

    def test_ill_conditioned_warns(self):
        from svpenum.lattice import IllConditionedWarning

        skew = np.array([[1, 10_000_000], [0, 1]], dtype=np.int64)
        with pytest.warns(IllConditionedWarning, match="condition"):
            dual_basis(skew)


class TestCosetReduce:
    def test_plain(self):
        s, rep = coset_reduce([4, 5], np.eye(2, dtype=int), 3)
        assert np.array_equal(s, [1, 2])
        assert np.array_equal(rep.vector, [1, 2])

    def test_multiple_of_p(self):
        s, rep = coset_reduce([3, -6], np.eye(2, dtype=int), 3)
        assert np.array_equal(s, [0, 0])
        assert np.array_equal(rep.vector, [0, 0])

    def test_difference_divisible(self):
        b = generate_basis("uniform", 5, bits=6, seed=4)
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.integers(-9, 10, size=5)
            y = b @ x
            s, rep = coset_reduce(y, b, 3)
            left = integer_coefficients(b, y - rep.vector)
            assert np.all(left % 3 == 0)

    def test_rejects_non_lattice(self):
        with pytest.raises(NotInLatticeError):
            coset_reduce([1, 1], 2 * np.eye(2, dtype=int), 3)

    def test_partition(self):
        # same residue index iff difference lies in p*L
        b = generate_basis("uniform", 3, bits=5, seed=6)
        rng = np.random.default_rng(1)
        pts = [b @ rng.integers(-6, 7, size=3) for _ in range(15)]
        for y1 in pts:
            s1, _ = coset_reduce(y1, b, 3)
            for y2 in pts:
                s2, _ = coset_reduce(y2, b, 3)
                diff = integer_coefficients(b, y1 - y2)
                assert (np.array_equal(s1, s2)) == bool(np.all(diff % 3 == 0))


class TestBabai:
    def test_rounds_to_origin(self):
        assert np.array_equal(babai_round(np.eye(2, dtype=int), [0.4, -0.4]).vector, [0, 0])

    def test_rounds_up(self):
        assert np.array_equal(babai_round(np.eye(2, dtype=int), [0.6, 1.2]).vector, [1, 1])

    def test_half_goes_toward_plus_infinity(self):
        assert np.array_equal(babai_round(np.eye(2, dtype=int), [0.5, -0.5]).vector, [1, 0])

    def test_recovers_nearby_point(self):
        b = columns([2, 1], [0, 1])
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = rng.integers(-10, 11, size=2)
            v = b @ x
            frac = rng.uniform(-0.49, 0.49, size=2)
            t = v + b.astype(float) @ frac
            assert np.array_equal(babai_round(b, t).vector, v)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(-50, 50), min_size=3, max_size=3))
    def test_fixpoint_on_lattice_points(self, coeffs):
        b = generate_basis("uniform", 3, bits=6, seed=12)
        v = b @ np.array(coeffs)
        assert np.array_equal(babai_round(b, v.astype(float)).vector, v)


class TestGenerate:
    def test_scaled_identity(self):
        b = generate_basis("scaled-identity", 3, bits=7)
        assert np.array_equal(b, 7 * np.eye(3, dtype=int))
        assert brute_force_svp(b).norm_sq == 49

    def test_deterministic(self):
        a = generate_basis("uniform", 4, bits=8, seed=1)
        b = generate_basis("uniform", 4, bits=8, seed=1)
        assert np.array_equal(a, b)

    def test_knapsack_nonsingular(self):
        b = generate_basis("knapsack", 5, bits=10, seed=2)
        assert det_exact(b) == 2**10

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_basis("diagonalish", 3)


class TestIo:
    def test_text_round_trip(self, tmp_path):
        b = generate_basis("uniform", 4, bits=8, seed=5)
        path = tmp_path / "basis.txt"
        write_basis(path, b)
        assert np.array_equal(read_basis(path), b)

    def test_json_accepted(self):
        b = columns([1, 0], [1, 1])
        payload = {"n": 2, "basis": [[1, 0], [1, 1]]}
        assert np.array_equal(parse_basis(json.dumps(payload)), b)

    def test_parse_error_carries_line(self):
        with pytest.raises(BasisParseError) as err:
            parse_basis("2\n1 0\n1 nope\n")
        assert err.value.line == 3

    def test_missing_rows(self):
        with pytest.raises(BasisParseError):
            parse_basis("3\n1 0 0\n")

    def test_fingerprint_stable(self):
        b = generate_basis("uniform", 3, bits=6, seed=8)
        assert basis_fingerprint(b) == basis_fingerprint(b.copy())
        assert basis_fingerprint(b) != basis_fingerprint(b + np.eye(3, dtype=int))


def test_lattice_point_norm_exact():
    pt = LatticePoint(vector=[3, 4], coeffs=[3, 4])
    assert pt.norm_sq == 25
    assert pt.norm == 5.0


def test_format_round_trips_fingerprint():
    b = generate_basis("knapsack", 4, bits=9, seed=3)
    assert np.array_equal(parse_basis(format_basis(b)), b)
