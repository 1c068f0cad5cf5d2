"""Ground-truth brute-force oracles and statistical test utilities.

Exact shortest-vector / closest-vector search and complete ball enumeration
by depth-first coefficient search pruned with Gram-Schmidt partial-norm
bounds. These are deliberately independent of the decoder pipeline so they
can certify it; dimension guards keep runtimes sane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    GsoData,
    LatticePoint,
    check_basis,
    gram_schmidt,
    integer_coefficients,
    lll_reduce,
    norm_sq_exact,
)

__all__ = [
    "DimensionGuardError",
    "BallEnumeration",
    "ExactCvp",
    "brute_force_svp",
    "brute_force_cvp",
    "ball_points",
    "tv_distance",
]

SVP_MAX_DIM = 10
BALL_MAX_DIM = 8

# Relative slack added to enumeration bounds so float pruning never drops a
# boundary point; final inclusion is re-checked exactly.
_SLACK = 1e-9


class DimensionGuardError(ValueError):
    """Brute-force oracle refused: dimension above the configured guard."""


@dataclass
class BallEnumeration:
    """All lattice points within ``radius`` of ``center``."""

    center: np.ndarray
    radius: float
    points: list = field(default_factory=list)     # LatticePoint, deterministic order
    coeff_bound: float = 0.0                       # box bound certified by the GSO

    def vectors(self) -> list:
        return [p.vector for p in self.points]


def _coeff_search(gso: GsoData, tau, radius_sq):
    """Yield integer coefficient vectors x with ||B x - center|| <= radius.

    ``tau`` holds the center's coordinates in the orthogonalized frame.
    Works back from the last level; at level i the admissible x_i form an
    interval certified by the remaining budget and ||b*_i||.
    """
    n = len(tau)
    mu = gso.mu
    norms = gso.norms_sq
    x = np.zeros(n, dtype=np.int64)
    # shift[i] = sum_{j>i} mu[j, i] * x_j, maintained incrementally per level
    shifts = np.zeros((n + 1, n))

    def rec(i, budget):
        if i < 0:
            yield x.copy()
            return
        center_i = tau[i] - shifts[i + 1, i]
        half = np.sqrt(max(budget, 0.0) / norms[i]) + _SLACK
        lo = int(np.ceil(center_i - half))
        hi = int(np.floor(center_i + half))
        for xi in range(lo, hi + 1):
            diff = xi - center_i
            used = diff * diff * norms[i]
            if used > budget * (1 + _SLACK) + _SLACK:
                continue
            x[i] = xi
            if i > 0:
                shifts[i, :i] = shifts[i + 1, :i] + xi * mu[i, :i]
            yield from rec(i - 1, budget - used)

    yield from rec(n - 1, radius_sq)


def _enumerate_ball(basis_float, gso, center, radius):
    """Coefficient vectors within ``radius`` of ``center`` (float pruning)."""
    bstar = gso.orthogonal
    tau = (center @ bstar) / gso.norms_sq
    inflated = (radius + _SLACK) ** 2 * (1 + _SLACK)
    return _coeff_search(gso, tau, inflated)


def ball_points(basis, center, radius, max_dim: int = BALL_MAX_DIM) -> BallEnumeration:
    """Complete, duplicate-free list of lattice points within a ball.

    Enumeration runs in an LLL-reduced copy of the basis; reported
    coefficients refer to the *input* basis. Points come back sorted by
    (squared norm of offset, coefficient vector) for determinism.
    """
    b = check_basis(basis)
    n = b.shape[0]
    if n > max_dim:
        raise DimensionGuardError(f"ball enumeration guarded at n <= {max_dim}")
    if not np.isfinite(radius) or radius < 0:
        raise ValueError("radius must be finite and nonnegative")
    center = np.asarray(center, dtype=float)
    red = lll_reduce(b)
    gso = gram_schmidt(red)
    redf = red.astype(float)

    seen = {}
    for coeffs in _enumerate_ball(redf, gso, center, radius):
        vec = red @ coeffs
        offset = vec - center
        dist_sq = float(offset @ offset)
        if dist_sq <= (radius + _SLACK) ** 2:
            key = tuple(int(v) for v in vec)
            if key not in seen:
                seen[key] = dist_sq
    pts = []
    for key, dist_sq in seen.items():
        vec = np.array(key, dtype=np.int64)
        orig = integer_coefficients(b, vec)
        pts.append((dist_sq, tuple(int(c) for c in orig), vec, orig))
    pts.sort(key=lambda item: (item[0], item[1]))
    points = [LatticePoint(vector=vec, coeffs=orig) for _, _, vec, orig in pts]
    coeff_bound = float(np.sqrt((radius + _SLACK) ** 2 / gso.norms_sq.min()))
    return BallEnumeration(center=center, radius=float(radius),
                           points=points, coeff_bound=coeff_bound)


def brute_force_svp(basis, max_dim: int = SVP_MAX_DIM) -> LatticePoint:
    """Exact shortest nonzero lattice vector.

    Enumerates within the norm of the shortest reduced basis column, then
    breaks ties by the lexicographically smallest coefficient vector with
    respect to the input basis. Squared norms are exact integers.
    """
    b = check_basis(basis)
    n = b.shape[0]
    if n > max_dim:
        raise DimensionGuardError(f"brute-force SVP guarded at n <= {max_dim}")
    red = lll_reduce(b)
    gso = gram_schmidt(red)
    start_norm_sq = min(norm_sq_exact(red[:, j]) for j in range(n))

    best_sq = start_norm_sq
    candidates = []
    tau = np.zeros(n)
    for coeffs in _coeff_search(gso, tau, float(best_sq) * (1 + _SLACK)):
        if not coeffs.any():
            continue
        vec = red @ coeffs
        nsq = norm_sq_exact(vec)
        if nsq < best_sq:
            best_sq = nsq
            candidates = [vec]
        elif nsq == best_sq:
            candidates.append(vec)
    ranked = sorted(
        (tuple(int(c) for c in integer_coefficients(b, vec)) for vec in candidates)
    )
    coeffs = np.array(ranked[0], dtype=np.int64)
    return LatticePoint(vector=b @ coeffs, coeffs=coeffs)


class ExactCvp:
    """Reusable exact closest-vector solver for one basis.

    LLL reduction and orthogonalization happen once at construction; each
    call enumerates with a shrinking best bound seeded by the Babai point.
    Ties go to the lexicographically smallest coefficient vector (input
    basis coordinates).
    """

    def __init__(self, basis, max_dim: int = SVP_MAX_DIM):
        self.basis = check_basis(basis)
        n = self.basis.shape[0]
        if n > max_dim:
            raise DimensionGuardError(f"brute-force CVP guarded at n <= {max_dim}")
        self.reduced = lll_reduce(self.basis)
        self.gso = gram_schmidt(self.reduced)
        self._redf = self.reduced.astype(float)

    def __call__(self, target) -> LatticePoint:
        t = np.asarray(target, dtype=float)
        babai_coeffs = np.floor(np.linalg.solve(self._redf, t) + 0.5)
        babai_vec = self._redf @ babai_coeffs
        best_sq = float((babai_vec - t) @ (babai_vec - t))

        bstar = self.gso.orthogonal
        tau = (t @ bstar) / self.gso.norms_sq
        best = [best_sq * (1 + _SLACK) + _SLACK, []]

        for coeffs in _coeff_search(self.gso, tau, best[0]):
            vec = self.reduced @ coeffs
            off = vec - t
            d = float(off @ off)
            if d < best[0] - 1e-12:
                best[0] = d
                best[1] = [vec]
            elif abs(d - best[0]) <= 1e-12:
                best[1].append(vec)
        ranked = sorted(
            (tuple(int(c) for c in integer_coefficients(self.basis, vec)), vec)
            for vec in best[1]
        )
        coeffs = np.array(ranked[0][0], dtype=np.int64)
        return LatticePoint(vector=self.basis @ coeffs, coeffs=coeffs)


def brute_force_cvp(basis, target, max_dim: int = SVP_MAX_DIM) -> LatticePoint:
    """Exact closest lattice vector to ``target`` (one-shot convenience)."""
    return ExactCvp(basis, max_dim=max_dim)(target)


def tv_distance(empirical, exact) -> float:
    """Total-variation distance between an empirical histogram and an exact
    distribution over a common discrete support.

    ``empirical`` maps outcome -> count (or probability); ``exact`` maps
    outcome -> probability. Counts are normalized by their total.
    """
    total = float(sum(empirical.values()))
    if total <= 0:
        raise ValueError("empirical histogram is empty")
    scale = 1.0 if abs(total - 1.0) < 1e-9 else total
    keys = set(empirical) | set(exact)
    return 0.5 * sum(
        abs(empirical.get(k, 0) / scale - exact.get(k, 0.0)) for k in keys
    )
