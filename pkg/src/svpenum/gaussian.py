"""Discrete Gaussian machinery.

The Gaussian weight ``rho``, one-dimensional integer samplers, a
randomized-rounding lattice Gaussian sampler (sequential coordinate-wise
rounding against the Gram-Schmidt frame), numerical computation of the
smoothing parameter, and preprocessing sample sets over the dual lattice.

The lattice sampler is valid for width parameters ``s >= 1.2 * max_i
||b*_i||``; below that threshold it refuses to run. Every caller in this
package reduces the basis first, which keeps the threshold low.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticePoint,
    check_basis,
    det_exact,
    gram_schmidt,
    inv_exact,
    lll_reduce,
    _lll_cols,
)
from .oracles import _enumerate_ball

__all__ = [
    "WidthTooSmallError",
    "TruncationError",
    "DualSampleSet",
    "SmoothingQuery",
    "ReducedDual",
    "EPSILON_RATE",
    "rho",
    "sample_integer_gaussian",
    "sample_lattice_gaussian",
    "sample_lattice_gaussian_many",
    "reduced_dual",
    "sample_dual_set",
    "smoothing_parameter",
    "epsilon_for_dim",
    "as_rng",
]

# Per-dimension decay rate of the preprocessing accuracy schedule:
# epsilon(n) = exp(-EPSILON_RATE * n), floored at 2^-60 to keep the
# downstream numerics finite.
EPSILON_RATE = 2.0**0.802 / math.e
EPSILON_FLOOR = 2.0**-60

# 1-D samples are drawn from the window center +- TAIL_WIDTHS * s; the mass
# outside is < 2^-200 and is treated as zero.
TAIL_WIDTHS = 12.0

# Width floor of the randomized-rounding sampler, as a multiple of the
# largest Gram-Schmidt norm of the sampling basis.
SAMPLER_FLOOR = 1.2


class WidthTooSmallError(ValueError):
    """Requested Gaussian width below the sampler's validity threshold."""

    def __init__(self, s, minimum):
        super().__init__(
            f"width {s:.6g} below the sampler validity threshold; need s >= {minimum:.6g}"
        )
        self.minimum = minimum


class TruncationError(RuntimeError):
    """Smoothing computation could not certify its truncation radius."""

    def __init__(self, message, suggested_radius=None):
        super().__init__(message)
        self.suggested_radius = suggested_radius


def as_rng(seed) -> np.random.Generator:
    """Accept either a seed or a ready ``numpy.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def rho(x, s: float = 1.0):
    """Gaussian weight ``exp(-pi * ||x||^2 / s^2)``.

    ``x`` may be a single vector or an array of row vectors; the norm is
    taken over the last axis.
    """
    if not (s > 0 and math.isfinite(s)):
        raise ValueError("width parameter s must be positive and finite")
    arr = np.asarray(x, dtype=float)
    nsq = np.sum(arr * arr, axis=-1)
    return np.exp(-np.pi * nsq / (s * s))


def _dg1d_batch(centers, sigma, rng):
    """Batched 1-D discrete Gaussian: one integer per center, width sigma.

    Inverse-CDF draw over the truncated window; identical in distribution to
    rejection over the same window.
    """
    if sigma <= 0 or not math.isfinite(sigma):
        raise ValueError("sigma must be positive and finite")
    halfwidth = TAIL_WIDTHS * sigma
    k = int(math.ceil(halfwidth)) + 1
    if 2 * k + 1 > 500_000:
        raise ValueError(f"1-D window too large (sigma={sigma:.3g})")
    centers = np.asarray(centers, dtype=float)
    base = np.floor(centers + 0.5).astype(np.int64)
    support = base[:, None] + np.arange(-k, k + 1)[None, :]
    diff = support - centers[:, None]
    weights = np.exp(-np.pi * (diff * diff) / (sigma * sigma))
    weights[np.abs(diff) > halfwidth] = 0.0
    totals = weights.sum(axis=1)
    # tiny sigma can empty the window; the nearest integer then carries all mass
    empty = totals <= 0.0
    if np.any(empty):
        weights[empty, k] = 1.0
        totals = weights.sum(axis=1)
    thresholds = rng.random(len(centers)) * totals
    idx = (np.cumsum(weights, axis=1) < thresholds[:, None]).sum(axis=1)
    idx = np.minimum(idx, 2 * k)
    return support[np.arange(len(centers)), idx]


def sample_integer_gaussian(center: float, s: float, seed=0) -> int:
    """One integer with probability proportional to ``rho_s(z - center)``."""
    rng = as_rng(seed)
    return int(_dg1d_batch(np.array([center]), s, rng)[0])


def _klein_coeffs(basis_float, gso, s, rng, size):
    """Coefficient vectors of ``size`` lattice Gaussian samples.

    Sequential randomized rounding: walk the Gram-Schmidt levels from last
    to first, drawing each coordinate from a 1-D discrete Gaussian centered
    at the projection of what has been fixed so far.
    """
    floor = SAMPLER_FLOOR * gso.max_norm
    if s < floor:
        raise WidthTooSmallError(s, floor)
    n = basis_float.shape[0]
    coeffs = np.zeros((size, n), dtype=np.int64)
    partial = np.zeros((size, n))
    for i in reversed(range(n)):
        bstar = gso.orthogonal[:, i]
        centers = -(partial @ bstar) / gso.norms_sq[i]
        sigma = s / math.sqrt(gso.norms_sq[i])
        z = _dg1d_batch(centers, sigma, rng)
        coeffs[:, i] = z
        partial += z[:, None] * basis_float[:, i][None, :]
    return coeffs


def sample_lattice_gaussian_many(basis, s: float, n_samples: int, seed=0) -> np.ndarray:
    """Coefficient matrix (n_samples, n) of lattice Gaussian draws."""
    b = check_basis(basis)
    gso = gram_schmidt(b)
    rng = as_rng(seed)
    return _klein_coeffs(b.astype(float), gso, float(s), rng, int(n_samples))


def sample_lattice_gaussian(basis, s: float, seed=0) -> LatticePoint:
    """One lattice vector distributed close to the width-``s`` discrete
    Gaussian over the lattice (valid above the sampler width floor)."""
    b = check_basis(basis)
    coeffs = sample_lattice_gaussian_many(b, s, 1, seed)[0]
    return LatticePoint(vector=b @ coeffs, coeffs=coeffs)


@dataclass(frozen=True)
class ReducedDual:
    """Reduced dual-lattice data prepared for sampling.

    ``matrix`` holds a reduced basis of the dual lattice (columns, float);
    ``coeff_map @ z`` converts its coefficient vectors to coefficients with
    respect to the canonical dual basis ``(B^T)^{-1}`` (equivalently, to the
    pairings ``B^T w``). ``floor`` is the sampler validity threshold.
    """

    matrix: np.ndarray
    coeff_map: np.ndarray
    gso: object
    floor: float
    det: int


def reduced_dual(basis) -> ReducedDual:
    """Reduce the dual lattice for sampling.

    Scales the dual by ``det`` to make it integral, LLL-reduces it exactly,
    and returns the float realization of the result.
    """
    b = check_basis(basis)
    n = b.shape[0]
    d = det_exact(b)
    inv_t = inv_exact(b.T)
    adj = [[int(inv_t[r][c] * d) for r in range(n)] for c in range(n)]  # columns
    red_cols, trans = _lll_cols(adj, 0.99)
    matf = np.array(
        [[num / d for num in col] for col in red_cols], dtype=float
    ).T
    coeff_map = np.array(trans, dtype=np.int64).T
    gso = gram_schmidt(matf)
    floor = SAMPLER_FLOOR * gso.max_norm
    return ReducedDual(matrix=matf, coeff_map=coeff_map, gso=gso, floor=floor, det=d)


@dataclass(frozen=True)
class DualSampleSet:
    """Preprocessed i.i.d. Gaussian samples over the dual lattice.

    ``vectors`` are the dual-lattice points (rows, float realization);
    ``coeffs`` are their exact integer coefficients in the canonical dual
    basis, i.e. ``coeffs[i] == B^T vectors[i]`` up to float rounding.
    """

    vectors: np.ndarray
    coeffs: np.ndarray
    s: float
    basis: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=float).copy()
        vec.flags.writeable = False
        object.__setattr__(self, "vectors", vec)
        cf = np.asarray(self.coeffs, dtype=np.int64).copy()
        cf.flags.writeable = False
        object.__setattr__(self, "coeffs", cf)

    @property
    def n_samples(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]


def sample_dual_set(basis, s: float, n_samples: int, seed=0,
                    prepared: ReducedDual | None = None) -> DualSampleSet:
    """Draw ``n_samples`` i.i.d. Gaussian samples from the dual lattice."""
    if n_samples < 1:
        raise ValueError("empty advice is forbidden: n_samples must be >= 1")
    b = check_basis(basis)
    rd = prepared if prepared is not None else reduced_dual(b)
    rng = as_rng(seed)
    z = _klein_coeffs(rd.matrix, rd.gso, float(s), rng, int(n_samples))
    vectors = z @ rd.matrix.T
    coeffs = z @ rd.coeff_map.T
    return DualSampleSet(vectors=vectors, coeffs=coeffs, s=float(s), basis=b)


@dataclass(frozen=True)
class SmoothingQuery:
    """Result of a numerical smoothing-parameter computation.

    ``eta`` satisfies ``sum_{w != 0} rho_{1/eta}(w) <= epsilon`` over the
    relevant dual, with the sum truncated at ``radius`` (certified so the
    omitted tail is below ``epsilon * 1e-6``); ``tol`` is the bracket width
    of the search.
    """

    epsilon: float
    eta: float
    radius: float
    tol: float
    n_points: int


def _gaussian_sum(norms_sq, s):
    return float(np.exp(-math.pi * s * s * norms_sq).sum())


def smoothing_parameter(basis, epsilon: float, dual: bool = False,
                        rel_tol: float = 1e-4,
                        max_points: int = 2_000_000) -> SmoothingQuery:
    """Numerically invert the dual Gaussian sum.

    For ``dual=False`` computes the smoothing parameter of the lattice
    spanned by ``basis`` (the sum runs over its dual); for ``dual=True``
    computes the smoothing parameter of the *dual* lattice (the sum then
    runs over the primal points, which is exact and cheap for integer
    bases).

    Binary-searches the width until the truncated sum matches ``epsilon``
    to relative ``rel_tol``; the truncation radius grows until the
    outermost shell contributes less than a 1e-6 fraction of ``epsilon``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    b = check_basis(basis)
    if dual:
        summed = lll_reduce(b).astype(float)
    else:
        summed = reduced_dual(b).matrix
    gso = gram_schmidt(summed)

    col_norms = np.sqrt((summed * summed).sum(axis=0))
    radius = float(col_norms.min()) * 1.000001
    grow = 1.35

    while True:
        norms_sq = []
        for coeffs in _enumerate_ball(summed, gso, np.zeros(b.shape[0]), radius):
            if not coeffs.any():
                continue
            v = summed @ coeffs
            norms_sq.append(float(v @ v))
            if len(norms_sq) > max_points:
                raise TruncationError(
                    f"more than {max_points} dual points within radius {radius:.4g}",
                    suggested_radius=radius,
                )
        norms_sq = np.array(norms_sq)
        if norms_sq.size == 0:
            radius *= grow
            continue
        r1 = math.sqrt(float(norms_sq.min()))

        s_guess = math.sqrt(math.log(max(2.0, 1.0 / epsilon)) / math.pi) / r1
        s_lo = s_hi = s_guess
        for _ in range(200):
            if _gaussian_sum(norms_sq, s_lo) >= epsilon:
                break
            s_lo /= 1.3
        else:
            raise TruncationError("could not bracket the smoothing parameter from below")
        for _ in range(200):
            if _gaussian_sum(norms_sq, s_hi) <= epsilon:
                break
            s_hi *= 1.3
        else:
            raise TruncationError("could not bracket the smoothing parameter from above")

        shell = norms_sq > (radius / grow) ** 2
        shell_mass = float(np.exp(-math.pi * s_lo * s_lo * norms_sq[shell]).sum())
        # even an empty shell is no certificate: bound the first omitted
        # points by their weight at the current radius times a generous
        # multiplicity allowance
        omitted = math.exp(-math.pi * s_lo * s_lo * radius * radius)
        omitted *= 10.0 * (norms_sq.size + 10)
        if max(shell_mass, omitted) <= 0.3e-6 * epsilon:
            break
        radius *= grow

    for _ in range(200):
        if s_hi - s_lo <= rel_tol * s_hi:
            break
        mid = 0.5 * (s_lo + s_hi)
        if _gaussian_sum(norms_sq, mid) > epsilon:
            s_lo = mid
        else:
            s_hi = mid
    return SmoothingQuery(epsilon=float(epsilon), eta=float(s_hi),
                          radius=float(radius), tol=float(s_hi - s_lo),
                          n_points=int(norms_sq.size))


def epsilon_for_dim(n) -> float:
    """Preprocessing accuracy schedule ``exp(-EPSILON_RATE * n)``.

    Clamped below at 2^-60 so desk-scale numerics stay finite.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return max(math.exp(-EPSILON_RATE * float(n)), EPSILON_FLOOR)
