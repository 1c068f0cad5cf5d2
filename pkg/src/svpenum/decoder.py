"""Bounded-distance decoding from preprocessed dual Gaussian samples.

The decoder approximates the lattice's periodic Gaussian function by the
cosine sum over a preprocessed set of dual-lattice Gaussian samples, climbs
it with a fixed number of gradient-ascent steps, and finishes with a
coordinatewise Babai rounding. Preprocessing (reduction, smoothing-parameter
search, dual sampling) happens once per lattice; queries share the advice
read-only, so any number of workers may decode concurrently.

Normalization note: samples are drawn at width ``s``, so the natural frame
for the ascent is the one where that width is 1 (coordinates scaled by
``s``). The ascent step below is exactly the textbook
``t + grad f / (2 pi f)`` update in that frame, which in unscaled
coordinates picks up a ``1/s^2``. Applying the unscaled update verbatim
diverges whenever ``s > sqrt(2)``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .gaussian import (
    DualSampleSet,
    as_rng,
    epsilon_for_dim,
    reduced_dual,
    sample_dual_set,
    smoothing_parameter,
)
from .lattice import (
    LatticePoint,
    check_basis,
    dual_basis,
    lll_reduce,
    round_half_up,
)

__all__ = [
    "DecodeFailure",
    "BddConfig",
    "BddpAdvice",
    "DECODING_ALPHA",
    "periodic_gaussian",
    "periodic_gaussian_gradient",
    "ascent_step",
    "bddp_preprocess",
    "bddp_query",
    "bddp_query_batch",
    "scale_advice",
    "BddpDecoder",
]

# Decoding-radius fraction of the first minimum that the decoder is sized
# for; used when generating test targets, never consulted by the solver.
DECODING_ALPHA = 0.391

# |f_W| below this is treated as "no signal": the target is too far from the
# lattice for the advice quality and the ascent step would blow up.
_SIGNAL_FLOOR = 1e-12

_TWO_PI = 2.0 * math.pi


class DecodeFailure(ArithmeticError):
    """Gradient ascent diverged: target too far from the lattice for the
    advice quality. Distinct from a wrong (but well-formed) answer."""


@dataclass(frozen=True)
class BddConfig:
    """Decoder knobs.

    ``n_samples``/``epsilon`` default per dimension at preprocessing time
    (``max(1000, 200 n)`` and the standard accuracy schedule). The
    ``ascent_*`` helpers expose the contraction-analysis diagnostics for a
    given accuracy; they describe the asymptotic regime and are not used by
    the solver.
    """

    n_samples: int | None = None
    ascent_iters: int = 2
    epsilon: float | None = None
    alpha_target: float = DECODING_ALPHA

    def __post_init__(self):
        if self.n_samples is not None and self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.ascent_iters < 1:
            raise ValueError("ascent_iters must be >= 1")
        if not 0.0 < self.alpha_target < 0.5:
            raise ValueError("alpha_target must lie in (0, 0.5)")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    def resolved_epsilon(self, n: int) -> float:
        return self.epsilon if self.epsilon is not None else epsilon_for_dim(n)

    def resolved_n_samples(self, n: int) -> int:
        return self.n_samples if self.n_samples is not None else max(1000, 200 * n)

    @staticmethod
    def ascent_sigma(epsilon: float) -> float:
        """Width of the normalized periodic-Gaussian signal."""
        return math.sqrt(math.log(2.0 * (1.0 + epsilon) / epsilon) / math.pi)

    @classmethod
    def ascent_radius_fraction(cls, epsilon: float) -> float:
        """Contraction-region radius as a fraction of the signal width."""
        s = cls.ascent_sigma(epsilon)
        return 0.5 - 2.0 / (math.pi * s * s)

    @classmethod
    def contraction_exponent(cls, t_norm: float, epsilon: float) -> float:
        """max(1/8, ||t|| / signal width): drives the per-step shrink rate."""
        return max(0.125, t_norm / cls.ascent_sigma(epsilon))


def _vectors(samples) -> np.ndarray:
    if isinstance(samples, DualSampleSet):
        return samples.vectors
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("sample set must be a nonempty (N, n) array")
    return arr


def periodic_gaussian(samples, t) -> float:
    """Cosine-sum estimate of the lattice's periodic Gaussian at ``t``.

    Always in [-1, 1]; equals 1 on lattice points (dual pairings there are
    integers).
    """
    w = _vectors(samples)
    t = np.asarray(t, dtype=float)
    return float(np.cos(_TWO_PI * (w @ t)).mean())


def periodic_gaussian_gradient(samples, t) -> np.ndarray:
    """Gradient of the cosine sum: ``-(2 pi / N) sum_i sin(2 pi <w_i, t>) w_i``."""
    w = _vectors(samples)
    t = np.asarray(t, dtype=float)
    phases = np.sin(_TWO_PI * (w @ t))
    return -(_TWO_PI / w.shape[0]) * (phases @ w)


def ascent_step(samples, t, scale: float = 1.0) -> np.ndarray:
    """One gradient-ascent step toward the nearest lattice point.

    ``scale`` is the width the samples were drawn at; the step is taken in
    the frame where that width is 1 (see module note). Raises
    ``DecodeFailure`` when the signal magnitude is below 1e-12.
    """
    w = _vectors(samples)
    t = np.asarray(t, dtype=float)
    value = periodic_gaussian(w, t)
    if abs(value) < _SIGNAL_FLOOR:
        raise DecodeFailure(
            f"periodic Gaussian vanished at the target (|f|={abs(value):.2e}); "
            "target too far from the lattice for this advice"
        )
    grad = periodic_gaussian_gradient(w, t)
    return t + grad / (_TWO_PI * value * scale * scale)


@dataclass
class BddpAdvice:
    """Preprocessed decoding advice for one lattice.

    Immutable after construction and safe to share across concurrent query
    workers. ``basis`` is the internally reduced basis actually used for
    decoding; ``basis_input`` is what the caller handed in, with
    ``basis == basis_input @ to_reduced``.
    """

    samples: DualSampleSet
    basis: np.ndarray
    basis_input: np.ndarray
    to_reduced: np.ndarray
    dual: np.ndarray
    s: float
    epsilon: float
    eta: float
    config: BddConfig
    seed: int | None = None
    timings_ms: dict = field(default_factory=dict)
    _inv_basis: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("basis", "basis_input", "to_reduced"):
            arr = np.asarray(getattr(self, name), dtype=np.int64).copy()
            arr.flags.writeable = False
            setattr(self, name, arr)
        if self._inv_basis is None:
            bf = self.basis.astype(float)
            inv = np.linalg.inv(bf)
            inv = inv @ (2.0 * np.eye(bf.shape[0]) - bf @ inv)
            self._inv_basis = inv
        self._inv_basis.flags.writeable = False

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.n_samples

    @property
    def query_arithmetic_ops(self) -> int:
        """Deterministic arithmetic-operation count of one decode query.

        Per ascent pass: N pairings of n multiply-adds, the trig pair, and
        the rank-1 gradient update; plus the two basis solves around the
        final rounding.
        """
        n, big_n = self.n, self.n_samples
        iters = self.config.ascent_iters
        return iters * big_n * (4 * n + 6) + 4 * n * n + 2 * n

    def to_json(self) -> str:
        payload = {
            "schema": 1,
            "n": self.n,
            "basis_input": self.basis_input.T.tolist(),
            "basis": self.basis.T.tolist(),
            "to_reduced": self.to_reduced.T.tolist(),
            "s": self.s,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "ascent_iters": self.config.ascent_iters,
            "alpha_target": self.config.alpha_target,
            "seed": self.seed,
            "vectors": self.samples.vectors.tolist(),
            "coeffs": self.samples.coeffs.tolist(),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "BddpAdvice":
        data = json.loads(text)
        if data.get("schema") != 1:
            raise ValueError("unsupported advice schema")
        basis = np.array(data["basis"], dtype=np.int64).T
        samples = DualSampleSet(
            vectors=np.array(data["vectors"], dtype=float),
            coeffs=np.array(data["coeffs"], dtype=np.int64),
            s=float(data["s"]),
            basis=basis,
        )
        cfg = BddConfig(
            n_samples=samples.n_samples,
            ascent_iters=int(data["ascent_iters"]),
            epsilon=float(data["epsilon"]),
            alpha_target=float(data["alpha_target"]),
        )
        return cls(
            samples=samples,
            basis=basis,
            basis_input=np.array(data["basis_input"], dtype=np.int64).T,
            to_reduced=np.array(data["to_reduced"], dtype=np.int64).T,
            dual=dual_basis(basis),
            s=float(data["s"]),
            epsilon=float(data["epsilon"]),
            eta=float(data["eta"]),
            config=cfg,
            seed=data.get("seed"),
        )


def bddp_preprocess(basis, config: BddConfig | None = None, seed=0) -> BddpAdvice:
    """Build decoding advice: reduce, size the width, sample the dual.

    The dual sampling width is the numerically computed smoothing parameter
    of the dual lattice at the configured accuracy, floored by the
    sampler's validity threshold. Deterministic for a fixed seed.
    """
    cfg = config or BddConfig()
    b0 = check_basis(basis)
    t0 = time.perf_counter()
    reduced, to_reduced = lll_reduce(b0, return_transform=True)
    t1 = time.perf_counter()
    n = reduced.shape[0]
    eps = cfg.resolved_epsilon(n)
    n_samples = cfg.resolved_n_samples(n)
    eta = smoothing_parameter(reduced, eps, dual=True).eta
    rd = reduced_dual(reduced)
    s = max(eta, rd.floor)
    samples = sample_dual_set(reduced, s, n_samples, seed=as_rng(seed), prepared=rd)
    t2 = time.perf_counter()
    resolved = replace(cfg, n_samples=n_samples, epsilon=eps)
    return BddpAdvice(
        samples=samples,
        basis=reduced,
        basis_input=b0,
        to_reduced=to_reduced,
        dual=dual_basis(reduced),
        s=float(s),
        epsilon=float(eps),
        eta=float(eta),
        config=resolved,
        seed=seed if isinstance(seed, int) else None,
        timings_ms={"reduce": (t1 - t0) * 1e3, "preprocess": (t2 - t1) * 1e3},
    )


def bddp_query_batch(advice: BddpAdvice, targets, chunk: int = 0):
    """Decode many targets at once.

    Returns ``(coeffs, failed)`` where ``coeffs`` holds integer coefficient
    vectors with respect to ``advice.basis`` (one row per target) and
    ``failed`` flags rows whose ascent diverged (their coefficients are the
    plain rounded fallback and should not be trusted).
    """
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    if t.shape[1] != advice.n:
        raise ValueError(f"targets must have {advice.n} columns")
    m = t.shape[0]
    if chunk <= 0:
        chunk = max(1, 4_000_000 // max(1, advice.n_samples))
    coeffs = np.zeros((m, advice.n), dtype=np.int64)
    failed = np.zeros(m, dtype=bool)
    for start in range(0, m, chunk):
        sl = slice(start, min(start + chunk, m))
        c, f = _decode_chunk(advice, t[sl])
        coeffs[sl] = c
        failed[sl] = f
    return coeffs, failed


def _decode_chunk(advice: BddpAdvice, t):
    w = advice.samples.vectors
    big_n = w.shape[0]
    inv_t = advice._inv_basis.T
    bf_t = advice.basis.astype(float).T
    s_sq = advice.s * advice.s

    base = round_half_up(t @ inv_t)
    resid = t - base @ bf_t
    failed = np.zeros(t.shape[0], dtype=bool)
    for _ in range(advice.config.ascent_iters):
        phases = _TWO_PI * (resid @ w.T)
        values = np.cos(phases).mean(axis=1)
        failed |= np.abs(values) < _SIGNAL_FLOOR
        grad = -(_TWO_PI / big_n) * (np.sin(phases) @ w)
        denom = _TWO_PI * np.where(failed, 1.0, values) * s_sq
        step = grad / denom[:, None]
        step[failed] = 0.0
        resid += step
    coeffs = base + round_half_up(resid @ inv_t)
    return coeffs, failed


def bddp_query(advice: BddpAdvice, target) -> LatticePoint:
    """Decode one target to a lattice point.

    When the target lies within the decoding radius and the advice is
    adequate this is the unique closest lattice point. Raises
    ``DecodeFailure`` when the ascent signal vanishes. The returned
    coefficients refer to the basis originally handed to preprocessing.
    """
    coeffs, failed = bddp_query_batch(advice, np.asarray(target, dtype=float)[None, :])
    if failed[0]:
        raise DecodeFailure(
            "periodic Gaussian vanished at the target; "
            "target too far from the lattice for this advice"
        )
    reduced_coeffs = coeffs[0]
    input_coeffs = advice.to_reduced @ reduced_coeffs
    return LatticePoint(vector=advice.basis @ reduced_coeffs, coeffs=input_coeffs)


def scale_advice(advice: BddpAdvice, p: int) -> BddpAdvice:
    """Advice for the scaled lattice ``p * L`` derived from advice for ``L``.

    The dual of ``p L`` is ``L* / p``, so the samples scale by ``1/p`` and
    the width by the same factor; no resampling is needed.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    samples = DualSampleSet(
        vectors=advice.samples.vectors / p,
        coeffs=advice.samples.coeffs,
        s=advice.s / p,
        basis=p * advice.basis,
    )
    return BddpAdvice(
        samples=samples,
        basis=p * advice.basis,
        basis_input=p * advice.basis_input,
        to_reduced=advice.to_reduced,
        dual=advice.dual / p,
        s=advice.s / p,
        epsilon=advice.epsilon,
        eta=advice.eta / p,
        config=advice.config,
        seed=advice.seed,
    )


class BddpDecoder(BaseEstimator):
    """Scikit-learn style wrapper around the preprocessed decoder.

    ``fit`` takes a lattice basis (columns are basis vectors) and builds the
    advice; ``transform``/``predict`` decode rows of targets to lattice
    points. ``decode`` returns a single ``LatticePoint``.

    Parameters
    ----------
    n_samples : advice size; default ``max(1000, 200 n)``.
    ascent_iters : gradient steps per query (default 2).
    epsilon : accuracy of the smoothing-parameter schedule; default per
        dimension.
    seed : sampling seed.
    """

    def __init__(self, n_samples=None, ascent_iters=2, epsilon=None, seed=0):
        self.n_samples = n_samples
        self.ascent_iters = ascent_iters
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, basis, y=None):
        cfg = BddConfig(
            n_samples=self.n_samples,
            ascent_iters=self.ascent_iters,
            epsilon=self.epsilon,
        )
        self.advice_ = bddp_preprocess(basis, cfg, seed=self.seed)
        self.n_features_in_ = self.advice_.n
        return self

    def _check_fitted(self):
        if not hasattr(self, "advice_"):
            raise NotFittedError("BddpDecoder must be fitted before decoding")

    def decode(self, target) -> LatticePoint:
        self._check_fitted()
        return bddp_query(self.advice_, target)

    def decode_batch(self, targets):
        """(decoded vectors, failure mask); vectors are rows."""
        self._check_fitted()
        coeffs, failed = bddp_query_batch(self.advice_, targets)
        return coeffs @ self.advice_.basis.T, failed

    def transform(self, targets) -> np.ndarray:
        """Decoded lattice vectors, one row per target row.

        Raises ``DecodeFailure`` if any row diverged; use ``decode_batch``
        to receive the failure mask instead.
        """
        vectors, failed = self.decode_batch(targets)
        if failed.any():
            raise DecodeFailure(f"{int(failed.sum())} of {len(failed)} targets diverged")
        return vectors

    predict = transform
