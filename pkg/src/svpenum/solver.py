"""Shortest-vector search by coset enumeration over a BDD oracle.

A lattice point within distance ``p * alpha * lambda_1`` of a target is
determined by its coefficient residue mod ``p`` together with one decoder
call on the rescaled coset representative; enumerating all ``p^n`` residues
therefore collects every short lattice point. The SVP solver fixes ``p = 3``
(the decoder only handles offsets below half the first minimum, so smaller
``p`` cannot cover a ball containing nonzero points), decodes every coset
representative once, and keeps the shortest nonzero candidate.

The coset loop is embarrassingly parallel: workers share the immutable
advice and each owns a disjoint index range.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .decoder import (
    DECODING_ALPHA,
    BddConfig,
    BddpAdvice,
    DecodeFailure,
    bddp_preprocess,
    bddp_query_batch,
)
from .lattice import LatticePoint, check_basis, norms_sq_exact
from .seeding import PHASE_SAMPLE, phase_rng

__all__ = [
    "SolverError",
    "EnumOutput",
    "SvpResult",
    "CandidateTable",
    "coset_digits",
    "enum_all",
    "build_candidate_table",
    "enum_svp",
    "EnumSVP",
]

ENUM_MODULUS = 3


class SolverError(RuntimeError):
    """Every coset failed to decode; no candidate survived."""


@dataclass
class EnumOutput:
    """Result of one full coset enumeration.

    ``entries`` maps every residue tuple in ``Z_p^n`` to the candidate
    lattice point collected for it (or ``None`` on decode failure).
    ``radius_hint`` is the guaranteed collection radius ``p * alpha *
    lambda_1`` when the caller supplied the first minimum.
    """

    entries: dict
    p: int
    target: np.ndarray
    failures: int = 0
    radius_hint: float | None = None

    def vectors(self):
        return [pt.vector for pt in self.entries.values() if pt is not None]

    def to_json(self) -> str:
        payload = {
            "schema": 1,
            "p": self.p,
            "target": [float(v) for v in self.target],
            "failures": self.failures,
            "radius_hint": self.radius_hint,
            "entries": {
                ",".join(str(d) for d in key):
                    (None if pt is None else [int(v) for v in pt.vector])
                for key, pt in self.entries.items()
            },
        }
        return json.dumps(payload)


def coset_digits(n: int, p: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Residue vectors ``start..stop`` of ``Z_p^n`` in lexicographic order.

    Index 0 is the all-zero residue; the first coordinate is the most
    significant digit.
    """
    if stop is None:
        stop = p**n
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.zeros((len(idx), n), dtype=np.int64)
    for col in range(n - 1, -1, -1):
        out[:, col] = idx % p
        idx = idx // p
    return out


def enum_all(basis, target, p: int, bdd, lambda1: float | None = None) -> EnumOutput:
    """Collect candidate lattice points near ``target`` from every coset.

    ``bdd`` is any callable honoring the bounded-distance-decoding
    contract: it maps a real vector to a ``LatticePoint`` (and may raise
    ``DecodeFailure``). For each residue ``s`` the entry is
    ``B s - p * bdd((B s - target) / p)``; with an exact oracle the entry
    set contains every lattice point within ``p * alpha * lambda_1`` of the
    target (plus possibly some farther ones). Pass ``lambda1`` to record
    that radius on the output.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    b = check_basis(basis)
    n = b.shape[0]
    t = np.asarray(target, dtype=float)
    entries = {}
    failures = 0
    for digits in coset_digits(n, p):
        rep = b @ digits
        query = (rep.astype(float) - t) / p
        key = tuple(int(d) for d in digits)
        try:
            point = bdd(query)
        except DecodeFailure:
            entries[key] = None
            failures += 1
            continue
        vec = rep - p * point.vector
        coeffs = digits - p * point.coeffs
        entries[key] = LatticePoint(vector=vec, coeffs=coeffs)
    radius = None if lambda1 is None else p * DECODING_ALPHA * lambda1
    return EnumOutput(entries=entries, p=p, target=t, failures=failures,
                      radius_hint=radius)


@dataclass
class CandidateTable:
    """Per-coset candidates of the SVP enumeration, evaluated once.

    Row ``i`` belongs to the ``i``-th residue of ``Z_p^n`` in lexicographic
    order. ``coeffs`` are candidate coefficients in ``advice.basis``;
    ``norms_sq`` are exact squared norms; ``failed`` marks cosets whose
    decode diverged (their rows are untrusted and never marked/selected).
    """

    advice: BddpAdvice
    p: int
    coeffs: np.ndarray
    norms_sq: np.ndarray
    failed: np.ndarray

    def __post_init__(self):
        for name in ("coeffs", "norms_sq", "failed"):
            arr = getattr(self, name)
            if isinstance(arr, np.ndarray):
                arr.flags.writeable = False

    @property
    def n(self) -> int:
        return self.advice.n

    @property
    def size(self) -> int:
        return len(self.norms_sq)

    def vector(self, index: int) -> LatticePoint:
        coeffs = self.coeffs[index]
        return LatticePoint(
            vector=self.advice.basis @ coeffs,
            coeffs=self.advice.to_reduced @ coeffs,
        )

    def digits(self, index: int) -> tuple:
        return tuple(int(d) for d in coset_digits(self.n, self.p, index, index + 1)[0])


def _table_chunk(advice: BddpAdvice, p: int, start: int, stop: int):
    digits = coset_digits(advice.n, p, start, stop)
    reps = digits @ advice.basis.T
    targets = reps.astype(float) / p
    dec_coeffs, failed = bddp_query_batch(advice, targets, chunk=stop - start)
    cand_coeffs = digits - p * dec_coeffs
    cand_vecs = cand_coeffs @ advice.basis.T
    norms = norms_sq_exact(cand_vecs)
    return cand_coeffs, norms, failed


def build_candidate_table(advice: BddpAdvice, p: int = ENUM_MODULUS,
                          threads: int = 1, chunk: int = 4096) -> CandidateTable:
    """Decode all ``p^n`` coset representatives (``B s / p``) in batches."""
    n = advice.n
    total = p**n
    coeffs = np.zeros((total, n), dtype=np.int64)
    norms = np.zeros(total, dtype=np.int64)
    failed = np.zeros(total, dtype=bool)
    ranges = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]

    def run(rg):
        return rg, _table_chunk(advice, p, rg[0], rg[1])

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, ranges))
    else:
        results = [run(rg) for rg in ranges]
    for (start, stop), (c, nsq, f) in results:
        if nsq.dtype == object and norms.dtype != object:
            norms = norms.astype(object)
        coeffs[start:stop] = c
        norms[start:stop] = nsq
        failed[start:stop] = f
    return CandidateTable(advice=advice, p=p, coeffs=coeffs, norms_sq=norms, failed=failed)


@dataclass
class SvpResult:
    """Outcome of one SVP run."""

    vector: np.ndarray
    coeffs: np.ndarray           # with respect to the input basis
    norm_sq: int
    mode: str
    cosets: int
    failures: int
    zeros: int
    seed: int | None = None
    ledger: object = None
    extras: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))


def _select_min(table: CandidateTable) -> int:
    """Index of the shortest usable candidate (first one on ties)."""
    usable = (~table.failed) & (table.norms_sq > 0)
    if not usable.any():
        raise SolverError("no coset produced a usable nonzero candidate")
    masked = np.where(usable, table.norms_sq, np.iinfo(np.int64).max)
    return int(np.argmin(masked))


def enum_svp(basis, n_samples: int | None = None, ascent_iters: int = 2,
             epsilon: float | None = None, seed: int = 0,
             threads: int = 1) -> SvpResult:
    """Solve SVP by decoding all ``3^n`` coset representatives.

    Preprocesses advice once (reduction + dual Gaussian sampling), then
    evaluates the candidate ``B s - 3 * decode(B s / 3)`` for every residue
    ``s`` and returns the shortest nonzero one (ties: first residue in
    lexicographic order). Decode failures are recorded per coset and only
    abort the run if no coset survives.
    """
    cfg = BddConfig(n_samples=n_samples, ascent_iters=ascent_iters, epsilon=epsilon)
    advice = bddp_preprocess(basis, cfg, seed=phase_rng(seed, PHASE_SAMPLE))
    t0 = time.perf_counter()
    table = build_candidate_table(advice, threads=threads)
    best = _select_min(table)
    point = table.vector(best)
    timings = dict(advice.timings_ms)
    timings["solve"] = (time.perf_counter() - t0) * 1e3
    return SvpResult(
        vector=point.vector,
        coeffs=point.coeffs,
        norm_sq=point.norm_sq,
        mode="enump",
        cosets=table.size,
        failures=int(table.failed.sum()),
        zeros=int(((table.norms_sq == 0) & ~table.failed).sum()),
        seed=seed,
        extras={"timings_ms": timings},
    )


class EnumSVP(BaseEstimator):
    """Scikit-learn style frontend for the classical coset-enumeration solver.

    ``fit`` takes a basis and exposes ``shortest_vector_`` / ``norm_sq_`` /
    ``result_``.
    """

    def __init__(self, n_samples=None, ascent_iters=2, epsilon=None, seed=0, threads=1):
        self.n_samples = n_samples
        self.ascent_iters = ascent_iters
        self.epsilon = epsilon
        self.seed = seed
        self.threads = threads

    def fit(self, basis, y=None):
        self.result_ = enum_svp(
            basis,
            n_samples=self.n_samples,
            ascent_iters=self.ascent_iters,
            epsilon=self.epsilon,
            seed=self.seed,
            threads=self.threads,
        )
        self.shortest_vector_ = self.result_.vector
        self.norm_sq_ = self.result_.norm_sq
        self.n_features_in_ = len(self.result_.vector)
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("EnumSVP must be fitted first")
