"""Exact classical simulation of the Grover-accelerated enumeration.

The search oracle phase-marks coset indices whose candidate norm falls
strictly between zero and a threshold; one oracle application is two
decoder circuits sandwiching a fixed-point comparator. Because the oracle
is constant on the marked set and its complement, the Grover iteration
never leaves the two-dimensional subspace spanned by the uniform
superpositions of those sets, so measurement statistics follow the closed
form ``sin^2((2T+1) asin(sqrt(M/N)))`` exactly. The simulator draws from
that law and charges the query ledger as if the circuits had run; the
marked set itself comes from one classical pass over the candidate table
(shared with the classical solver), which is also how the real algorithm's
preprocessing stores its samples.

Norm thresholds originating from observed candidates are carried as exact
integer squared norms so every comparison in the minimum-finding loop is
deterministic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .decoder import BddConfig, bddp_preprocess
from .lattice import check_basis
from .seeding import PHASE_SAMPLE, PHASE_SOLVE, phase_rng
from .solver import CandidateTable, SolverError, SvpResult, build_candidate_table

__all__ = [
    "DegenerateLatticeError",
    "FixedPointCode",
    "encode_fixed_point",
    "threshold_code",
    "filter_mark",
    "OracleSpec",
    "QueryLedger",
    "toffoli_estimate",
    "GroverRun",
    "grover_success_probability",
    "grover_measure_sim",
    "oracle_marked_set",
    "ThresholdSearchResult",
    "threshold_search",
    "quantum_svp",
    "QuantumSVP",
]

DEFAULT_INT_BITS = 8
DEFAULT_FRAC_BITS = 24


class DegenerateLatticeError(RuntimeError):
    """No coset yields a nonzero candidate to seed the search."""


# --- fixed-point codes and the comparator ----------------------------------


@dataclass(frozen=True)
class FixedPointCode:
    """Unsigned fixed-point encoding: ``int_bits`` integer bits and
    ``frac_bits`` fraction bits; the represented value is
    ``code * scale / 2**frac_bits``."""

    int_bits: int
    frac_bits: int
    code: int
    scale: float = 1.0

    def __post_init__(self):
        if self.int_bits < 1 or self.frac_bits < 0:
            raise ValueError("need int_bits >= 1 and frac_bits >= 0")
        if not 0 <= self.code < 1 << (self.int_bits + self.frac_bits):
            raise ValueError("code out of range for the given widths")

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def value(self) -> float:
        return self.code * self.scale / (1 << self.frac_bits)


def encode_fixed_point(x: float, int_bits: int, frac_bits: int,
                       scale: float = 1.0) -> FixedPointCode:
    """Encode a nonnegative real: ``code = floor(x / scale * 2**frac_bits)``.

    Truncates toward zero; raises on overflow (``x / scale >= 2**int_bits``).
    """
    if x < 0:
        raise ValueError("only nonnegative values are encodable")
    if scale <= 0:
        raise ValueError("scale must be positive")
    ratio = x / scale
    if ratio >= 1 << int_bits:
        raise ValueError(f"value {x} overflows {int_bits} integer bits at scale {scale}")
    return FixedPointCode(int_bits, frac_bits, int(math.floor(ratio * (1 << frac_bits))), scale)


def threshold_code(int_bits: int, frac_bits: int, scale: float = 1.0,
                   bit: int | None = None) -> FixedPointCode:
    """Threshold with a single set bit in the integer part.

    ``bit`` is the absolute bit position (default ``frac_bits``: the lowest
    integer bit, i.e. the canonical placement where the comparator's "most
    significant block" is exactly the integer part).
    """
    if bit is None:
        bit = frac_bits
    if not frac_bits <= bit < int_bits + frac_bits:
        raise ValueError("threshold bit must sit in the integer part")
    return FixedPointCode(int_bits, frac_bits, 1 << bit, scale)


def filter_mark(v: FixedPointCode, c: FixedPointCode) -> bool:
    """Comparator bit-logic: mark iff ``0 < v.code < c.code``.

    Implemented purely with the mask tests the reversible circuit performs:
    all bits of ``v`` at or above the threshold's set bit clear, and not all
    bits of ``v`` clear. Requires matching widths/scale and a single-set-bit
    threshold in the integer part.
    """
    if (v.int_bits, v.frac_bits) != (c.int_bits, c.frac_bits) or v.scale != c.scale:
        raise ValueError("value and threshold must share widths and scale")
    if c.code == 0 or c.code & (c.code - 1):
        raise ValueError("threshold must have exactly one set bit")
    bit = c.code.bit_length() - 1
    if bit < c.frac_bits:
        raise ValueError("threshold bit must sit in the integer part")
    high_mask = ~((1 << bit) - 1) & ((1 << v.width) - 1)
    below = (v.code & high_mask) == 0
    nonzero = v.code != 0
    return below and nonzero


@dataclass(frozen=True)
class OracleSpec:
    """Static description of one phase-marking oracle instance.

    Metadata only: the threshold, the fixed-point layout of the norm
    register, modeled per-invocation costs, and qubit counts.
    """

    threshold: float
    int_bits: int = DEFAULT_INT_BITS
    frac_bits: int = DEFAULT_FRAC_BITS
    scale: float = 1.0
    ops_per_decoder: int = 0
    ops_per_filter: int = DEFAULT_INT_BITS + DEFAULT_FRAC_BITS
    index_qubits: int = 0
    value_qubits: int = DEFAULT_INT_BITS + DEFAULT_FRAC_BITS
    ancilla_qubits: int = 2

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")


# --- query accounting -------------------------------------------------------


@dataclass
class QueryLedger:
    """Monotone counters for oracle usage plus the modeled gate cost.

    One oracle query is two decoder-circuit invocations around one filter
    invocation, so ``ubddp_calls == 2 * od_queries`` always.
    """

    od_queries: int = 0
    ubddp_calls: int = 0
    filter_calls: int = 0
    ops_per_ubddp: int = 0
    ops_per_filter: int = DEFAULT_INT_BITS + DEFAULT_FRAC_BITS
    wall_ms: float = 0.0
    seed: int | None = None

    def charge_oracle(self, queries: int) -> None:
        if queries < 0:
            raise ValueError("cannot charge a negative query count")
        self.od_queries += queries
        self.ubddp_calls += 2 * queries
        self.filter_calls += queries

    def merge(self, other: "QueryLedger") -> None:
        self.od_queries += other.od_queries
        self.ubddp_calls += other.ubddp_calls
        self.filter_calls += other.filter_calls

    @property
    def toffoli_estimate(self) -> int:
        return toffoli_estimate(self)

    def to_dict(self) -> dict:
        return {
            "od_queries": self.od_queries,
            "ubddp_calls": self.ubddp_calls,
            "filter_calls": self.filter_calls,
            "ops_per_ubddp": self.ops_per_ubddp,
            "ops_per_filter": self.ops_per_filter,
            "toffoli_estimate": self.toffoli_estimate,
            "wall_ms": self.wall_ms,
            "seed": self.seed,
        }


def toffoli_estimate(ledger: QueryLedger, ops_per_ubddp: int | None = None,
                     ops_per_filter: int | None = None) -> int:
    """Toffoli-equivalent gate estimate: queries x (2 decoder costs + filter).

    The decoder circuit costs as many elementary gates as the classical
    decode needs arithmetic operations; the comparator costs one gate per
    register bit.
    """
    c1 = ledger.ops_per_ubddp if ops_per_ubddp is None else ops_per_ubddp
    c2 = ledger.ops_per_filter if ops_per_filter is None else ops_per_filter
    return ledger.od_queries * (2 * c1 + c2)


# --- the two-dimensional Grover model ---------------------------------------


def grover_success_probability(n_states: int, marked: int, iterations: int) -> float:
    """Probability of observing a marked index after ``iterations`` rounds:
    ``sin^2((2T+1) asin(sqrt(M/N)))``."""
    if not 0 <= marked <= n_states:
        raise ValueError("marked count must lie in [0, n_states]")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    theta = math.asin(math.sqrt(marked / n_states))
    return math.sin((2 * iterations + 1) * theta) ** 2


@dataclass(frozen=True)
class GroverRun:
    """One simulated Grover schedule entry."""

    n_states: int
    marked: int
    iterations: int

    @property
    def angle(self) -> float:
        return math.asin(math.sqrt(self.marked / self.n_states))

    @property
    def success_probability(self) -> float:
        return grover_success_probability(self.n_states, self.marked, self.iterations)


def grover_measure_sim(n_states: int, marked: int, iterations: int, rng,
                       ledger: QueryLedger | None = None) -> bool:
    """Simulate one measurement after ``iterations`` Grover rounds.

    Returns True (a marked index was observed) with exactly the
    two-dimensional-subspace probability; charges the ledger ``iterations``
    oracle queries.
    """
    p = grover_success_probability(n_states, marked, iterations)
    if ledger is not None:
        ledger.charge_oracle(iterations)
    return bool(rng.random() < p)


# --- marked sets and the search schedule ------------------------------------


def _threshold_sq(d_prime) -> float | int:
    """Squared threshold from either a length or an exact squared length."""
    if isinstance(d_prime, tuple) and len(d_prime) == 2 and d_prime[0] == "sq":
        return d_prime[1]
    return float(d_prime) ** 2


def oracle_marked_set(table: CandidateTable, d_prime,
                      ledger: QueryLedger | None = None) -> np.ndarray:
    """Indices the oracle would phase-mark: ``0 < ||candidate|| < d'``.

    ``d_prime`` is a length, or ``("sq", m)`` to pass an exact squared
    length. Evaluating the table is classical precomputation shared by all
    thresholds; per-query costs are charged by the measurement simulator,
    so the ledger (if given) is charged nothing here. Decode-failure cosets
    are never marked.
    """
    dsq = _threshold_sq(d_prime)
    mask = (~table.failed) & (table.norms_sq > 0) & (table.norms_sq < dsq)
    return np.flatnonzero(mask)


@dataclass(frozen=True)
class ThresholdSearchResult:
    found: bool
    index: int = -1
    norm_sq: int = 0

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))


def search_schedule(n: int) -> list:
    """Iteration counts of one search pass: start at ``floor(3^(n/2))`` and
    floor-halve down to 1."""
    t = math.isqrt(3**n)
    out = []
    while t >= 1:
        out.append(t)
        t //= 2
    return out


def threshold_search(table: CandidateTable, d_prime, kappa: int, rng,
                     ledger: QueryLedger | None = None) -> ThresholdSearchResult:
    """Find a coset with candidate norm strictly below a threshold.

    Runs ``kappa`` passes of the halving iteration schedule. Each
    measurement lands on a marked index with the exact two-dimensional
    success probability, in which case the observed index is uniform over
    the marked set; the running candidate is updated on strict norm
    improvement (unmarked outcomes carry only zero, failed, or
    over-threshold cosets and never improve a candidate). Returns not-found
    iff the final candidate norm exceeds the threshold, which here means no
    marked outcome was ever observed.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    n = table.n
    n_states = table.p**n
    marked = oracle_marked_set(table, d_prime, ledger)
    m = len(marked)
    dsq = _threshold_sq(d_prime)

    best_idx = -1
    best_sq = None
    for _ in range(kappa):
        for iters in search_schedule(n):
            hit = grover_measure_sim(n_states, m, iters, rng, ledger)
            if hit:
                idx = int(marked[rng.integers(m)])
                nsq = table.norms_sq[idx]
                if best_sq is None or nsq < best_sq:
                    best_idx, best_sq = idx, nsq
    if best_sq is None or best_sq > dsq:
        return ThresholdSearchResult(found=False)
    return ThresholdSearchResult(found=True, index=best_idx, norm_sq=int(best_sq))


def _initial_candidate(table: CandidateTable, rng) -> int:
    """Uniformly drawn coset with a nonzero candidate (resampling zeros)."""
    usable = (~table.failed) & (table.norms_sq > 0)
    if not usable.any():
        raise DegenerateLatticeError("all cosets decode to zero or fail")
    for _ in range(table.size):
        idx = int(rng.integers(table.size))
        if usable[idx]:
            return idx
    raise DegenerateLatticeError(f"no nonzero candidate after {table.size} draws")


def quantum_svp(basis, kappa: int = 10, n_samples: int | None = None,
                ascent_iters: int = 2, epsilon: float | None = None,
                seed: int = 0, threads: int = 1) -> SvpResult:
    """Minimum finding over the coset candidates via simulated Grover search.

    Starts from a random nonzero candidate's norm as the threshold and
    repeatedly calls the threshold search, shrinking the threshold to each
    newly found (strictly shorter) candidate. The loop stops when a search
    comes back empty-handed or after ``n * log2(3)`` threshold updates.
    Returns the final candidate together with the query ledger.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    started = time.perf_counter()
    b = check_basis(basis)
    cfg = BddConfig(n_samples=n_samples, ascent_iters=ascent_iters, epsilon=epsilon)
    advice = bddp_preprocess(b, cfg, seed=phase_rng(seed, PHASE_SAMPLE))
    solve_started = time.perf_counter()
    table = build_candidate_table(advice, threads=threads)

    ledger = QueryLedger(ops_per_ubddp=advice.query_arithmetic_ops, seed=seed)
    rng = phase_rng(seed, PHASE_SOLVE)

    best = _initial_candidate(table, rng)
    d_sq = int(table.norms_sq[best])
    spec = OracleSpec(
        threshold=math.sqrt(d_sq),
        ops_per_decoder=advice.query_arithmetic_ops,
        index_qubits=math.ceil(table.n * math.log2(3)),
    )

    timer = 0
    max_updates = table.n * math.log2(3)
    while True:
        result = threshold_search(table, ("sq", d_sq), kappa, rng, ledger)
        timer += 1
        if result.found and timer <= max_updates:
            best = result.index
            d_sq = result.norm_sq
        else:
            break

    point = table.vector(best)
    ledger.wall_ms = (time.perf_counter() - started) * 1e3
    timings = dict(advice.timings_ms)
    timings["solve"] = (time.perf_counter() - solve_started) * 1e3
    return SvpResult(
        vector=point.vector,
        coeffs=point.coeffs,
        norm_sq=point.norm_sq,
        mode="qsim",
        cosets=table.size,
        failures=int(table.failed.sum()),
        zeros=int(((table.norms_sq == 0) & ~table.failed).sum()),
        seed=seed,
        ledger=ledger,
        extras={"kappa": kappa, "threshold_rounds": timer, "timings_ms": timings,
                "oracle_spec": spec},
    )


class QuantumSVP(BaseEstimator):
    """Scikit-learn style frontend for the simulated quantum SVP solver.

    ``fit`` exposes ``shortest_vector_``, ``norm_sq_`` and the query
    ``ledger_``.
    """

    def __init__(self, kappa=10, n_samples=None, ascent_iters=2, epsilon=None,
                 seed=0, threads=1):
        self.kappa = kappa
        self.n_samples = n_samples
        self.ascent_iters = ascent_iters
        self.epsilon = epsilon
        self.seed = seed
        self.threads = threads

    def fit(self, basis, y=None):
        self.result_ = quantum_svp(
            basis,
            kappa=self.kappa,
            n_samples=self.n_samples,
            ascent_iters=self.ascent_iters,
            epsilon=self.epsilon,
            seed=self.seed,
            threads=self.threads,
        )
        self.shortest_vector_ = self.result_.vector
        self.norm_sq_ = self.result_.norm_sq
        self.ledger_ = self.result_.ledger
        self.n_features_in_ = len(self.result_.vector)
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("QuantumSVP must be fitted first")
