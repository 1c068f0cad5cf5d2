"""Exact integer lattice arithmetic.

Bases, Gram-Schmidt orthogonalization, LLL reduction, dual bases, coset
reduction modulo a scaled sublattice, Babai rounding and instance generation.

Conventions used throughout the package:

* A basis is a square integer matrix whose *columns* are the basis vectors.
  The on-disk text format stores one basis vector per line; readers and
  writers transpose accordingly.
* Squared norms of integer vectors, determinants, coset arithmetic and
  lattice-membership checks are exact (Python integers / fractions).
  Orthogonalization, dual bases and everything downstream of them are
  double precision with stated tolerances.
* Rounding of half-integers is always toward +infinity.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "RankDeficientError",
    "NotInLatticeError",
    "BasisParseError",
    "IllConditionedWarning",
    "LatticePoint",
    "GsoData",
    "check_basis",
    "round_half_up",
    "det_exact",
    "solve_exact",
    "inv_exact",
    "integer_coefficients",
    "norm_sq_exact",
    "norms_sq_exact",
    "gram_schmidt",
    "lll_reduce",
    "is_unimodular",
    "dual_basis",
    "coset_reduce",
    "babai_round",
    "generate_basis",
    "read_basis",
    "parse_basis",
    "write_basis",
    "format_basis",
    "basis_fingerprint",
]


class RankDeficientError(ValueError):
    """The given matrix does not span the full space."""


class NotInLatticeError(ValueError):
    """A vector expected to lie in the lattice does not."""


class BasisParseError(ValueError):
    """Malformed basis file; carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class IllConditionedWarning(UserWarning):
    """Dual-basis computation on a numerically fragile basis."""


@dataclass(frozen=True)
class LatticePoint:
    """A lattice vector together with its integer coefficient vector.

    ``vector == basis @ coeffs`` holds exactly in integer arithmetic for the
    basis the point was produced from.
    """

    vector: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", _frozen_int_array(self.vector))
        object.__setattr__(self, "coeffs", _frozen_int_array(self.coeffs))

    @property
    def norm_sq(self) -> int:
        return norm_sq_exact(self.vector)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    def __eq__(self, other):
        if not isinstance(other, LatticePoint):
            return NotImplemented
        return np.array_equal(self.vector, other.vector)


@dataclass(frozen=True)
class GsoData:
    """Gram-Schmidt data: orthogonal vectors (columns), mu coefficients and
    squared norms of the orthogonal vectors."""

    orthogonal: np.ndarray  # (n, n) float, column i = b*_i
    mu: np.ndarray          # (n, n) float, unit lower triangular
    norms_sq: np.ndarray    # (n,) float, ||b*_i||^2

    @property
    def max_norm(self) -> float:
        return float(np.sqrt(self.norms_sq.max()))


def _frozen_int_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64).copy()
    arr.flags.writeable = False
    return arr


def check_basis(basis) -> np.ndarray:
    """Validate and canonicalize a basis matrix (columns are basis vectors).

    Returns a fresh ``int64`` array. Raises ``RankDeficientError`` when the
    exact determinant vanishes and ``ValueError`` on shape/range problems.
    """
    arr = np.asarray(basis)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"basis must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("basis must be at least 1x1")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.all(np.abs(arr - rounded) < 1e-12):
            raise ValueError("basis entries must be integers")
        arr = rounded
    arr = arr.astype(np.int64)
    if np.any(np.abs(arr) > 2**40):
        raise ValueError("basis entries exceed the supported range (|b_ij| <= 2^40)")
    if det_exact(arr) == 0:
        raise RankDeficientError("basis matrix is singular")
    return arr.copy()


def round_half_up(values) -> np.ndarray:
    """Nearest-integer rounding with halves going toward +infinity."""
    return np.floor(np.asarray(values, dtype=float) + 0.5).astype(np.int64)


def norm_sq_exact(vector) -> int:
    """Exact squared euclidean norm of an integer vector."""
    return int(sum(int(x) * int(x) for x in np.asarray(vector).ravel()))


def norms_sq_exact(matrix) -> np.ndarray:
    """Exact squared norms of the rows of an integer matrix.

    Uses int64 when safe, falling back to Python integers otherwise.
    """
    mat = np.asarray(matrix)
    if mat.size == 0:
        return np.zeros(mat.shape[0], dtype=np.int64)
    if np.abs(mat).max(initial=0) < 2**30:
        return np.einsum("ij,ij->i", mat.astype(np.int64), mat.astype(np.int64))
    return np.array([norm_sq_exact(row) for row in mat], dtype=object)


def det_exact(matrix) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [[int(x) for x in row] for row in np.asarray(matrix)]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def solve_exact(matrix, rhs) -> list[Fraction]:
    """Solve ``matrix @ x = rhs`` exactly over the rationals."""
    n = len(rhs)
    a = [[Fraction(int(x)) for x in row] + [Fraction(int(rhs[i]))]
         for i, row in enumerate(np.asarray(matrix))]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise RankDeficientError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def inv_exact(matrix) -> list[list[Fraction]]:
    """Exact inverse of an integer matrix as nested Fractions."""
    mat = np.asarray(matrix)
    n = mat.shape[0]
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(solve_exact(mat, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def integer_coefficients(basis, vector) -> np.ndarray:
    """Exact coefficient vector ``x`` with ``basis @ x == vector``.

    Raises ``NotInLatticeError`` when the solution is not integral.
    """
    sol = solve_exact(basis, [int(v) for v in np.asarray(vector)])
    if any(f.denominator != 1 for f in sol):
        raise NotInLatticeError("vector is not an integer combination of the basis")
    return np.array([int(f) for f in sol], dtype=np.int64)


def gram_schmidt(basis) -> GsoData:
    """Gram-Schmidt orthogonalization of the basis columns (double precision).

    The first orthogonal vector equals the first basis vector, and
    ``b_i = b*_i + sum_{j<i} mu[i, j] * b*_j`` reconstructs the basis.
    """
    bf = np.asarray(basis, dtype=float)
    if bf.ndim != 2 or bf.shape[0] != bf.shape[1]:
        raise ValueError("basis must be square")
    n = bf.shape[1]
    ortho = np.zeros_like(bf)
    mu = np.eye(n)
    norms = np.zeros(n)
    for i in range(n):
        v = bf[:, i].copy()
        for j in range(i):
            mu[i, j] = float(bf[:, i] @ ortho[:, j]) / norms[j]
            v -= mu[i, j] * ortho[:, j]
        norms[i] = float(v @ v)
        if norms[i] <= 1e-20 * max(1.0, float(bf[:, i] @ bf[:, i])):
            raise RankDeficientError(f"column {i} is linearly dependent")
        ortho[:, i] = v
    return GsoData(orthogonal=ortho, mu=mu, norms_sq=norms)


def _gso_floats(cols):
    """(norms_sq, mu) of a list of integer columns, via float64."""
    bf = np.array(cols, dtype=float).T
    n = bf.shape[1]
    ortho = np.zeros_like(bf)
    mu = np.eye(n)
    norms = np.zeros(n)
    for i in range(n):
        v = bf[:, i].copy()
        for j in range(i):
            mu[i, j] = float(bf[:, i] @ ortho[:, j]) / norms[j]
            v -= mu[i, j] * ortho[:, j]
        norms[i] = float(v @ v)
        ortho[:, i] = v
    return norms, mu


def _lll_cols(cols, delta):
    """LLL core on Python-integer column lists; returns (cols, transform).

    Column operations are exact over arbitrary-precision integers; only the
    Gram-Schmidt data driving size reduction and swaps is floating point.
    """
    n = len(cols)
    cols = [list(c) for c in cols]
    trans = [[1 if r == c else 0 for r in range(n)] for c in range(n)]

    max_rounds = 20000 * n * n
    rounds = 0
    k = 1
    while k < n:
        rounds += 1
        if rounds > max_rounds:
            raise RuntimeError("LLL failed to converge (numerical trouble)")
        norms, mu = _gso_floats(cols)
        murow = mu[k].copy()
        changed = False
        for j in range(k - 1, -1, -1):
            q = int(np.floor(murow[j] + 0.5))
            if q != 0:
                cols[k] = [a - q * c for a, c in zip(cols[k], cols[j])]
                trans[k] = [a - q * c for a, c in zip(trans[k], trans[j])]
                murow[: j + 1] -= q * mu[j][: j + 1]
                changed = True
        if changed:
            norms, mu = _gso_floats(cols)
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            cols[k], cols[k - 1] = cols[k - 1], cols[k]
            trans[k], trans[k - 1] = trans[k - 1], trans[k]
            k = max(k - 1, 1)
    return cols, trans


def lll_reduce(basis, delta: float = 0.99, return_transform: bool = False):
    """LLL-reduce an integer basis.

    The output spans the same lattice as the input (the change of basis is
    unimodular by construction).

    Parameters
    ----------
    basis : integer matrix, columns are basis vectors.
    delta : Lovasz parameter in (0.25, 1).
    return_transform : also return the unimodular ``U`` with
        ``reduced == basis @ U``.
    """
    if not 0.25 < delta < 1.0:
        raise ValueError("delta must lie in (0.25, 1)")
    b = check_basis(basis)
    n = b.shape[0]
    cols = [[int(b[r, c]) for r in range(n)] for c in range(n)]
    cols, trans = _lll_cols(cols, delta)
    reduced = np.array(cols, dtype=np.int64).T
    if return_transform:
        u = np.array(trans, dtype=np.int64).T
        return reduced, u
    return reduced


def is_unimodular(old_basis, new_basis) -> bool:
    """Exact check that both bases generate the same lattice."""
    old = np.asarray(old_basis)
    n = old.shape[0]
    entries = []
    for j in range(n):
        col = solve_exact(old, [int(v) for v in np.asarray(new_basis)[:, j]])
        if any(f.denominator != 1 for f in col):
            return False
        entries.append([int(f) for f in col])
    m = np.array(entries, dtype=object).T
    return abs(det_exact(m)) == 1


def dual_basis(basis) -> np.ndarray:
    """Dual basis matrix: the inverse transpose of the basis matrix.

    Double precision, tightened by one Newton refinement step so that
    ``<b_i, d_j> = delta_ij`` holds to ~1e-12 for well-behaved inputs.
    Emits ``IllConditionedWarning`` (with the condition estimate) when the
    basis is numerically fragile.
    """
    b = np.asarray(basis, dtype=float)
    cond = np.linalg.cond(b)
    if cond > 1e12:
        warnings.warn(
            f"basis condition estimate {cond:.2e}; dual pairing may lose precision",
            IllConditionedWarning,
        )
    d = np.linalg.inv(b.T)
    # one Newton step: X <- X (2I - A X) for A = B^T
    d = d @ (2.0 * np.eye(b.shape[0]) - b.T @ d)
    return d


def coset_reduce(vector, basis, p: int, coeffs=None):
    """Reduce a lattice vector modulo the scaled sublattice ``p * L``.

    Returns ``(s, representative)`` where ``s`` is the coefficient vector of
    ``vector`` reduced componentwise mod ``p`` (entries in ``0..p-1``) and
    ``representative = basis @ s``. The difference ``vector - representative``
    lies in ``p * L`` exactly.

    ``coeffs`` may supply the known integer coefficients of ``vector``;
    otherwise they are recovered exactly (``NotInLatticeError`` if absent).
    """
    if p < 2:
        raise ValueError("modulus p must be >= 2")
    b = np.asarray(basis, dtype=np.int64)
    if coeffs is None:
        if isinstance(vector, LatticePoint):
            coeffs = vector.coeffs
            vector = vector.vector
        else:
            coeffs = integer_coefficients(b, vector)
    x = np.asarray(coeffs, dtype=np.int64)
    s = np.mod(x, p)
    rep = b @ s
    return s, LatticePoint(vector=rep, coeffs=s)


def babai_round(basis, target) -> LatticePoint:
    """Round a real target onto the lattice coordinatewise.

    Computes ``basis @ round(basis^{-1} target)`` with half-integers rounded
    toward +infinity.
    """
    b = np.asarray(basis, dtype=float)
    t = np.asarray(target, dtype=float)
    coeffs = round_half_up(np.linalg.solve(b, t))
    point = np.asarray(basis, dtype=np.int64) @ coeffs
    return LatticePoint(vector=point, coeffs=coeffs)


def generate_basis(kind: str, n: int, bits: int = 8, seed=0) -> np.ndarray:
    """Generate a deterministic full-rank test basis.

    Kinds:

    * ``uniform``: entries uniform in ``[-2^(bits-1), 2^(bits-1)]``,
      resampled until nonsingular.
    * ``knapsack``: identity block plus one dense row; the last basis vector
      is ``M * e_n`` with ``M = 2^bits``, the others are ``e_i + a_i e_n``
      with ``a_i`` uniform in ``[1, 2^bits)``.
    * ``scaled-identity``: ``bits`` is reinterpreted as the diagonal scale.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if bits < 1:
        raise ValueError("bits must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "scaled-identity":
        return (bits * np.eye(n, dtype=np.int64)).astype(np.int64)
    if kind == "uniform":
        half = 2 ** (bits - 1)
        for _ in range(1000):
            cand = rng.integers(-half, half + 1, size=(n, n), dtype=np.int64)
            if det_exact(cand) != 0:
                return cand
        raise RuntimeError("failed to generate a nonsingular basis")
    if kind == "knapsack":
        basis = np.eye(n, dtype=np.int64)
        if n == 1:
            basis[0, 0] = 2**bits
            return basis
        dense = rng.integers(1, 2**bits, size=n - 1, dtype=np.int64)
        basis[n - 1, : n - 1] = dense
        basis[n - 1, n - 1] = 2**bits
        return basis
    raise ValueError(f"unknown basis kind {kind!r}")


# --- file formats -----------------------------------------------------------
#
# Text: line 1 holds n; each of the following n lines holds one basis vector
# (n space-separated integers). JSON: {"n": int, "basis": [[...], ...]} with
# the same one-row-per-vector convention.


def parse_basis(text: str) -> np.ndarray:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BasisParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
        if "n" not in data or "basis" not in data:
            raise BasisParseError('JSON basis needs keys "n" and "basis"')
        n = data["n"]
        rows = data["basis"]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise BasisParseError(f"expected {n} rows of {n} integers")
        return check_basis(np.array(rows, dtype=np.int64).T)

    lines = text.splitlines()
    if not lines:
        raise BasisParseError("empty basis file", line=1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise BasisParseError("first line must hold the dimension", line=1) from None
    if n < 1:
        raise BasisParseError("dimension must be positive", line=1)
    rows = []
    for i in range(1, n + 1):
        if i >= len(lines):
            raise BasisParseError(f"expected {n} vector lines", line=len(lines) + 1)
        parts = lines[i].split()
        if len(parts) != n:
            raise BasisParseError(f"expected {n} integers", line=i + 1)
        try:
            rows.append([int(p) for p in parts])
        except ValueError:
            raise BasisParseError("non-integer entry", line=i + 1) from None
    return check_basis(np.array(rows, dtype=np.int64).T)


def read_basis(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_basis(fh.read())


def format_basis(basis) -> str:
    b = np.asarray(basis, dtype=np.int64)
    n = b.shape[0]
    lines = [str(n)]
    for i in range(n):
        lines.append(" ".join(str(int(v)) for v in b[:, i]))
    return "\n".join(lines) + "\n"


def write_basis(path, basis) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_basis(basis))


def basis_fingerprint(basis) -> str:
    """Stable hex digest of the exact basis contents."""
    return hashlib.sha256(format_basis(basis).encode()).hexdigest()[:16]
