"""Integer-matrix lattices: patterns, generating sets and the Smith normal form.

A regular integer matrix ``M`` defines the lattice ``M^{-1} Z^d``. Its
*pattern* is the set of lattice representatives modulo 1 inside the
symmetric cell ``[-1/2, 1/2)^d`` and its *generating set* ``G(M^T)`` is the
matching set of integer frequencies. Both are enumerated in one fixed order
derived from the Smith normal form ``M = Q E R``:

    y(lam) = R^{-1} E^{-1} lam  (mod 1),   lam_j in {0, ..., e_j - 1},

with the last index varying fastest (row-major). Every field array in the
package follows this order.

All point arithmetic is exact. A pattern point is stored as an integer
numerator vector over the common denominator ``e_d`` (the largest
elementary divisor), so membership and equality tests never touch floats.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd

import numpy as np

__all__ = [
    "SingularMatrixError",
    "PatternMatrix",
    "SmithDecomposition",
    "Pattern",
    "GeneratingSet",
    "as_pattern_matrix",
    "smith_normal_form",
    "build_pattern",
    "build_generating_set",
    "get_pattern",
    "reduce_mod_unit",
    "is_subpattern",
    "pattern_congruent",
    "hermite_representative",
    "reorder_map",
    "transformed_pattern",
    "embed_3d",
]


class SingularMatrixError(ValueError):
    """Raised when a pattern matrix has zero determinant."""


# ---------------------------------------------------------------------------
# exact small-matrix helpers (d <= 3 in practice, any d works)
# ---------------------------------------------------------------------------

def _identity(d):
    return [[int(i == j) for j in range(d)] for i in range(d)]


def _det_int(rows) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    sign, prev = 1, 1
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
    return sign * a[n - 1][n - 1] if n else 1


def _inverse_exact(rows):
    """Inverse of a regular integer or rational matrix as Fractions."""
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError("singular pattern matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def _transpose(a):
    return [list(r) for r in zip(*a)]


def _is_integral(rows) -> bool:
    return all(Fraction(x).denominator == 1 for r in rows for x in r)


# ---------------------------------------------------------------------------
# matrix parsing
# ---------------------------------------------------------------------------

_DIAG_RE = re.compile(r"^\s*diag\s*\((.*)\)\s*$", re.IGNORECASE)


def _parse_matrix_text(text: str):
    s = text.strip()
    m = _DIAG_RE.match(s)
    if m:
        vals = [int(v) for v in re.split(r"[,\s]+", m.group(1).strip()) if v]
        return [[v if i == j else 0 for j in range(len(vals))]
                for i, v in enumerate(vals)]
    if s.startswith("["):
        import ast
        return ast.literal_eval(s)
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    if ";" in s:
        return [[int(v) for v in re.split(r"[,\s]+", row.strip()) if v]
                for row in s.split(";")]
    lines = [ln for ln in s.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return [[int(v) for v in ln.split()] for ln in lines]


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternMatrix:
    """A regular square integer matrix defining a sampling lattice.

    Accepts nested sequences, numpy arrays or text such as ``"(8,-1;0,8)"``,
    ``"diag(8,4)"``, ``"[[8,-1],[0,8]]"`` or whitespace-separated rows.
    """

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = self.entries
        if isinstance(rows, str):
            rows = _parse_matrix_text(rows)
        rows = tuple(tuple(int(x) for x in r) for r in np.asarray(rows, dtype=object).tolist())
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError(f"pattern matrix must be square, got {rows!r}")
        object.__setattr__(self, "entries", rows)
        if _det_int(rows) == 0:
            raise SingularMatrixError("singular pattern matrix")

    @property
    def d(self) -> int:
        return len(self.entries)

    @cached_property
    def det(self) -> int:
        return _det_int(self.entries)

    @property
    def m(self) -> int:
        """Number of pattern points, ``|det M|``."""
        return abs(self.det)

    @property
    def T(self) -> "PatternMatrix":
        return PatternMatrix(tuple(zip(*self.entries)))

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(map(str, r)) + "]" for r in self.entries) + "]"

    def compact(self) -> str:
        """Short form ``(a,b;c,d)`` used in reports."""
        return "(" + ";".join(",".join(map(str, r)) for r in self.entries) + ")"


def as_pattern_matrix(M) -> PatternMatrix:
    if isinstance(M, PatternMatrix):
        return M
    if isinstance(M, Pattern):
        return M.matrix
    return PatternMatrix(M)


@dataclass(frozen=True)
class SmithDecomposition:
    """``M = Q @ diag(e) @ R`` with unimodular ``Q``, ``R`` and ``e_j | e_{j+1}``."""

    Q: tuple[tuple[int, ...], ...]
    divisors: tuple[int, ...]
    R: tuple[tuple[int, ...], ...]

    @property
    def E(self) -> tuple[tuple[int, ...], ...]:
        n = len(self.divisors)
        return tuple(tuple(self.divisors[i] if i == j else 0 for j in range(n))
                     for i in range(n))

    def product(self) -> list[list[int]]:
        return _matmul(_matmul(self.Q, self.E), self.R)


def smith_normal_form(M) -> SmithDecomposition:
    """Smith decomposition of a regular integer matrix.

    Integer elimination on ``A`` while keeping ``M = Q A R`` invariant: every
    row operation on ``A`` is undone on the columns of ``Q`` and every column
    operation on the rows of ``R``. Python integers keep it exact for any size.

    Raises
    ------
    SingularMatrixError
        If ``det M == 0``.
    """
    M = as_pattern_matrix(M)
    d = M.d
    A = [list(r) for r in M.entries]
    Q = _identity(d)
    R = _identity(d)

    for t in range(d):
        while True:
            # smallest nonzero entry of the trailing block goes to (t, t)
            best = None
            for i in range(t, d):
                for j in range(t, d):
                    if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:  # pragma: no cover - excluded by regularity
                raise SingularMatrixError("singular pattern matrix")
            i0, j0 = best
            if i0 != t:
                A[t], A[i0] = A[i0], A[t]
                for row in Q:
                    row[t], row[i0] = row[i0], row[t]
            if j0 != t:
                for row in A:
                    row[t], row[j0] = row[j0], row[t]
                R[t], R[j0] = R[j0], R[t]
            p = A[t][t]
            clean = True
            for i in range(t + 1, d):
                q = A[i][t] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    for row in Q:
                        row[t] += q * row[i]
                if A[i][t]:
                    clean = False
            for j in range(t + 1, d):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                    R[t] = [a + q * b for a, b in zip(R[t], R[j])]
                if A[t][j]:
                    clean = False
            if clean:
                bad = next((i for i in range(t + 1, d)
                            for j in range(t + 1, d) if A[i][j] % p), None)
                if bad is not None:
                    A[t] = [a + b for a, b in zip(A[t], A[bad])]
                    for row in Q:
                        row[bad] -= row[t]
                    clean = False
            if clean:
                break
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            for row in Q:
                row[t] = -row[t]

    return SmithDecomposition(
        Q=tuple(tuple(r) for r in Q),
        divisors=tuple(A[i][i] for i in range(d)),
        R=tuple(tuple(r) for r in R),
    )


def reduce_mod_unit(v):
    """Representative of ``v`` modulo 1 in ``[-1/2, 1/2)``, componentwise.

    Exact for ``Fraction`` and ``int`` input; floats and numpy arrays are
    reduced in floating point.
    """
    if isinstance(v, np.ndarray):
        return v - np.floor(v + 0.5)
    if isinstance(v, float):
        return v - math.floor(v + 0.5)
    if isinstance(v, (int, Fraction)):
        v = Fraction(v)
        return v - math.floor(v + Fraction(1, 2))
    return tuple(reduce_mod_unit(x) for x in v)


def _reduce_numerators(num, D):
    """Reduce integer numerators over ``D`` into ``[-1/2, 1/2)``."""
    h = D // 2
    return (num + h) % D - h


def _lattice_numerators(Rinv, divisors):
    """Numerators over ``D = divisors[-1]`` of ``R^{-1} E^{-1} lam`` for all ``lam``."""
    d = len(divisors)
    active = [j for j in range(d) if divisors[j] > 1]
    D = divisors[-1] if active else 1
    shape = tuple(divisors[j] for j in active)
    m = int(np.prod(shape)) if shape else 1

    big = max((abs(x) for r in Rinv for x in r), default=1) * D * d >= 2 ** 62
    dtype = object if big else np.int64
    Rinv_a = np.array(Rinv, dtype=dtype)
    if not active:
        return np.zeros((1, d), dtype=dtype), np.zeros((1, 0), dtype=np.int64), D, shape
    lam = np.indices(shape).reshape(len(active), m).T.astype(np.int64)
    scale = np.array([D // divisors[j] for j in active], dtype=dtype)
    num = (lam.astype(dtype) * scale) @ Rinv_a[:, active].T
    return _reduce_numerators(num, D), lam, D, shape


@dataclass(frozen=True, eq=False)
class GeneratingSet:
    """Integer frequencies ``G(M^T) = M^T P(M^T)`` in pattern order.

    Attributes
    ----------
    frequencies : (m, d) int array
        Symmetric representatives, row ``i`` pairs with pattern point ``i``
        under the Fourier matrix.
    basis : (d_M, d) int array
        Unreduced basis vectors ``R^T e_j`` of the active divisors.
    """

    matrix: PatternMatrix
    frequencies: np.ndarray
    basis: np.ndarray

    def __len__(self):
        return len(self.frequencies)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(x) for x in h): i for i, h in enumerate(self.frequencies)}


@dataclass(frozen=True, eq=False)
class Pattern:
    """Ordered sample points of ``P(M)`` with their Smith addressing.

    Attributes
    ----------
    matrix, snf
        The defining matrix and its Smith decomposition.
    numerators : (m, d) int array
        Points times ``denominator``, reduced into ``[-D/2, D/2)``.
    denominator : int
        Common denominator ``D = e_d``.
    lambdas : (m, d_M) int array
        Addressing coefficients ``lam_j`` of each point.
    divisors : tuple
        Elementary divisors larger than one; also the FFT lengths.
    """

    matrix: PatternMatrix
    snf: SmithDecomposition
    numerators: np.ndarray
    denominator: int
    lambdas: np.ndarray
    divisors: tuple[int, ...]
    basis_numerators: np.ndarray

    @property
    def d(self) -> int:
        return self.matrix.d

    @property
    def m(self) -> int:
        return len(self.numerators)

    @property
    def dim(self) -> int:
        """Pattern dimension ``d_M``."""
        return len(self.divisors)

    @property
    def is_rank1(self) -> bool:
        return self.dim == 1

    @cached_property
    def coords(self) -> np.ndarray:
        """Points as floats, shape ``(m, d)``."""
        return np.asarray(self.numerators, dtype=float) / self.denominator

    @property
    def points(self) -> list[tuple[Fraction, ...]]:
        D = self.denominator
        return [tuple(Fraction(int(x), D) for x in row) for row in self.numerators]

    @property
    def basis(self) -> list[tuple[Fraction, ...]]:
        """Pattern basis vectors ``y_j`` reduced into the symmetric cell."""
        D = self.denominator
        return [tuple(Fraction(int(x), D) for x in row) for row in self.basis_numerators]

    @cached_property
    def generating_set(self) -> GeneratingSet:
        return build_generating_set(self.matrix)

    @property
    def frequencies(self) -> np.ndarray:
        return self.generating_set.frequencies

    @cached_property
    def point_index(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(x) for x in row): i for i, row in enumerate(self.numerators)}

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Index of the pattern point whose lattice cell contains each ``x``.

        ``x`` is rounded in lattice coordinates, ``y = M^{-1} round(M x)``;
        used for rasterising fields.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        Ma = self.matrix.to_array().astype(float)
        z = np.rint(x @ Ma.T).astype(np.int64)
        Minv = np.array(_inverse_exact(self.matrix.entries), dtype=object)
        scaled = (Minv * self.denominator)
        if not all(Fraction(v).denominator == 1 for v in scaled.ravel()):
            raise AssertionError("denominator does not clear M^{-1}")  # pragma: no cover
        S = np.array([[int(v) for v in r] for r in scaled], dtype=np.int64)
        num = _reduce_numerators(z @ S.T, self.denominator)
        idx = self.point_index
        return np.array([idx[tuple(int(v) for v in row)] for row in num], dtype=np.int64)


def build_pattern(M) -> Pattern:
    """Enumerate ``P(M)`` in lambda-lexicographic order.

    >>> p = build_pattern([[8, -1], [0, 8]])
    >>> p.dim, p.m, p.divisors
    (1, 64, (64,))
    """
    M = as_pattern_matrix(M)
    snf = smith_normal_form(M)
    Rinv = [[int(x) for x in row] for row in _inverse_exact(snf.R)]
    num, lam, D, shape = _lattice_numerators(Rinv, snf.divisors)
    active = [j for j in range(M.d) if snf.divisors[j] > 1]
    basis = np.array([[Rinv[i][j] * (D // snf.divisors[j]) for i in range(M.d)]
                      for j in active], dtype=np.int64).reshape(len(active), M.d)
    return Pattern(
        matrix=M,
        snf=snf,
        numerators=num,
        denominator=D,
        lambdas=lam,
        divisors=shape,
        basis_numerators=_reduce_numerators(basis, D),
    )


def build_generating_set(M) -> GeneratingSet:
    """Frequencies ``h = M^T p`` for ``p`` in ``P(M^T)``, symmetric representatives.

    Uses the transposed decomposition ``M^T = R^T E Q^T`` so that row ``i``
    pairs with pattern point ``i``: ``h_i^T y_k = sum_j lam_ij lam_kj / e_j``
    modulo 1.
    """
    M = as_pattern_matrix(M)
    snf = smith_normal_form(M)
    QTinv = [[int(x) for x in row] for row in _inverse_exact(_transpose(snf.Q))]
    num, _, D, _ = _lattice_numerators(QTinv, snf.divisors)
    MT = np.array(M.T.entries, dtype=num.dtype)
    prod = num @ MT.T
    if np.any(prod % D):
        raise AssertionError("generating set is not integral")  # pragma: no cover
    freqs = np.asarray(prod // D, dtype=np.int64)
    active = [j for j in range(M.d) if snf.divisors[j] > 1]
    RT = np.array(snf.R, dtype=np.int64).T
    basis = RT[:, active].T.copy()
    return GeneratingSet(matrix=M, frequencies=freqs, basis=basis)


@lru_cache(maxsize=256)
def _cached_pattern(M: PatternMatrix) -> Pattern:
    return build_pattern(M)


def get_pattern(M) -> Pattern:
    """Cached :func:`build_pattern`; accepts a ``Pattern`` unchanged."""
    if isinstance(M, Pattern):
        return M
    return _cached_pattern(as_pattern_matrix(M))


# ---------------------------------------------------------------------------
# relations between patterns
# ---------------------------------------------------------------------------

def is_subpattern(N, M) -> bool:
    """True iff ``M = J N`` for an integer ``J``, i.e. ``P(N)`` lies in ``P(M)``."""
    N, M = as_pattern_matrix(N), as_pattern_matrix(M)
    if N.d != M.d:
        return False
    J = _matmul(M.entries, _inverse_exact(N.entries))
    return _is_integral(J)


def pattern_congruent(M1, M2) -> bool:
    """True iff ``M1 M2^{-1}`` is integral and unimodular (same point set)."""
    M1, M2 = as_pattern_matrix(M1), as_pattern_matrix(M2)
    if M1.d != M2.d or M1.m != M2.m:
        return False
    return _is_integral(_matmul(M1.entries, _inverse_exact(M2.entries)))


def hermite_representative(M) -> PatternMatrix:
    """Upper-triangular congruence-class representative of ``M``.

    Row operations only, so the pattern is unchanged. Diagonal entries are
    positive and the entries above each pivot lie in ``[0, pivot)``.
    """
    M = as_pattern_matrix(M)
    d = M.d
    A = [list(r) for r in M.entries]
    for j in range(d):
        while True:
            rows = [i for i in range(j, d) if A[i][j] != 0]
            piv = min(rows, key=lambda i: abs(A[i][j]))
            A[j], A[piv] = A[piv], A[j]
            done = True
            for i in range(j + 1, d):
                q = A[i][j] // A[j][j]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[j])]
                if A[i][j]:
                    done = False
            if done:
                break
        if A[j][j] < 0:
            A[j] = [-a for a in A[j]]
        for i in range(j):
            q = A[i][j] // A[j][j]
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[j])]
    return PatternMatrix(A)


def reorder_map(M1, M2) -> np.ndarray:
    """Permutation ``pi`` with ``points2[pi[i]] == points1[i]`` for congruent matrices."""
    if not pattern_congruent(M1, M2):
        raise ValueError("matrices are not pattern congruent")
    p1, p2 = get_pattern(M1), get_pattern(M2)
    D = p1.denominator * p2.denominator // gcd(p1.denominator, p2.denominator)
    s1, s2 = D // p1.denominator, D // p2.denominator
    idx2 = {tuple(int(x) * s2 for x in row): i for i, row in enumerate(p2.numerators)}
    return np.array([idx2[tuple(int(x) * s1 for x in row)] for row in p1.numerators],
                    dtype=np.int64)


def transformed_pattern(L, M) -> np.ndarray:
    """Points ``L y`` for ``y`` in ``P(M)``, shape ``(m, d)``."""
    L = np.asarray(L, dtype=float)
    p = get_pattern(M)
    if L.shape != (p.d, p.d):
        raise ValueError(f"L must be {p.d}x{p.d}")
    if abs(np.linalg.det(L)) < 1e-14 * max(1.0, np.abs(L).max() ** p.d):
        raise SingularMatrixError("transformation matrix L is singular")
    return p.coords @ L.T


def embed_3d(M) -> PatternMatrix:
    """Extend a 2x2 matrix to ``diag(M, 1)``; 3x3 input is returned unchanged."""
    M = as_pattern_matrix(M)
    if M.d == 3:
        return M
    if M.d != 2:
        raise ValueError("only 2x2 matrices can be embedded")
    (a, b), (c, e) = M.entries
    return PatternMatrix(((a, b, 0), (c, e, 0), (0, 0, 1)))
