import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, strategies as st


def _det(rows):
    return round(np.linalg.det(np.array(rows, dtype=float)))


@st.composite
def regular_matrices(draw, d=None, max_entry=8, max_det=64):
    d = draw(st.sampled_from([2, 3])) if d is None else d
    rows = draw(st.lists(st.lists(st.integers(-max_entry, max_entry), min_size=d, max_size=d),
                         min_size=d, max_size=d))
    det = _det(rows)
    assume(det != 0 and abs(det) <= max_det)
    return rows


def frac_inverse(rows):
    """Exact inverse by Gauss-Jordan over Fractions."""
    n = len(rows)
    A = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [v / piv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [r[n:] for r in A]


def sym_mod(x: Fraction) -> Fraction:
    return x - ((x + Fraction(1, 2)).__floor__())


def brute_pattern(rows):
    """P(M) by enumerating z in a box of side |det| and reducing M^{-1} z mod 1."""
    d = len(rows)
    det = _det(rows)
    m = abs(det)
    adj = np.array([[int(v * det) for v in r] for r in frac_inverse(rows)], dtype=np.int64)
    Z = np.array(list(itertools.product(range(m), repeat=d)), dtype=np.int64).T
    num = (adj @ Z) * np.sign(det) % m
    num = np.where(2 * num >= m, num - m, num)
    return {tuple(Fraction(int(v), m) for v in col) for col in np.unique(num.T, axis=0)}


def brute_generating_set(rows):
    """G(M^T) = M^T P(M^T) with symmetric representatives of P(M^T)."""
    MT = [list(r) for r in zip(*rows)]
    d = len(rows)
    out = set()
    for p in brute_pattern(MT):
        h = tuple(sum(MT[i][j] * p[j] for j in range(d)) for i in range(d))
        assert all(v.denominator == 1 for v in h)
        out.add(tuple(int(v) for v in h))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
