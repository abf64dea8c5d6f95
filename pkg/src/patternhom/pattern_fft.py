"""Discrete Fourier transform on patterns.

Fields are numpy arrays whose first axis runs over the ``m`` pattern points
(or generating-set frequencies) in the order fixed by :mod:`patternhom.lattice`;
any trailing axes are tensor components and are transformed independently.

The forward transform carries the factor ``1/m``,

    a_hat[h] = 1/m * sum_y a[y] * exp(-2 pi i h.y),

so ``a_hat[0]`` is the mean of the field. With the Smith addressing,
``h.y = sum_j mu_j lam_j / e_j (mod 1)``, hence the transform is an ordinary
``d_M``-dimensional DFT of lengths ``e_j`` on the reshaped array.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .lattice import (Pattern, _inverse_exact, get_pattern, reduce_mod_unit)

__all__ = [
    "fft_lengths",
    "dft_matrix",
    "dft_matrix_apply",
    "fft",
    "ifft",
    "sample_function",
    "aliasing_check",
    "fold_frequency",
]


def _check(p: Pattern, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 0 or a.shape[0] != p.m:
        raise ValueError(f"field has {a.shape[0] if a.ndim else 0} entries, pattern has {p.m}")
    return a


def fft_lengths(M) -> tuple[int, ...]:
    """Lengths of the multi-dimensional FFT executed for ``M`` (the divisors > 1)."""
    return get_pattern(M).divisors


def dft_matrix(M) -> np.ndarray:
    """Dense Fourier matrix ``(1/m) exp(-2 pi i h^T y)``, rows ``h``, columns ``y``.

    Phases are reduced exactly in integer arithmetic before exponentiation.
    """
    p = get_pattern(M)
    D = p.denominator
    H = p.frequencies.astype(object)
    ph = (H @ p.numerators.astype(object).T) % D
    return np.exp(-2j * np.pi * ph.astype(float) / D) / p.m


def dft_matrix_apply(M, a) -> np.ndarray:
    """O(m^2) transform by the dense matrix; reference for :func:`fft`."""
    p = get_pattern(M)
    a = _check(p, a)
    F = dft_matrix(p)
    return np.tensordot(F, a, axes=(1, 0))


def fft(M, a) -> np.ndarray:
    """Forward transform on ``P(M)``, output ordered like ``G(M^T)``."""
    p = get_pattern(M)
    a = _check(p, a)
    if p.dim == 0:
        return a.astype(complex)
    comp = a.shape[1:]
    arr = a.reshape(p.divisors + comp)
    out = np.fft.fftn(arr, axes=tuple(range(p.dim)))
    return out.reshape((p.m,) + comp) / p.m


def ifft(M, a_hat) -> np.ndarray:
    """Inverse of :func:`fft`; carries the factor ``m``."""
    p = get_pattern(M)
    a_hat = _check(p, a_hat)
    if p.dim == 0:
        return a_hat.astype(complex)
    comp = a_hat.shape[1:]
    arr = a_hat.reshape(p.divisors + comp)
    out = np.fft.ifftn(arr, axes=tuple(range(p.dim)))
    return out.reshape((p.m,) + comp) * p.m


def sample_function(M, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Evaluate ``f`` at the pattern points.

    ``f`` receives all points at once as an ``(m, d)`` array of coordinates in
    ``[-1/2, 1/2)^d`` and returns ``m`` values (optionally with trailing
    component axes).
    """
    p = get_pattern(M)
    return np.asarray(f(p.coords))


def fold_frequency(M, k) -> tuple[int, ...]:
    """The representative ``h`` in ``G(M^T)`` with ``k = h + M^T z``."""
    p = get_pattern(M)
    MT = p.matrix.T.entries
    MTinv = _inverse_exact(MT)
    q = [sum(MTinv[i][j] * int(k[j]) for j in range(p.d)) for i in range(p.d)]
    r = reduce_mod_unit(tuple(Fraction(x) for x in q))
    h = [sum(MT[i][j] * r[j] for j in range(p.d)) for i in range(p.d)]
    return tuple(int(x) for x in h)


def aliasing_check(M, coeffs: Mapping[tuple[int, ...], complex]) -> np.ndarray:
    """Discrete coefficients of a trigonometric polynomial by direct folding.

    Every frequency ``k`` of ``coeffs`` is added onto the generating-set
    frequency it aliases to. Used to validate ``fft(sample_function(...))``.
    """
    p = get_pattern(M)
    out = np.zeros(p.m, dtype=complex)
    index = p.generating_set.index
    for k, c in coeffs.items():
        out[index[fold_frequency(p, k)]] += c
    return out
