import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patternhom import pattern_fft as pf
from patternhom.lattice import get_pattern, reorder_map

from conftest import regular_matrices


def oracle_dft(M, a):
    """(1/m) sum_y a_y exp(-2 pi i h.y) with phases h.y reduced exactly."""
    p = get_pattern(M)
    out = np.zeros((p.m,) + a.shape[1:], dtype=complex)
    for r, h in enumerate(p.frequencies):
        for c, y in enumerate(p.points):
            ph = sum(Fraction(int(hi)) * yi for hi, yi in zip(h, y)) % 1
            out[r] += cmath.exp(-2j * cmath.pi * float(ph)) * a[c]
    return out / p.m


def random_field(rng, m, comps=()):
    shape = (m,) + comps
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@settings(max_examples=30, deadline=None)
@given(regular_matrices(max_det=64), st.integers(0, 2**32 - 1))
def test_fft_matches_oracle(rows, seed):
    rng = np.random.default_rng(seed)
    p = get_pattern(rows)
    a = random_field(rng, p.m)
    ref = oracle_dft(rows, a)
    assert np.abs(pf.dft_matrix_apply(rows, a) - ref).max() <= 1e-12 * np.abs(a).max()
    assert np.abs(pf.fft(rows, a) - ref).max() <= 1e-10 * np.abs(a).max()


@settings(max_examples=40, deadline=None)
@given(regular_matrices(max_det=256), st.integers(0, 2**32 - 1))
def test_round_trip_and_parseval(rows, seed):
    rng = np.random.default_rng(seed)
    p = get_pattern(rows)
    a = random_field(rng, p.m, (3,))
    ah = pf.fft(rows, a)
    assert np.abs(pf.ifft(rows, ah) - a).max() <= 1e-10 * np.abs(a).max()
    assert np.isclose((np.abs(a) ** 2).sum() / p.m, (np.abs(ah) ** 2).sum(), rtol=1e-10)


def test_constant_and_delta():
    M = "(5,2;-1,3)"
    p = get_pattern(M)
    ah = pf.fft(M, np.ones(p.m))
    assert np.isclose(ah[0], 1) and np.abs(ah[1:]).max() < 1e-14
    delta = np.zeros(p.m)
    delta[0] = 1
    assert np.allclose(pf.fft(M, delta), 1 / p.m)
    hat = np.zeros(p.m, dtype=complex)
    hat[0] = 2.5
    assert np.allclose(pf.ifft(M, hat), 2.5)


def test_single_point_pattern():
    a = np.array([[1.0, 2.0]])
    assert np.allclose(pf.fft("diag(1,1)", a), a)
    assert np.allclose(pf.ifft("diag(1,1)", a), a)


def test_size_mismatch():
    with pytest.raises(ValueError):
        pf.fft("diag(2,2)", np.ones(3))


def test_diag_is_plain_2d_dft(rng):
    p = get_pattern("diag(8,4)")
    a = rng.normal(size=p.m)
    grid = np.zeros((8, 4))
    idx = np.rint(p.coords * [8, 4]).astype(int)
    grid[idx[:, 0] % 8, idx[:, 1] % 4] = a
    ref = np.fft.fft2(grid) / 32
    got = pf.fft(p, a)
    h = p.frequencies
    assert np.allclose(got, ref[h[:, 0] % 8, h[:, 1] % 4], atol=1e-14)


def test_real_even_stays_real(rng):
    M = "(6,1;2,5)"
    f = pf.sample_function(M, lambda x: np.cos(2 * np.pi * (x @ [1, 2])) + 0.3)
    back = pf.ifft(M, pf.fft(M, f))
    assert np.abs(back.imag).max() < 1e-12


def test_exact_on_span_and_aliasing():
    M = "(8,-1;0,8)"
    p = get_pattern(M)
    h0 = tuple(int(v) for v in p.frequencies[5])
    f = pf.sample_function(M, lambda x: np.exp(2j * np.pi * x @ np.array(h0)))
    ah = pf.fft(M, f)
    expect = np.zeros(p.m)
    expect[5] = 1
    assert np.abs(ah - expect).max() < 1e-12
    MT = np.array(p.matrix.T.entries)
    k = np.array(h0) + MT @ np.array([2, -1])
    g = pf.sample_function(M, lambda x: np.exp(2j * np.pi * x @ k))
    assert np.abs(pf.fft(M, g) - expect).max() < 1e-12
    assert pf.fold_frequency(M, k) == h0


def test_aliasing_check_sums_folded():
    M = "diag(4,4)"
    p = get_pattern(M)
    coeffs = {(1, 0): 1.0, (5, 0): 2.0, (1, 4): -0.5, (0, 0): 3.0}
    out = pf.aliasing_check(M, coeffs)
    i = p.generating_set.index[(1, 0)]
    assert out[i] == pytest.approx(2.5)
    assert out[0] == pytest.approx(3.0)
    inside = {tuple(int(v) for v in h): 1.0 + n for n, h in enumerate(p.frequencies)}
    assert np.allclose(pf.aliasing_check(M, inside), 1.0 + np.arange(p.m))


def test_shift_property(rng):
    M = "(7,3;1,5)"
    p = get_pattern(M)
    coeff = {(1, 0): 1.0, (0, 2): 0.5j, (-3, 1): 0.25}

    def f(x):
        return sum(c * np.exp(2j * np.pi * x @ np.array(k)) for k, c in coeff.items())

    y0 = p.coords[7]
    a = pf.fft(M, pf.sample_function(M, f))
    b = pf.fft(M, pf.sample_function(M, lambda x: f(x - y0)))
    assert np.allclose(b, a * np.exp(-2j * np.pi * p.frequencies @ y0), atol=1e-12)


def test_congruent_matrices_same_values(rng):
    M1, M2 = "(8,0;0,4)", "(8,8;0,4)"
    pi = reorder_map(M1, M2)
    a1 = rng.normal(size=32)
    a2 = np.empty_like(a1)
    a2[pi] = a1
    v1, v2 = pf.fft(M1, a1), pf.fft(M2, a2)
    key = lambda z: (round(z.real, 10), round(z.imag, 10))
    assert sorted(map(key, v1)) == sorted(map(key, v2))


def test_fft_lengths():
    assert pf.fft_lengths("(8,-1;0,8)") == (64,)
    assert pf.fft_lengths("diag(8,4)") == (4, 8)
    assert pf.fft_lengths("(6,0;0,10)") == (2, 30)
