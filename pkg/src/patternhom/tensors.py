"""Symmetric tensor algebra in Mandel notation.

Second-order symmetric tensors are stored as ``d(d+1)/2`` vectors

    d = 2: (e11, e22, sqrt2 e12)
    d = 3: (e11, e22, e33, sqrt2 e23, sqrt2 e13, sqrt2 e12)

and fourth-order tensors with minor symmetries as the matching symmetric
matrices. The flattening is orthonormal, so double contraction, inversion
and eigenvalues are plain linear algebra on the flattened arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SQRT2",
    "mandel_pairs",
    "n_mandel",
    "to_mandel",
    "from_mandel",
    "stiffness_to_mandel",
    "mandel_to_stiffness",
    "IsotropicMaterial",
    "isotropic_stiffness",
    "isotropic_parameters",
    "identity4",
    "contract",
    "invert",
    "max_eigenvalue",
    "transform_stiffness",
    "transform_strain",
    "SingularTensorError",
]

SQRT2 = np.sqrt(2.0)

_PAIRS = {
    1: [(0, 0)],
    2: [(0, 0), (1, 1), (0, 1)],
    3: [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)],
}


class SingularTensorError(np.linalg.LinAlgError):
    pass


def mandel_pairs(d: int) -> list[tuple[int, int]]:
    return _PAIRS[d]


def n_mandel(d: int) -> int:
    return d * (d + 1) // 2


def _dim_from_n(n: int) -> int:
    return {1: 1, 3: 2, 6: 3}[n]


def _weights(d):
    return np.array([1.0 if i == j else SQRT2 for i, j in _PAIRS[d]])


def to_mandel(e) -> np.ndarray:
    """``(..., d, d)`` symmetric matrices to ``(..., n)`` Mandel vectors."""
    e = np.asarray(e)
    d = e.shape[-1]
    I, J = zip(*_PAIRS[d])
    return e[..., I, J] * _weights(d)


def from_mandel(v) -> np.ndarray:
    v = np.asarray(v)
    d = _dim_from_n(v.shape[-1])
    out = np.zeros(v.shape[:-1] + (d, d), dtype=v.dtype)
    w = _weights(d)
    for a, (i, j) in enumerate(_PAIRS[d]):
        out[..., i, j] = v[..., a] / w[a]
        out[..., j, i] = v[..., a] / w[a]
    return out


def stiffness_to_mandel(C) -> np.ndarray:
    """Full ``(d, d, d, d)`` tensor to its ``(n, n)`` Mandel matrix."""
    C = np.asarray(C)
    d = C.shape[0]
    pairs = _PAIRS[d]
    w = _weights(d)
    out = np.empty((len(pairs), len(pairs)), dtype=C.dtype)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            out[a, b] = w[a] * w[b] * C[i, j, k, l]
    return out


def mandel_to_stiffness(Cm) -> np.ndarray:
    Cm = np.asarray(Cm)
    d = _dim_from_n(Cm.shape[-1])
    w = _weights(d)
    out = np.zeros((d, d, d, d), dtype=Cm.dtype)
    for a, (i, j) in enumerate(_PAIRS[d]):
        for b, (k, l) in enumerate(_PAIRS[d]):
            v = Cm[a, b] / (w[a] * w[b])
            for p, q in {(i, j), (j, i)}:
                for r, s in {(k, l), (l, k)}:
                    out[p, q, r, s] = v
    return out


@dataclass(frozen=True)
class IsotropicMaterial:
    """Lamé parameters of an isotropic phase.

    ``kappa`` uses the three-dimensional convention ``lam + 2 mu / 3``.
    """

    lam: float
    mu: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"shear modulus must be non-negative, got {self.mu}")

    @property
    def kappa(self) -> float:
        return self.lam + 2.0 * self.mu / 3.0

    @classmethod
    def from_bulk_shear(cls, kappa: float, mu: float) -> "IsotropicMaterial":
        return cls(kappa - 2.0 * mu / 3.0, mu)

    def stiffness(self, d: int) -> np.ndarray:
        return isotropic_stiffness(self, d)


def isotropic_stiffness(mat: IsotropicMaterial, d: int) -> np.ndarray:
    """Mandel matrix of ``lam I(x)I + 2 mu I_sym``."""
    n = n_mandel(d)
    vol = np.zeros(n)
    vol[:d] = 1.0
    return mat.lam * np.outer(vol, vol) + 2.0 * mat.mu * np.eye(n)


def isotropic_parameters(C, atol: float = 1e-12):
    """``(lam, mu)`` if the Mandel matrix ``C`` is isotropic, else ``None``."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    d = _dim_from_n(n)
    mu = C[-1, -1] / 2.0 if d > 1 else C[0, 0] / 2.0
    lam = C[0, 1] if d > 1 else 0.0
    ref = isotropic_stiffness(IsotropicMaterial(lam, max(mu, 0.0)), d)
    scale = max(1.0, np.abs(C).max())
    if mu >= 0 and np.allclose(C, ref, rtol=0, atol=atol * scale):
        return lam, mu
    return None


def identity4(d: int) -> np.ndarray:
    """Identity on symmetric tensors (Mandel)."""
    return np.eye(n_mandel(d))


def contract(C, e) -> np.ndarray:
    """``C : e``; ``e`` may carry leading field axes."""
    return np.asarray(e) @ np.asarray(C).T


def invert(C) -> np.ndarray:
    """Inverse on the space of symmetric tensors.

    Raises ``SingularTensorError`` carrying the condition estimate when the
    Mandel matrix is numerically singular.
    """
    C = np.asarray(C, dtype=float)
    cond = np.linalg.cond(C)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularTensorError(f"tensor is singular (condition estimate {cond:.3e})")
    return np.linalg.inv(C)


def max_eigenvalue(C) -> float:
    return float(np.linalg.eigvalsh(0.5 * (np.asarray(C) + np.asarray(C).T))[-1])


def transform_stiffness(A, C) -> np.ndarray:
    """``C~_ijkl = A_im A_jn A_ko A_lp C_mnop`` in Mandel form."""
    A = np.asarray(A, dtype=float)
    full = mandel_to_stiffness(C)
    out = np.einsum("im,jn,ko,lp,mnop->ijkl", A, A, A, A, full, optimize=True)
    return stiffness_to_mandel(out)


def transform_strain(A, e0) -> np.ndarray:
    """``A^{-T} e0 A^{-1}`` in Mandel form."""
    Ainv = np.linalg.inv(np.asarray(A, dtype=float))
    E = from_mandel(e0)
    return to_mandel(Ainv.T @ E @ Ainv)
