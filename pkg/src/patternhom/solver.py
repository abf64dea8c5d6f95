"""Fixed-point (Basic Scheme) solver for periodic linear elasticity on patterns.

Strain and stress fields are ``(m, n)`` arrays of Mandel vectors in pattern
order. Each iteration

1. forms the polarization ``tau_y = (C_y - C0) : eps_y`` pointwise,
2. transforms it with :func:`patternhom.pattern_fft.fft`,
3. applies the Green operator of the reference medium at every nonzero
   frequency of ``G(M^T)`` and pins the zero frequency to the mean strain,
4. transforms back and keeps the real part.

The Green operator is evaluated on the raw integer frequencies; it is
homogeneous of degree zero, so the ``2 pi`` of the torus cancels.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import pattern_fft
from .lattice import Pattern, get_pattern
from .tensors import (IsotropicMaterial, SQRT2, isotropic_parameters,
                      isotropic_stiffness, mandel_pairs, mandel_to_stiffness,
                      n_mandel, to_mandel, from_mandel)

log = logging.getLogger(__name__)

__all__ = [
    "MaterialField",
    "ReferenceMedium",
    "SolverConfig",
    "SolveResult",
    "EffectiveTensor",
    "acoustic_tensor",
    "green_apply",
    "green_operator",
    "isotropic_green_operator",
    "choose_reference",
    "basic_scheme",
    "effective_action",
    "effective_tensor",
]


@dataclass
class MaterialField:
    """Piecewise-constant stiffness sampled on a pattern."""

    pattern: Pattern
    phase_index: np.ndarray
    phases: list

    def __post_init__(self):
        self.pattern = get_pattern(self.pattern)
        self.phase_index = np.asarray(self.phase_index, dtype=np.int64)
        self.phases = [np.asarray(C, dtype=float) for C in self.phases]
        if not self.phases:
            raise ValueError("empty phase table")
        if self.phase_index.shape != (self.pattern.m,):
            raise ValueError(f"phase_index must have {self.pattern.m} entries")
        if self.phase_index.min() < 0 or self.phase_index.max() >= len(self.phases):
            raise ValueError("phase id out of range")
        n = n_mandel(self.pattern.d)
        for C in self.phases:
            if C.shape != (n, n):
                raise ValueError(f"phase stiffness must be {n}x{n} Mandel matrices")

    @property
    def d(self) -> int:
        return self.pattern.d

    def counts(self) -> np.ndarray:
        return np.bincount(self.phase_index, minlength=len(self.phases))

    def stress(self, strain: np.ndarray) -> np.ndarray:
        out = np.empty_like(strain)
        for p, C in enumerate(self.phases):
            sel = self.phase_index == p
            out[sel] = strain[sel] @ C.T
        return out


@dataclass(frozen=True)
class ReferenceMedium:
    C0: np.ndarray
    lam0: float | None = None
    mu0: float | None = None

    @classmethod
    def isotropic(cls, lam0: float, mu0: float, d: int) -> "ReferenceMedium":
        C0 = isotropic_stiffness(IsotropicMaterial(lam0, mu0), d)
        return cls(C0, float(lam0), float(mu0))

    @property
    def d(self) -> int:
        return {3: 2, 6: 3, 1: 1}[self.C0.shape[0]]

    @property
    def is_isotropic(self) -> bool:
        return self.lam0 is not None


@dataclass
class SolverConfig:
    """Stopping rule of the fixed point.

    ``norm="field"`` divides the update norm by ``||eps^(0)||`` over the whole
    field (``sqrt(m) |e0|``), ``norm="point"`` by ``|e0|``.
    """

    tolerance: float = 1e-9
    max_iterations: int = 10000
    norm: str = "field"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.norm not in ("field", "point"):
            raise ValueError("norm must be 'field' or 'point'")


@dataclass
class SolveResult:
    strain: np.ndarray
    iterations: int
    residuals: list
    effective_action: np.ndarray
    converged: bool
    mean_deviation: float = 0.0
    imag_residue: float = 0.0
    mean_history: list = field(default_factory=list, repr=False)


@dataclass
class EffectiveTensor:
    tensor: np.ndarray
    asymmetry: float
    iterations: list
    converged: bool


# ---------------------------------------------------------------------------
# Green operator
# ---------------------------------------------------------------------------

def acoustic_tensor(C0, h) -> np.ndarray:
    """``A_ij = C0_ikjl h_k h_l`` for one or many frequencies ``h``."""
    full = mandel_to_stiffness(np.asarray(C0, dtype=float))
    h = np.asarray(h, dtype=float)
    return np.einsum("ikjl,...k,...l->...ij", full, h, h)


def _as_medium(C0) -> ReferenceMedium:
    if isinstance(C0, ReferenceMedium):
        return C0
    C0 = np.asarray(C0, dtype=float)
    iso = isotropic_parameters(C0)
    if iso is not None:
        return ReferenceMedium(C0, *iso)
    return ReferenceMedium(C0)


def green_apply(C0, h, tau_hat, fast: bool = False) -> np.ndarray:
    """Strain fluctuation coefficient for one nonzero frequency.

    Returns ``-sym(h w^T)`` with ``A(h) w = tau_hat h`` (Mandel in and out).
    ``fast`` uses the closed-form inverse of the isotropic acoustic tensor.
    """
    med = _as_medium(C0)
    h = np.asarray(h, dtype=float)
    if not np.any(h):
        raise ValueError("green_apply is undefined at the zero frequency")
    tau = from_mandel(np.asarray(tau_hat))
    t = tau @ h
    if fast:
        if not med.is_isotropic:
            raise ValueError("fast path needs an isotropic reference medium")
        hh = h @ h
        Ainv = (np.eye(len(h)) - (med.lam0 + med.mu0) / (med.lam0 + 2 * med.mu0)
                * np.outer(h, h) / hh) / (med.mu0 * hh)
        w = Ainv @ t
    else:
        A = acoustic_tensor(med.C0, h)
        try:
            w = np.linalg.solve(A, t)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("singular acoustic tensor") from exc
    hw = np.outer(h, w)
    return -to_mandel(0.5 * (hw + hw.T))


def _operator_from_inverse(H, Ainv, d):
    """Mandel matrices of ``tau -> -sym(h (Ainv tau h))`` for stacked ``h``."""
    pairs = mandel_pairs(d)
    w = np.array([1.0 if i == j else SQRT2 for i, j in pairs])
    n = len(pairs)
    G = np.zeros((len(H), n, n))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            # symmetrized over (i,j) and (k,l)
            g = (H[:, i] * Ainv[:, j, k] * H[:, l] + H[:, j] * Ainv[:, i, k] * H[:, l]
                 + H[:, i] * Ainv[:, j, l] * H[:, k] + H[:, j] * Ainv[:, i, l] * H[:, k]) / 4.0
            # off-diagonal tau components appear twice in the contraction
            mult = 1.0 if k == l else 2.0
            G[:, a, b] = -w[a] * g * mult / w[b]
    return G


def green_operator(C0, frequencies) -> np.ndarray:
    """Stacked Mandel matrices of the Green operator, ``(m, n, n)``.

    Row ``i`` maps ``tau_hat[i]`` to ``eps_hat[i]``. Zero frequencies get the
    zero matrix; the caller pins the mean. Uses a batched ``d x d`` inverse of
    the acoustic tensor, valid for any positive-definite ``C0``.
    """
    med = _as_medium(C0)
    H = np.asarray(frequencies, dtype=float)
    d = H.shape[1]
    nz = np.any(H != 0, axis=1)
    Ainv = np.zeros((len(H), d, d))
    Ainv[nz] = np.linalg.inv(acoustic_tensor(med.C0, H[nz]))
    return _operator_from_inverse(H, Ainv, d)


def isotropic_green_operator(lam0, mu0, frequencies) -> np.ndarray:
    """Same as :func:`green_operator` via the rank-one-update inverse."""
    H = np.asarray(frequencies, dtype=float)
    d = H.shape[1]
    hh = np.einsum("ij,ij->i", H, H)
    nz = hh > 0
    Ainv = np.zeros((len(H), d, d))
    c = (lam0 + mu0) / (lam0 + 2 * mu0)
    Hn = H[nz]
    Ainv[nz] = (np.eye(d) - c * np.einsum("ni,nj->nij", Hn, Hn) / hh[nz, None, None]) \
        / (mu0 * hh[nz, None, None])
    return _operator_from_inverse(H, Ainv, d)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def choose_reference(material: MaterialField) -> ReferenceMedium:
    """Midpoint reference medium.

    Isotropic phases: ``lam0``, ``mu0`` are the midpoints of the phase ranges.
    Otherwise ``lam0 = 0`` and ``2 mu0`` is the midpoint of the extreme Mandel
    eigenvalues over all phases.
    """
    params = [isotropic_parameters(C) for C in material.phases]
    d = material.d
    if all(p is not None for p in params):
        lams = [p[0] for p in params]
        mus = [p[1] for p in params]
        lam0 = 0.5 * (min(lams) + max(lams))
        mu0 = 0.5 * (min(mus) + max(mus))
        if mu0 > 0 and np.linalg.eigvalsh(isotropic_stiffness(IsotropicMaterial(lam0, mu0), d))[0] > 0:
            return ReferenceMedium.isotropic(lam0, mu0, d)
    eig = np.concatenate([np.linalg.eigvalsh(C) for C in material.phases])
    mu0 = 0.25 * (eig.min() + eig.max())
    return ReferenceMedium.isotropic(0.0, mu0, d)


def effective_action(strain, material: MaterialField) -> np.ndarray:
    """Average stress ``(1/m) sum_y C_y : eps_y``."""
    return material.stress(np.asarray(strain, dtype=float)).mean(axis=0)


def basic_scheme(material: MaterialField, e0, C0=None,
                 cfg: SolverConfig | None = None) -> SolveResult:
    """Run the fixed-point iteration for mean strain ``e0`` (Mandel vector).

    Stops when ``||eps_new - eps|| / ||eps^(0)|| <= cfg.tolerance`` or after
    ``cfg.max_iterations`` steps; in the latter case ``converged`` is False
    and the residual history is still returned.
    """
    cfg = cfg or SolverConfig()
    p = material.pattern
    e0 = np.asarray(e0, dtype=float)
    n = n_mandel(p.d)
    if e0.shape != (n,):
        raise ValueError(f"mean strain must be a Mandel vector of length {n}")
    med = choose_reference(material) if C0 is None else _as_medium(C0)
    if med.C0.shape != (n, n):
        raise ValueError("reference medium dimension does not match the pattern")

    if p.m > 1 and np.any(p.frequencies[0]):
        raise AssertionError("zero frequency must come first")  # pragma: no cover
    G = (isotropic_green_operator(med.lam0, med.mu0, p.frequencies)
         if med.is_isotropic else green_operator(med.C0, p.frequencies))
    dC = [C - med.C0 for C in material.phases]
    masks = [material.phase_index == k for k in range(len(dC))]

    eps = np.tile(e0, (p.m, 1))
    e0_norm = np.linalg.norm(e0)
    denom = e0_norm * (np.sqrt(p.m) if cfg.norm == "field" else 1.0)
    if denom == 0:
        denom = 1.0
    residuals, means = [], []
    imag_max, mean_dev = 0.0, 0.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        tau = np.empty_like(eps)
        for D, sel in zip(dC, masks):
            tau[sel] = eps[sel] @ D.T
        tau_hat = pattern_fft.fft(p, tau)
        eps_hat = np.einsum("hij,hj->hi", G, tau_hat)
        eps_hat[0] = e0
        new = pattern_fft.ifft(p, eps_hat)
        scale = max(np.abs(new.real).max(), 1e-300)
        imag_max = max(imag_max, float(np.abs(new.imag).max() / scale))
        new = new.real
        mean = new.mean(axis=0)
        means.append(mean)
        mean_dev = max(mean_dev, float(np.abs(mean - e0).max()))
        res = float(np.linalg.norm(new - eps) / denom)
        residuals.append(res)
        eps = new
        if res <= cfg.tolerance:
            converged = True
            break
    if not converged:
        log.warning("basic scheme stopped after %d iterations (residual %.3e)", it, residuals[-1])
    return SolveResult(
        strain=eps,
        iterations=it,
        residuals=residuals,
        effective_action=effective_action(eps, material),
        converged=converged,
        mean_deviation=mean_dev,
        imag_residue=imag_max,
        mean_history=means,
    )


def effective_tensor(material: MaterialField, C0=None,
                     cfg: SolverConfig | None = None) -> EffectiveTensor:
    """Assemble ``C_eff`` column by column from unit Mandel loadings.

    The returned tensor is symmetrized; the relative asymmetry beforehand is
    kept as a diagnostic.
    """
    n = n_mandel(material.d)
    cols, iters, ok = [], [], True
    for k in range(n):
        e0 = np.zeros(n)
        e0[k] = 1.0
        res = basic_scheme(material, e0, C0, cfg)
        cols.append(res.effective_action)
        iters.append(res.iterations)
        ok = ok and res.converged
    C = np.column_stack(cols)
    asym = float(np.linalg.norm(C - C.T) / np.linalg.norm(C))
    if asym > 1e-8:
        log.info("effective tensor asymmetry %.3e before symmetrization", asym)
    return EffectiveTensor(0.5 * (C + C.T), asym, iters, ok)
