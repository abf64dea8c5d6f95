"""Analytic reference microstructures: periodic laminate and coated ellipsoid.

All geometries live in the unit cell ``[-1/2, 1/2)^d``. Tensors are Mandel
vectors / matrices as in :mod:`patternhom.tensors`.

The coated ellipsoid is always a three-dimensional structure. An elliptic
cylinder (``c3 = inf``) is sampled on a pattern with a single point in the
``x3`` direction; 2x2 pattern matrices are embedded as ``diag(M, 1)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy import integrate

from .lattice import embed_3d, get_pattern
from .solver import MaterialField
from .tensors import (IsotropicMaterial, SingularTensorError, from_mandel,
                      identity4, invert, isotropic_stiffness, max_eigenvalue,
                      stiffness_to_mandel, to_mandel)

log = logging.getLogger(__name__)

__all__ = [
    "LaminateSpec",
    "HashinSpec",
    "HomogeneousSpec",
    "Region",
    "laminate_phase",
    "laminate_interaction",
    "laminate_effective",
    "laminate_strains",
    "ellipsoidal_radius",
    "depolarization",
    "depolarization_closed_form",
    "rotation_from_axis",
    "hashin_classify",
    "hashin_macroscopic_strain",
    "hashin_effective_action",
    "hashin_strain",
    "default_matrix_material",
    "sample_material",
    "analytic_strain",
    "analytic_action",
    "default_loading",
]


# ---------------------------------------------------------------------------
# homogeneous
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousSpec:
    material: IsotropicMaterial
    d: int = 2


# ---------------------------------------------------------------------------
# laminate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaminateSpec:
    """Two isotropic layers stacked along the integer direction ``g``.

    Phase 1 occupies ``{x : (g.x mod 1) in [0, f1)}``.
    """

    normal_int: tuple
    f1: float
    mat1: IsotropicMaterial
    mat2: IsotropicMaterial

    def __post_init__(self):
        g = tuple(int(v) for v in self.normal_int)
        if any(int(v) != v for v in self.normal_int):
            raise ValueError("lamination direction must be an integer vector")
        object.__setattr__(self, "normal_int", g)
        if not any(g):
            raise ValueError("lamination direction must be nonzero")
        if reduce(math.gcd, (abs(v) for v in g)) != 1:
            raise ValueError(f"lamination direction {g} must have coprime entries")
        if not 0 < self.f1 < 1:
            raise ValueError("volume fraction f1 must lie in (0, 1)")

    @property
    def d(self) -> int:
        return len(self.normal_int)

    @property
    def f2(self) -> float:
        return 1.0 - self.f1

    @property
    def n(self) -> np.ndarray:
        g = np.asarray(self.normal_int, dtype=float)
        return g / np.linalg.norm(g)

    def stiffnesses(self):
        return (isotropic_stiffness(self.mat1, self.d), isotropic_stiffness(self.mat2, self.d))


def laminate_phase(x, spec: LaminateSpec):
    """Phase id (1 or 2) of point(s) ``x``; vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    t = np.mod(x @ np.asarray(spec.normal_int, dtype=float), 1.0)
    out = np.where(t < spec.f1, 1, 2)
    return int(out) if out.ndim == 0 else out


def _laminate_phase_exact(numerators, D, spec: LaminateSpec) -> np.ndarray:
    """Phase ids of pattern points given as integer numerators over ``D``."""
    f = Fraction(spec.f1)
    t = (numerators.astype(object) @ np.array(spec.normal_int, dtype=object)) % D
    # t / D < p / q  <=>  t q < p D
    return np.array([1 if ti * f.denominator < f.numerator * D else 2 for ti in t],
                    dtype=np.int64)


def laminate_interaction(n) -> np.ndarray:
    """``T_ijkl = 1/2 (n_i d_jk n_l + n_i d_jl n_k + n_j d_ik n_l + n_j d_il n_k) - n_i n_j n_k n_l``."""
    n = np.asarray(n, dtype=float)
    I = np.eye(len(n))
    T = 0.5 * (np.einsum("i,jk,l->ijkl", n, I, n) + np.einsum("i,jl,k->ijkl", n, I, n)
               + np.einsum("j,ik,l->ijkl", n, I, n) + np.einsum("j,il,k->ijkl", n, I, n)) \
        - np.einsum("i,j,k,l->ijkl", n, n, n, n)
    return stiffness_to_mandel(T)


def laminate_effective(spec: LaminateSpec, sigma0: float | None = None) -> np.ndarray:
    """Effective stiffness of the laminate (Mandel matrix).

    ``sigma0`` defaults to twice the largest phase eigenvalue and must exceed
    it so that every ``sigma0 I - C_p`` is invertible.
    """
    C1, C2 = spec.stiffnesses()
    sigma = max(max_eigenvalue(C1), max_eigenvalue(C2))
    if sigma0 is None:
        sigma0 = 2.0 * sigma
    if sigma0 <= sigma:
        raise ValueError(f"sigma0 = {sigma0} must exceed the largest phase eigenvalue {sigma}")
    Id = identity4(spec.d)
    T = laminate_interaction(spec.n)
    try:
        S1 = sigma0 * invert(sigma0 * Id - C1)
        S2 = sigma0 * invert(sigma0 * Id - C2)
        rhs = spec.f1 * invert(S1 - T) + spec.f2 * invert(S2 - T)
        S = invert(rhs) + T
        C = sigma0 * Id - sigma0 * invert(S)
    except SingularTensorError as exc:
        raise SingularTensorError(f"{exc}; try a larger sigma0") from exc
    return 0.5 * (C + C.T)


def laminate_strains(spec: LaminateSpec, e0):
    """Constant phase strains ``(eps1, eps2)`` of the laminate under mean strain ``e0``.

    Uses the lamination conditions ``eps2 - eps1 = sym(a n)``,
    ``C1 eps1 n = C2 eps2 n`` and ``f1 eps1 + f2 eps2 = e0``. Writing
    ``eps1 = e0 - f2 sym(a n)``, ``eps2 = e0 + f1 sym(a n)`` leaves the
    ``d x d`` system ``K a = ((C1 - C2) e0) n`` with ``K`` the acoustic
    tensor of ``f2 C1 + f1 C2``.
    """
    from .solver import acoustic_tensor

    e0 = np.asarray(e0, dtype=float)
    C1, C2 = spec.stiffnesses()
    n = spec.n
    K = acoustic_tensor(spec.f2 * C1 + spec.f1 * C2, n)
    rhs = from_mandel((C1 - C2) @ e0) @ n
    try:
        a = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("degenerate laminate moduli") from exc
    an = np.outer(a, n)
    jump = to_mandel(0.5 * (an + an.T))
    return e0 - spec.f2 * jump, e0 + spec.f1 * jump


# ---------------------------------------------------------------------------
# coated ellipsoid
# ---------------------------------------------------------------------------

class Region(IntEnum):
    CORE = 0
    COATING = 1
    MATRIX = 2


def _axes(c):
    c = tuple(float(v) for v in c)
    if len(c) == 2:
        c = c + (math.inf,)
    if len(c) != 3:
        raise ValueError("semi-axis parameters need three entries (c3 may be inf)")
    return c


def _finite(c):
    return [v for v in c if math.isfinite(v)]


def _g(c, rho):
    """``g(rho) = prod (c_i^2 + rho)`` over the finite semi-axes."""
    rho = np.asarray(rho, dtype=float)
    out = np.ones_like(rho)
    for ci in _finite(c):
        out = out * (ci * ci + rho)
    return out


@dataclass(frozen=True)
class HashinSpec:
    """Confocal coated ellipsoid with a neutral-inclusion matrix.

    ``c`` holds ``c1 <= c2 <= c3`` (``c3`` may be ``inf``); ``n`` is the
    direction of the shortest semi-axis. ``matrix_material`` is a 6x6 Mandel
    stiffness; ``None`` selects :func:`default_matrix_material`.
    """

    c: tuple
    rho_c: float
    rho_e: float
    n: tuple
    core: IsotropicMaterial
    coating: IsotropicMaterial
    matrix_material: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        c = _axes(self.c)
        object.__setattr__(self, "c", c)
        if not (0 <= c[0] <= c[1] <= c[2]) or not math.isfinite(c[1]):
            raise ValueError("semi-axes must satisfy 0 <= c1 <= c2 <= c3 with c2 finite")
        if not -c[0] ** 2 < self.rho_c < self.rho_e:
            raise ValueError("need -c1^2 < rho_c < rho_e")
        outer = math.sqrt(max(_finite(c)) ** 2 + self.rho_e)
        if outer >= 0.5:
            raise ValueError("exterior ellipsoid does not fit into the unit cell")
        n = np.zeros(3)
        raw = np.asarray(self.n, dtype=float)
        n[: len(raw)] = raw
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ValueError("orientation vector must be nonzero")
        if abs(norm - 1) > 1e-12:
            log.warning("orientation vector normalized (norm %.6g)", norm)
        object.__setattr__(self, "n", tuple(n / norm))
        if math.isclose(self.core.kappa, self.coating.kappa, rel_tol=1e-14, abs_tol=0.0):
            raise ValueError("neutral-inclusion construction undefined for kappa_c = kappa_e")
        if self.matrix_material is not None:
            Cm = np.asarray(self.matrix_material, dtype=float)
            if Cm.shape != (6, 6):
                raise ValueError("matrix_material must be a 6x6 Mandel matrix")
            object.__setattr__(self, "matrix_material", Cm)

    @property
    def d(self) -> int:
        return 3

    @property
    def shape_class(self) -> str:
        c1, c2, c3 = self.c
        if math.isinf(c3):
            return "cylinder"
        if c1 == c2:
            return "prolate"
        if c2 == c3:
            return "oblate"
        return "general"

    @property
    def rotation(self) -> np.ndarray:
        return rotation_from_axis(self.n)

    def f(self, rho):
        return np.sqrt(_g(self.c, self.rho_c) / _g(self.c, rho))

    @property
    def volume_fraction(self) -> float:
        """Core fraction of the coated ellipsoid, ``f(rho_e)``."""
        return float(self.f(self.rho_e))

    @property
    def alpha(self) -> float:
        ke, me, kc = self.coating.kappa, self.coating.mu, self.core.kappa
        return (3 * ke + 4 * me) / (9 * (kc - ke))

    def stiffnesses(self):
        Cm = self.matrix_material if self.matrix_material is not None \
            else default_matrix_material(self)
        return [isotropic_stiffness(self.core, 3), isotropic_stiffness(self.coating, 3), Cm]


def ellipsoidal_radius(x, c, return_flag: bool = False, tol: float = 1e-12):
    """Largest root ``rho >= -c1^2`` of ``sum x_i^2 / (c_i^2 + rho) = 1``.

    ``x`` has shape ``(..., 3)`` (or ``(..., 2)`` for cylinders); the terms
    with ``c_i = inf`` are dropped. Safeguarded Newton on the bracket
    ``[-c1^2, |x|^2]``: the function is convex and decreasing, so Newton steps
    taken from the left end never overshoot the root. Points with no root
    above ``-c1^2`` (the centre, or the focal segment) get ``-c1^2``; with
    ``return_flag`` a boolean mask of those points is returned as well.
    """
    c = _axes(c)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    X = np.atleast_2d(x)
    keep = [i for i in range(min(3, X.shape[1])) if math.isfinite(c[i])]
    a = X[:, keep] ** 2
    cc = np.array([c[i] ** 2 for i in keep])

    def h(r, rows):
        return (a[rows] / (cc + r[:, None])).sum(axis=1) - 1.0

    def dh(r, rows):
        return -(a[rows] / (cc + r[:, None]) ** 2).sum(axis=1)

    base = -cc[0]
    # without the x1 term h stays finite at -c1^2; a non-positive value there
    # means no root lies above -c1^2
    if len(cc) > 1 and cc[1] > cc[0]:
        rest = (a[:, 1:] / (cc[1:] - cc[0])).sum(axis=1) - 1.0
    else:
        rest = np.where(a[:, 1:].sum(axis=1) > 0, np.inf, -1.0) if len(cc) > 1 else -np.ones(len(X))
    degenerate = (a[:, 0] == 0) & (rest <= 0)
    lo = np.full(len(X), base)
    hi = np.maximum(a.sum(axis=1), base + 1e-300)
    active = ~degenerate
    with np.errstate(divide="ignore", invalid="ignore"):  # h is infinite at the pole
        for _ in range(200):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            l, u = lo[idx], hi[idx]
            mid = 0.5 * (l + u)
            pos = h(mid, idx) > 0
            l = np.where(pos, mid, l)
            u = np.where(pos, u, mid)
            hl = h(l, idx)
            step = l - hl / dh(l, idx)
            l = np.where(np.isfinite(step) & (step > l) & (step <= u), step, l)
            lo[idx], hi[idx] = l, u
            done = (np.abs(h(l, idx)) <= tol) | (u - l <= 4e-16 * np.maximum(1.0, np.abs(u)))
            active[idx[done]] = False
    rho = np.where(degenerate, base, lo)
    out = float(rho[0]) if scalar else rho
    if return_flag:
        return out, (bool(degenerate[0]) if scalar else degenerate)
    return out


_CLASSES = ("prolate", "oblate", "cylinder", "general")


def _check_class(c, cls):
    c1, c2, c3 = c
    ok = {
        "prolate": math.isfinite(c3) and c1 == c2,
        "oblate": math.isfinite(c3) and c2 == c3,
        "cylinder": math.isinf(c3),
        "general": True,
    }
    if cls not in ok:
        raise ValueError(f"unknown shape class {cls!r}; expected one of {_CLASSES}")
    if not ok[cls]:
        raise ValueError(f"semi-axes {c} are not of class {cls}")


def depolarization(c, rho, cls: str | None = None, tol: float = 1e-12) -> np.ndarray:
    """Depolarization factors ``(d1, d2, d3)`` at ellipsoidal radius ``rho``.

    Evaluated from the integral
    ``d_i = sqrt(g(rho))/2 * int_rho^inf dt / ((c_i^2 + t) sqrt(g(t)))``,
    with ``d3 = 0`` for cylinders. ``rho`` may be an array; the result then has
    shape ``rho.shape + (3,)``.
    """
    c = _axes(c)
    if cls is not None:
        _check_class(c, cls)
    rho = np.asarray(rho, dtype=float)
    flat = np.atleast_1d(rho).ravel()
    if np.any(flat <= -c[0] ** 2):
        raise ValueError("rho must exceed -c1^2")
    fin = _finite(c)
    cc = np.array(fin) ** 2
    # t = rho + s (1 - u) / u, s = l1(rho)^2, maps u in (0, 1] onto [rho, inf)
    s = cc[0] + flat
    sg = np.sqrt(_g(c, flat))

    def integrand(u):
        if u == 0.0:
            # t -> inf: only the cylinder case has a nonzero limit
            lim = np.zeros((len(flat), len(fin)))
            if len(fin) == 2:
                lim[:] = 1.0 / s[:, None]
            return (sg[:, None] * lim * s[:, None] / 2).ravel()
        t = flat + s * (1.0 - u) / u
        jac = s / (u * u)
        val = jac[:, None] / ((cc[None, :] + t[:, None]) * np.sqrt(_g(c, t))[:, None])
        return (sg[:, None] / 2 * val).ravel()

    res, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
    res = res.reshape(len(flat), len(fin))
    out = np.zeros((len(flat), 3))
    out[:, : len(fin)] = res
    return out[0] if rho.ndim == 0 else out.reshape(rho.shape + (3,))


def depolarization_closed_form(c, rho, cls: str) -> np.ndarray:
    """Closed-form depolarization factors for spheroids and elliptic cylinders.

    These are the standard expressions; they are kept as a cross-check of
    :func:`depolarization`.
    """
    c = _axes(c)
    _check_class(c, cls)
    rho = np.asarray(rho, dtype=float)
    l = [np.sqrt(ci * ci + rho) if math.isfinite(ci) else None for ci in c]
    if cls == "cylinder":
        d1 = l[1] / (l[0] + l[1])
        return np.stack([d1, 1 - d1, np.zeros_like(d1)], axis=-1)
    if cls == "prolate":
        delta = np.sqrt(1 - l[1] ** 2 / l[2] ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            d3 = np.where(delta > 1e-4,
                          (1 - delta**2) / delta**2 * (np.arctanh(delta) / delta - 1),
                          1 / 3 - 2 * delta**2 / 15)
        d1 = (1 - d3) / 2
        return np.stack([d1, d1, d3], axis=-1)
    if cls == "oblate":
        delta = np.sqrt(1 - l[0] ** 2 / l[1] ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            d1 = np.where(delta > 1e-4,
                          (1 - np.sqrt(1 - delta**2) / delta * np.arcsin(delta)) / delta**2,
                          1 / 3 + 2 * delta**2 / 15)
        d2 = (1 - d1) / 2
        return np.stack([d1, d2, d2], axis=-1)
    raise ValueError("no closed form for general ellipsoids")


def rotation_from_axis(n) -> np.ndarray:
    """Rotation taking ``e1`` to the unit vector ``n``.

    Three-component input gives a 3x3 matrix, two-component input the 2x2
    in-plane rotation.
    """
    n = np.asarray(n, dtype=float)
    d = len(n)
    norm = np.linalg.norm(n)
    if abs(norm - 1) > 1e-12:
        log.warning("rotation axis normalized (norm %.6g)", norm)
        n = n / norm
    if d == 2:
        return rotation_from_axis(np.array([n[0], n[1], 0.0]))[:2, :2]
    n1, n2, n3 = n
    s = n2 * n2 + n3 * n3
    if s < 1e-14:
        return np.eye(3) if n1 > 0 else np.diag([-1.0, -1.0, 1.0])
    R = np.array([[1, -n2, -n3], [n2, 1, 0], [n3, 0, 1]], dtype=float)
    R += (1 - n1) / s * np.array([[-s, 0, 0], [0, -n2 * n2, -n2 * n3], [0, -n2 * n3, -n3 * n3]])
    return R


def _local(x, spec: HashinSpec):
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    if X.shape[1] == 2:
        X = np.column_stack([X, np.zeros(len(X))])
    return X @ spec.rotation  # rows of R^T x


def hashin_classify(x, spec: HashinSpec):
    """Region of point(s) ``x``: core ``rho <= rho_c``, coating ``rho <= rho_e``, else matrix."""
    scalar = np.asarray(x).ndim == 1
    rho = ellipsoidal_radius(_local(x, spec), spec.c)
    reg = np.where(rho <= spec.rho_c, Region.CORE,
                   np.where(rho <= spec.rho_e, Region.COATING, Region.MATRIX))
    return Region(int(reg[0])) if scalar else reg.astype(np.int64)


def _rotate(spec, E):
    R = spec.rotation
    return R @ E @ R.T


def _D(spec, rho):
    return depolarization(spec.c, rho)


def hashin_macroscopic_strain(spec: HashinSpec) -> np.ndarray:
    """The loading ``eps0`` for which the coated ellipsoid is neutral (Mandel, d = 3)."""
    fe = spec.volume_fraction
    if not 0 < fe < 1:
        raise ValueError("core fraction f(rho_e) must lie in (0, 1)")
    S1f = _D(spec, spec.rho_c) - fe * _D(spec, spec.rho_e)  # (1 - f) S
    E = spec.alpha * np.eye(3) + np.diag(S1f)
    return to_mandel(_rotate(spec, E))


def hashin_effective_action(spec: HashinSpec) -> np.ndarray:
    """``C_eff : eps0`` for the neutral loading (Mandel, d = 3)."""
    fe = spec.volume_fraction
    if not 0 < fe < 1:
        raise ValueError("core fraction f(rho_e) must lie in (0, 1)")
    ke, me, kc = spec.coating.kappa, spec.coating.mu, spec.core.kappa
    S1f = _D(spec, spec.rho_c) - fe * _D(spec, spec.rho_e)
    iso = ke / (kc - ke) * (kc + 4 / 3 * me) + 4 / 3 * me * fe
    E = iso * np.eye(3) + 2 / 3 * me * (3 * np.diag(S1f) - (1 - fe) * np.eye(3))
    return to_mandel(_rotate(spec, E))


def default_matrix_material(spec: HashinSpec) -> np.ndarray:
    """Isotropic matrix stiffness reproducing the effective action on ``eps0``.

    The shear modulus is the coating's; the bulk modulus is fixed by the
    spherical parts, ``kappa_m = tr(C_eff eps0) / (3 tr eps0)``. With this
    choice ``C_m : eps0`` equals the effective action exactly.
    """
    e0 = from_mandel(hashin_macroscopic_strain(spec))
    s0 = from_mandel(hashin_effective_action(spec))
    tr = np.trace(e0)
    if abs(tr) < 1e-14:
        raise ValueError("eps0 is deviatoric; no isotropic matrix can match the effective action")
    kappa = np.trace(s0) / (3 * tr)
    return isotropic_stiffness(IsotropicMaterial.from_bulk_shear(kappa, spec.coating.mu), 3)


def hashin_strain(x, spec: HashinSpec) -> np.ndarray:
    """Analytic strain at point(s) ``x`` (Mandel, d = 3)."""
    scalar = np.asarray(x).ndim == 1
    xt = _local(x, spec)
    rho = ellipsoidal_radius(xt, spec.c)
    out = np.empty((len(xt), 6))
    core = rho <= spec.rho_c
    coat = ~core & (rho <= spec.rho_e)
    out[core] = to_mandel(_rotate(spec, spec.alpha * np.eye(3)))
    out[~core & ~coat] = hashin_macroscopic_strain(spec)
    if coat.any():
        r = rho[coat]
        X = xt[coat]
        fin = np.array([math.isfinite(ci) for ci in spec.c])
        cc = np.where(fin, np.array(spec.c) ** 2, 0.0)
        v = np.where(fin, X / (cc + r[:, None]), 0.0)
        g = _g(spec.c, r)
        q = v / np.sqrt(g)[:, None]
        grad = 2 * v / (v * v).sum(axis=1)[:, None]
        dyad = np.sqrt(_g(spec.c, spec.rho_c)) / 2 * np.einsum("ni,nj->nij", q, grad)
        dyad = 0.5 * (dyad + np.swapaxes(dyad, 1, 2))
        E = (spec.alpha * np.eye(3) + np.diag(_D(spec, spec.rho_c))
             - spec.f(r)[:, None, None] * np.einsum("ni,ij->nij", _D(spec, r), np.eye(3))
             + dyad)
        R = spec.rotation
        out[coat] = to_mandel(R @ E @ R.T)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _pattern_for(M, geom):
    p = get_pattern(M)
    if isinstance(geom, HashinSpec) and p.d == 2:
        p = get_pattern(embed_3d(p.matrix))
    if isinstance(geom, LaminateSpec) and p.d != geom.d:
        raise ValueError(f"laminate is {geom.d}-dimensional, pattern is {p.d}-dimensional")
    return p


def sample_material(M, geom) -> MaterialField:
    """Piecewise-constant stiffness of ``geom`` collocated at the pattern points.

    Phase tables: homogeneous ``[C]``; laminate ``[C1, C2]``; coated
    ellipsoid ``[core, coating, matrix]``.
    """
    p = _pattern_for(M, geom)
    if isinstance(geom, HomogeneousSpec):
        return MaterialField(p, np.zeros(p.m, dtype=np.int64),
                             [isotropic_stiffness(geom.material, p.d)])
    if isinstance(geom, LaminateSpec):
        ids = _laminate_phase_exact(p.numerators, p.denominator, geom) - 1
        C1, C2 = geom.stiffnesses()
        return MaterialField(p, ids, [C1, C2])
    if isinstance(geom, HashinSpec):
        return MaterialField(p, hashin_classify(p.coords, geom), geom.stiffnesses())
    raise TypeError(f"unsupported geometry {type(geom).__name__}")


def default_loading(geom, d: int | None = None) -> np.ndarray:
    """Mean strain used when none is given: unit uniaxial ``e1`` or the Hashin ``eps0``."""
    if isinstance(geom, HashinSpec):
        return hashin_macroscopic_strain(geom)
    d = geom.d if d is None else d
    e = np.zeros(d * (d + 1) // 2)
    e[0] = 1.0
    return e


def analytic_strain(M, geom, e0=None) -> np.ndarray:
    """Analytic strain field on the pattern of ``M`` (rows in pattern order)."""
    p = _pattern_for(M, geom)
    if isinstance(geom, HashinSpec):
        if e0 is not None and not np.allclose(e0, hashin_macroscopic_strain(geom), atol=1e-12):
            raise ValueError("the coated-ellipsoid solution is only known for its own eps0")
        return hashin_strain(p.coords, geom)
    e0 = default_loading(geom, p.d) if e0 is None else np.asarray(e0, dtype=float)
    if isinstance(geom, HomogeneousSpec):
        return np.tile(e0, (p.m, 1))
    if isinstance(geom, LaminateSpec):
        eps1, eps2 = laminate_strains(geom, e0)
        ids = _laminate_phase_exact(p.numerators, p.denominator, geom)
        return np.where((ids == 1)[:, None], eps1, eps2)
    raise TypeError(f"unsupported geometry {type(geom).__name__}")


def analytic_action(geom, e0=None, d: int | None = None) -> np.ndarray:
    """Exact ``C_eff : e0``."""
    if isinstance(geom, HashinSpec):
        return hashin_effective_action(geom)
    e0 = default_loading(geom, d) if e0 is None else np.asarray(e0, dtype=float)
    if isinstance(geom, HomogeneousSpec):
        return isotropic_stiffness(geom.material, {1: 1, 3: 2, 6: 3}[len(e0)]) @ e0
    if isinstance(geom, LaminateSpec):
        return laminate_effective(geom) @ e0
    raise TypeError(f"unsupported geometry {type(geom).__name__}")

