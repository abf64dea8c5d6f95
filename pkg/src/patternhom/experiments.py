"""Error metrics and the experiment families: shear sweeps, rotated grids, subsampling.

Every case samples a geometry on a pattern, runs the basic scheme and compares
against the analytic strain field and effective action of that geometry.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geometry import (HashinSpec, LaminateSpec, analytic_action, analytic_strain,
                       default_loading, sample_material)
from .lattice import PatternMatrix, as_pattern_matrix, get_pattern, hermite_representative
from .solver import SolveResult, SolverConfig, basic_scheme
from .tensors import IsotropicMaterial

__all__ = [
    "ErrorReport",
    "error_l2",
    "error_eff",
    "shear_matrix",
    "rotated_matrix",
    "default_laminate",
    "default_hashin",
    "run_case",
    "run_cases",
    "subsampling_matrices",
    "subsampling_suite",
    "shear_sweep",
    "hashin_table_cases",
    "hashin_table",
    "CSV_COLUMNS",
    "write_csv",
]

CSV_COLUMNS = ["label", "matrix", "j", "k", "alpha", "m", "d_M", "iterations",
               "e_l2", "e_eff", "wall_time_s", "converged", "congruence"]


@dataclass
class ErrorReport:
    label: str
    matrix: PatternMatrix
    iterations: int
    e_l2: float
    e_eff: float
    wall_time: float
    converged: bool = True
    j: int | None = None
    k: int | None = None
    alpha: int | None = None
    congruence: str = ""
    result: SolveResult | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.e_l2 < 0 or self.e_eff < 0:
            raise ValueError("errors must be non-negative")

    @property
    def m(self) -> int:
        return self.matrix.m

    @property
    def d_M(self) -> int:
        return get_pattern(self.matrix).dim

    def row(self) -> dict:
        return {
            "label": self.label,
            "matrix": self.matrix.compact(),
            "j": "" if self.j is None else self.j,
            "k": "" if self.k is None else self.k,
            "alpha": "" if self.alpha is None else self.alpha,
            "m": self.m,
            "d_M": self.d_M,
            "iterations": self.iterations,
            "e_l2": repr(float(self.e_l2)),
            "e_eff": repr(float(self.e_eff)),
            "wall_time_s": f"{self.wall_time:.4f}",
            "converged": int(self.converged),
            "congruence": self.congruence,
        }


def error_l2(numeric, analytic) -> float:
    """``||eps - eps~|| / ||eps~||`` over all points and components."""
    numeric = np.asarray(numeric, dtype=float)
    analytic = np.asarray(analytic, dtype=float)
    if numeric.shape != analytic.shape:
        raise ValueError(f"field shapes differ: {numeric.shape} vs {analytic.shape}")
    den = np.linalg.norm(analytic)
    if den == 0:
        raise ValueError("analytic field has zero norm")
    return float(np.linalg.norm(numeric - analytic) / den)


def error_eff(numeric_action, analytic_action) -> float:
    """Relative Euclidean error of the effective action (Mandel components)."""
    a = np.asarray(analytic_action, dtype=float)
    den = np.linalg.norm(a)
    if den == 0:
        raise ValueError("analytic effective action is zero")
    return float(np.linalg.norm(np.asarray(numeric_action, dtype=float) - a) / den)


# ---------------------------------------------------------------------------
# matrix families
# ---------------------------------------------------------------------------

def _pow2(e: int) -> int:
    if e < 0:
        raise ValueError("scale too large: negative exponent")
    return 2**e


def shear_matrix(j: int, k: int, alpha: int, scale: int = 0, dim: int = 2) -> PatternMatrix:
    """``(2^j, alpha k; (1 - alpha) k, 2^(14 - j))`` optionally shrunk by ``2^scale`` per axis.

    With ``scale = s`` the diagonal becomes ``2^(j-s), 2^(14-j-s)`` and the
    shear ``k / 2^s`` (which must be an integer), so the sampling directions
    are kept and the determinant drops by ``4^s``. ``dim = 3`` appends the
    trivial third axis.
    """
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    if k % (2**scale):
        raise ValueError(f"shear {k} is not divisible by 2^{scale}")
    ks = k // 2**scale
    a, b = _pow2(j - scale), _pow2(14 - j - scale)
    M = ((a, alpha * ks), ((1 - alpha) * ks, b))
    return _lift(M, dim)


def rotated_matrix(j: int, scale: int = 0, dim: int = 2) -> PatternMatrix:
    """``1/2 (1, 1; -1, 1) diag(2^j, 2^(14-j))``, the quincunx subsampling of ``diag``."""
    a, b = _pow2(j - scale), _pow2(14 - j - scale)
    if a % 2 or b % 2:
        raise ValueError("rotated matrix is not integral at this scale")
    return _lift(((a // 2, b // 2), (-a // 2, b // 2)), dim)


def _lift(M, dim):
    if dim == 2:
        return PatternMatrix(M)
    if dim == 3:
        (a, b), (c, d) = M
        return PatternMatrix(((a, b, 0), (c, d, 0), (0, 0, 1)))
    raise ValueError("dim must be 2 or 3")


# ---------------------------------------------------------------------------
# default geometries
# ---------------------------------------------------------------------------

def default_laminate(g=(2, 1), f1: float = 0.5, mat1=None, mat2=None) -> LaminateSpec:
    """Laminate with phase moduli ``(1, 1)`` and ``(10, 10)`` unless given."""
    return LaminateSpec(tuple(g), f1,
                        mat1 or IsotropicMaterial(1.0, 1.0),
                        mat2 or IsotropicMaterial(10.0, 10.0))


def default_hashin(coating=None, core=None, matrix_material=None) -> HashinSpec:
    """Elliptic cylinder ``c = (0.05, 0.35, inf)``, ``rho_c = 0``, ``rho_e = 0.09``,
    ``n ~ (1/2, 1, 0)``.

    Default moduli: coating ``(lam, mu) = (1, 1)``, core with three times the
    coating's bulk modulus and the same shear modulus.
    """
    coating = coating or IsotropicMaterial(1.0, 1.0)
    core = core or IsotropicMaterial.from_bulk_shear(3 * coating.kappa, coating.mu)
    n = np.array([0.5, 1.0, 0.0])
    return HashinSpec((0.05, 0.35, math.inf), 0.0, 0.09, tuple(n / np.linalg.norm(n)),
                      core, coating, matrix_material)


# ---------------------------------------------------------------------------
# cases
# ---------------------------------------------------------------------------

def run_case(M, geom, e0=None, cfg: SolverConfig | None = None, label: str = "",
             keep_result: bool = False, **tags) -> ErrorReport:
    """Sample ``geom`` on ``P(M)``, solve and compare with the analytic solution."""
    M = as_pattern_matrix(M)
    t0 = time.perf_counter()
    material = sample_material(M, geom)
    if e0 is None:
        e0 = default_loading(geom, material.d)
    res = basic_scheme(material, e0, None, cfg)
    wall = time.perf_counter() - t0
    exact = analytic_strain(material.pattern.matrix, geom, e0)
    action = analytic_action(geom, e0, material.d)
    return ErrorReport(
        label=label or M.compact(),
        matrix=M,
        iterations=res.iterations,
        e_l2=error_l2(res.strain, exact),
        e_eff=error_eff(res.effective_action, action),
        wall_time=wall,
        converged=res.converged,
        result=res if keep_result else None,
        **tags,
    )


def run_cases(cases: Sequence[dict], geom, e0=None, cfg=None, threads: int = 1,
              keep_result: bool = False) -> list[ErrorReport]:
    """Run independent cases, optionally on a thread pool; output keeps input order.

    Each case is a dict with ``M`` and optional ``label``, ``j``, ``k``,
    ``alpha``.
    """
    def one(case):
        case = dict(case)
        M = case.pop("M")
        return run_case(M, geom, e0, cfg, keep_result=keep_result, **case)

    if threads <= 1:
        reports = [one(c) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(one, cases))
    _tag_congruence(reports)
    return reports


def _tag_congruence(reports: Iterable[ErrorReport]):
    """Label reports whose matrices generate the same pattern with a shared tag."""
    groups: dict = {}
    for r in reports:
        groups.setdefault(hermite_representative(r.matrix), []).append(r)
    for H, members in groups.items():
        if len(members) > 1:
            for r in members:
                r.congruence = H.compact()


def subsampling_matrices(a: int = 64) -> dict[str, PatternMatrix]:
    """``M_a = diag(a, a)``, ``M_b = (a, a/2; 0, 1)`` and ``M_c = diag(sqrt a, sqrt a)``."""
    if a % 2:
        raise ValueError("a must be even")
    r = math.isqrt(a)
    if r * r != a:
        raise ValueError("a must be a perfect square")
    return {
        "M_a": PatternMatrix(((a, 0), (0, a))),
        "M_b": PatternMatrix(((a, a // 2), (0, 1))),
        "M_c": PatternMatrix(((r, 0), (0, r))),
    }


def subsampling_suite(a: int = 64, geom: LaminateSpec | None = None, e0=None,
                      cfg: SolverConfig | None = None, threads: int = 1,
                      keep_result: bool = False) -> list[ErrorReport]:
    """Laminate with normal ``g = (2, 1)`` on the full grid, the rank-1 lattice and the coarse grid."""
    geom = geom or default_laminate()
    cases = [{"M": M, "label": name} for name, M in subsampling_matrices(a).items()]
    return run_cases(cases, geom, e0, cfg, threads, keep_result)


def shear_sweep(j: int, alpha: int, ks: Sequence[int] | None = None, scale: int = 0,
                geom=None, cfg: SolverConfig | None = None, threads: int = 1,
                keep_result: bool = False) -> list[ErrorReport]:
    """``M_{j,k,alpha}`` for ``k`` in ``16 * {-32, ..., 32}`` (or ``ks``) on the coated ellipsoid.

    Reports carry the nominal (unscaled) ``k``.
    """
    geom = geom or default_hashin()
    ks = list(range(-512, 513, 16)) if ks is None else list(ks)
    cases = [{"M": shear_matrix(j, k, alpha, scale), "label": f"M_{{{j},{k},{alpha}}}",
              "j": j, "k": k, "alpha": alpha} for k in ks]
    return run_cases(cases, geom, None, cfg, threads, keep_result)


# (label, j, unscaled k, offset added after scaling, alpha); j = None marks the rotated grid
_TABLE = [
    ("M_{7,0,0}", 7, 0, 0, 0),
    ("~M_7", None, 7, 0, None),
    ("M_{8,-2^8+16,0}", 8, -256 + 16, 0, 0),
    ("M_{8,16,0}", 8, 16, 0, 0),
    ("M_{8,2^8+16,0}", 8, 256 + 16, 0, 0),
    ("M_{9,-2^9+16,0}", 9, -512 + 16, 0, 0),
    ("M_{9,15,0}", 9, 16, -1, 0),
    ("M_{9,16,0}", 9, 16, 0, 0),
    ("M_{9,17,0}", 9, 16, 1, 0),
    ("M_{7,2^8,1}", 7, 256, 0, 1),
    ("M_{7,2^8+16,1}", 7, 256 + 16, 0, 1),
]


def hashin_table_cases(scale: int = 0) -> list[dict]:
    """Pattern matrices of the coated-ellipsoid comparison table.

    With ``scale = s`` the shears are divided by ``2^s`` first and the
    ``k = 15, 17`` neighbours become ``16 / 2^s -+ 1``.
    """
    cases = []
    for label, j, k, off, alpha in _TABLE:
        if j is None:
            cases.append({"M": rotated_matrix(k, scale), "label": label, "j": k})
            continue
        M = shear_matrix(j, k, alpha, scale)
        if off:
            (a, b), (c, d) = M.entries
            M = PatternMatrix(((a, b + alpha * off), (c + (1 - alpha) * off, d)))
        cases.append({"M": M, "label": label, "j": j, "k": k + off, "alpha": alpha})
    return cases


def hashin_table(scale: int = 0, geom: HashinSpec | None = None,
                 cfg: SolverConfig | None = None, threads: int = 1,
                 keep_result: bool = False) -> list[ErrorReport]:
    return run_cases(hashin_table_cases(scale), geom or default_hashin(), None, cfg, threads,
                     keep_result)


def write_csv(reports: Iterable[ErrorReport], path=None) -> str:
    """Write reports as CSV (to ``path`` when given); returns the CSV text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
