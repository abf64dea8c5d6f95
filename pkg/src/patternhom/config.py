"""Run configuration files.

Sectioned ``key = value`` text; values are Python literals (numbers, strings,
nested bracket lists), ``inf`` is accepted. Example::

    [pattern]
    matrix = [[64, 32], [0, 1]]

    [geometry]
    type = laminate
    normal = [2, 1]
    f1 = 0.5

    [phase1]
    lambda = 1.0
    mu = 1.0

    [phase2]
    lambda = 10.0
    mu = 10.0

    [loading]
    e0 = [1.0, 0.0, 0.0]

    [solver]
    tolerance = 1e-09
    max_iterations = 10000

Geometry types and their material sections:

* ``homogeneous``: ``[phase1]``
* ``laminate``: ``normal``, ``f1``; ``[phase1]``, ``[phase2]``
* ``hashin``: ``c``, ``rho_c``, ``rho_e``, ``n``; ``[core]``, ``[coating]`` and
  optionally ``[matrix]`` with ``tensor = <6x6 Mandel matrix>``

``[solver]`` also takes ``norm = field|point`` and ``reference = [lambda0, mu0]``.
``[output]`` takes ``dir``, ``field``, ``residuals``, ``action`` and ``image``.
"""
from __future__ import annotations

import ast
import configparser
import io
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .geometry import HashinSpec, HomogeneousSpec, LaminateSpec
from .lattice import PatternMatrix, as_pattern_matrix
from .solver import ReferenceMedium, SolverConfig
from .tensors import IsotropicMaterial

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "dump_config"]

GEOMETRIES = ("homogeneous", "laminate", "hashin")
_MATERIAL_SECTIONS = {
    "homogeneous": ("phase1",),
    "laminate": ("phase1", "phase2"),
    "hashin": ("core", "coating"),
}
_OUTPUT_DEFAULTS = {"dir": ".", "field": "strain.csv", "residuals": "residuals.csv",
                    "action": "effective_action.csv", "image": False}


class ConfigError(ValueError):
    pass


def _literal(text: str, where: str):
    s = text.strip()
    try:
        return ast.literal_eval(re.sub(r"(?<![\w.])(-?)inf\b", r"\g<1>1e999", s))
    except (ValueError, SyntaxError):
        # bare words, paths and compact matrix forms such as (8,-1;0,8)
        if s and not re.search(r"[\[\]'\"]", s):
            return s
        raise ConfigError(f"{where}: cannot parse value {text!r}") from None


def _format(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format(x) for x in v) + "]"
    return str(v)


@dataclass
class RunConfig:
    matrix: PatternMatrix
    geometry: str
    geometry_params: dict = field(default_factory=dict)
    materials: dict = field(default_factory=dict)
    e0: tuple | None = None
    solver: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: dict(_OUTPUT_DEFAULTS))

    def __post_init__(self):
        try:
            self.matrix = as_pattern_matrix(self.matrix)
        except ValueError as exc:
            raise ConfigError(f"[pattern] matrix: {exc}") from exc
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"[geometry] type must be one of {', '.join(GEOMETRIES)}")
        for sec in _MATERIAL_SECTIONS[self.geometry]:
            if sec not in self.materials:
                raise ConfigError(f"missing section [{sec}] for geometry {self.geometry}")
        out = dict(_OUTPUT_DEFAULTS)
        out.update(self.output)
        self.output = out

    # -- builders --------------------------------------------------------
    def _iso(self, name) -> IsotropicMaterial:
        sec = self.materials[name]
        try:
            return IsotropicMaterial(float(sec["lambda"]), float(sec["mu"]))
        except KeyError as exc:
            raise ConfigError(f"[{name}] needs 'lambda' and 'mu'") from exc

    def build_geometry(self):
        g = self.geometry_params
        try:
            if self.geometry == "homogeneous":
                return HomogeneousSpec(self._iso("phase1"), self.matrix.d)
            if self.geometry == "laminate":
                return LaminateSpec(tuple(g["normal"]), float(g["f1"]),
                                    self._iso("phase1"), self._iso("phase2"))
            Cm = self.materials.get("matrix", {}).get("tensor")
            return HashinSpec(tuple(float(v) for v in g["c"]), float(g["rho_c"]),
                              float(g["rho_e"]), tuple(g["n"]), self._iso("core"),
                              self._iso("coating"),
                              None if Cm is None else np.asarray(Cm, dtype=float))
        except KeyError as exc:
            raise ConfigError(f"[geometry] missing key {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise ConfigError(f"[geometry] {exc}") from exc

    def solver_config(self) -> SolverConfig:
        s = self.solver
        try:
            return SolverConfig(float(s.get("tolerance", 1e-9)),
                                int(s.get("max_iterations", 10000)),
                                str(s.get("norm", "field")))
        except ValueError as exc:
            raise ConfigError(f"[solver] {exc}") from exc

    def reference_medium(self, d: int) -> ReferenceMedium | None:
        ref = self.solver.get("reference")
        if ref is None:
            return None
        try:
            lam0, mu0 = (float(v) for v in ref)
            C = ReferenceMedium.isotropic(lam0, mu0, d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[solver] reference: {exc}") from exc
        if np.linalg.eigvalsh(C.C0)[0] <= 0:
            raise ConfigError("[solver] reference medium is not positive definite")
        return C

    # -- serialization ---------------------------------------------------
    def to_parser(self) -> configparser.ConfigParser:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["pattern"] = {"matrix": _format(self.matrix.to_list())}
        cp["geometry"] = {"type": self.geometry,
                          **{k: _format(v) for k, v in self.geometry_params.items()}}
        for name, sec in self.materials.items():
            cp[name] = {k: _format(v) for k, v in sec.items()}
        if self.e0 is not None:
            cp["loading"] = {"e0": _format(list(self.e0))}
        if self.solver:
            cp["solver"] = {k: _format(v) for k, v in self.solver.items()}
        cp["output"] = {k: _format(v) for k, v in self.output.items()}
        return cp


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    secs = {s: {k: _literal(v, f"[{s}] {k}") for k, v in cp[s].items()} for s in cp.sections()}
    if "pattern" not in secs or "matrix" not in secs["pattern"]:
        raise ConfigError("missing [pattern] matrix")
    if "geometry" not in secs or "type" not in secs["geometry"]:
        raise ConfigError("missing [geometry] type")
    geo = dict(secs.pop("geometry"))
    kind = geo.pop("type")
    if kind not in GEOMETRIES:
        raise ConfigError(f"[geometry] type must be one of {', '.join(GEOMETRIES)}")
    matrix = secs.pop("pattern")["matrix"]
    e0 = secs.pop("loading", {}).get("e0")
    solver = secs.pop("solver", {})
    output = secs.pop("output", {})
    known = set(_MATERIAL_SECTIONS.get(kind, ())) | ({"matrix"} if kind == "hashin" else set())
    extra = set(secs) - known
    if extra:
        raise ConfigError(f"unknown section(s) for geometry {kind}: {', '.join(sorted(extra))}")
    return RunConfig(matrix, kind, geo, secs,
                     None if e0 is None else tuple(float(v) for v in e0), solver, output)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc


def dump_config(cfg: RunConfig) -> str:
    buf = io.StringIO()
    cfg.to_parser().write(buf)
    return buf.getvalue()
