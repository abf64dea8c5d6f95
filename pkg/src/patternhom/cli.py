"""Command-line interface.

    patternhom pattern-info "(8,-1;0,8)"
    patternhom solve --config run.ini --out results/
    patternhom reference --config run.ini --out results/
    patternhom experiment subsampling --out results/
    patternhom experiment shear-sweep --j 7 --alpha 0 --scale 3 --threads 4
    patternhom experiment hashin-table --scale 2 --image

Exit codes: 0 success, 1 usage or configuration error, 2 non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import io as fio
from .config import ConfigError, load_config
from .geometry import (HashinSpec, LaminateSpec, analytic_action, analytic_strain,
                       default_loading, laminate_effective, sample_material)
from .lattice import (SingularMatrixError, as_pattern_matrix, embed_3d, get_pattern,
                      hermite_representative)
from .solver import SolverConfig, basic_scheme
from .tensors import n_mandel

log = logging.getLogger("patternhom")

SUITES = ("shear-sweep", "subsampling", "hashin-table")
EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", metavar="PATH", help="run configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (default: config or .)")
    p.add_argument("--tolerance", type=float, help="relative Cauchy stopping threshold")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap")
    p.add_argument("--threads", type=int, help="parallel experiment cases")
    p.add_argument("--scale", type=int, help="shrink experiment matrices by 2^S per axis")
    p.add_argument("--image", action="store_true", help="also write PGM renderings")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="patternhom", parents=[common],
                     description="FFT-based homogenization on anisotropic sampling patterns.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("pattern-info", parents=[common], help="describe the pattern of a matrix")
    p.add_argument("matrix", help='e.g. "(8,-1;0,8)", "diag(8,4)" or "[[8,-1],[0,8]]"')
    p.add_argument("--csv", action="store_true", help="print key,value CSV")

    sub.add_parser("solve", parents=[common], help="run the basic scheme for a config")
    sub.add_parser("reference", parents=[common], help="write the analytic solution of a config")

    p = sub.add_parser("experiment", parents=[common], help="run an experiment suite")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--j", type=int, default=7, help="shear-sweep refinement exponent")
    p.add_argument("--alpha", type=int, default=0, choices=(0, 1), help="shear-sweep direction")
    p.add_argument("--a", type=int, default=64, help="subsampling grid size")
    return parser


def _opt(args, name, default=None):
    return getattr(args, name, default)


def _outdir(args, fallback=".") -> Path:
    out = Path(_opt(args, "out", fallback))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solver_cfg(args, base: SolverConfig | None = None) -> SolverConfig:
    base = base or SolverConfig()
    return SolverConfig(_opt(args, "tolerance", base.tolerance),
                        _opt(args, "max_iter", base.max_iterations), base.norm)


def _vec(v) -> str:
    return "[" + ", ".join(str(x) for x in v) + "]"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_pattern_info(args) -> int:
    M = as_pattern_matrix(args.matrix)
    p = get_pattern(M)
    gs = p.generating_set
    info = [
        ("matrix", M.compact()),
        ("m", p.m),
        ("d_M", p.dim),
        ("divisors", _vec(p.divisors)),
        ("pattern_basis", "; ".join(_vec(str(x) for x in y) for y in p.basis)),
        ("generating_basis", "; ".join(_vec(h) for h in gs.basis)),
        ("hermite_representative", hermite_representative(M).compact()),
        ("rank1", int(p.is_rank1)),
    ]
    if args.csv:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(info)
        return EXIT_OK
    kind = {0: "single point", 1: "rank-1 lattice"}.get(p.dim, f"{p.dim}-dimensional lattice")
    print(f"{kind}, divisors {_vec(p.divisors)}")
    for k, v in info:
        print(f"{k:24s}{v}")
    return EXIT_OK


def _load(args):
    path = _opt(args, "config")
    if path is None:
        raise ConfigError("--config is required")
    return load_config(path)


def _write_vector(path, names, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        w.writerow([repr(float(v)) for v in values])


def _write_matrix(path, names, C):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row"] + names)
        for name, row in zip(names, C):
            w.writerow([name] + [repr(float(v)) for v in row])


def _images(out: Path, stem: str, M, field, names):
    for c in (0, len(names) - 1):
        img = fio.rasterize(M, field[:, c])
        fio.write_pgm(out / f"{stem}_{names[c]}.pgm", img)


def cmd_solve(args) -> int:
    cfg = _load(args)
    geom = cfg.build_geometry()
    out = _outdir(args, cfg.output["dir"])
    material = sample_material(cfg.matrix, geom)
    d = material.d
    e0 = np.asarray(cfg.e0, dtype=float) if cfg.e0 is not None else default_loading(geom, d)
    if e0.shape != (n_mandel(d),):
        raise ConfigError(f"[loading] e0 needs {n_mandel(d)} Mandel components")
    res = basic_scheme(material, e0, cfg.reference_medium(d), _solver_cfg(args, cfg.solver_config()))
    names = fio.strain_names(n_mandel(d))
    M = material.pattern.matrix
    fio.write_field(out / cfg.output["field"], M, res.strain, names)
    fio.write_residuals(out / cfg.output["residuals"], res.residuals)
    _write_vector(out / cfg.output["action"], fio.strain_names(n_mandel(d), "sig"),
                  res.effective_action)
    if _opt(args, "image") or cfg.output.get("image"):
        _images(out, "strain", M, res.strain, names)
    status = "converged" if res.converged else "NOT converged"
    print(f"{status} after {res.iterations} iterations, residual {res.residuals[-1]:.3e}")
    print("effective action", _vec(f"{v:.10g}" for v in res.effective_action))
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_reference(args) -> int:
    cfg = _load(args)
    geom = cfg.build_geometry()
    if not isinstance(geom, (LaminateSpec, HashinSpec)):
        raise ConfigError("reference needs a laminate or hashin geometry")
    out = _outdir(args, cfg.output["dir"])
    M = cfg.matrix
    d = 3 if isinstance(geom, HashinSpec) else M.d
    e0 = None if isinstance(geom, HashinSpec) or cfg.e0 is None else np.asarray(cfg.e0)
    field = analytic_strain(M, geom, e0)
    M_used = sample_material(M, geom).pattern.matrix
    names = fio.strain_names(n_mandel(d))
    fio.write_field(out / ("reference_" + cfg.output["field"]), M_used, field, names)
    action = analytic_action(geom, e0, d)
    _write_vector(out / ("reference_" + cfg.output["action"]),
                  fio.strain_names(n_mandel(d), "sig"), action)
    if isinstance(geom, LaminateSpec):
        _write_matrix(out / "reference_effective_tensor.csv", names, laminate_effective(geom))
    if _opt(args, "image") or cfg.output.get("image"):
        _images(out, "reference", M_used, field, names)
    print("effective action", _vec(f"{v:.10g}" for v in action))
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; available: {', '.join(SUITES)}")
    cfg = load_config(args.config) if _opt(args, "config") else None
    geom = cfg.build_geometry() if cfg else None
    base = cfg.solver_config() if cfg else None
    solver = _solver_cfg(args, base)
    threads = _opt(args, "threads", 1)
    scale = _opt(args, "scale", 0)
    image = bool(_opt(args, "image"))
    out = _outdir(args, cfg.output["dir"] if cfg else ".")

    if args.suite == "subsampling":
        if geom is not None and not isinstance(geom, LaminateSpec):
            raise ConfigError("subsampling needs a laminate geometry")
        reports = ex.subsampling_suite(args.a, geom, cfg.e0 if cfg else None, solver,
                                       threads, keep_result=image)
    else:
        if geom is not None and not isinstance(geom, HashinSpec):
            raise ConfigError(f"{args.suite} needs a hashin geometry")
        if args.suite == "shear-sweep":
            reports = ex.shear_sweep(args.j, args.alpha, scale=scale, geom=geom, cfg=solver,
                                     threads=threads, keep_result=image)
        else:
            reports = ex.hashin_table(scale, geom, solver, threads, keep_result=image)

    path = out / f"{args.suite}.csv"
    ex.write_csv(reports, path)
    if image:
        for i, r in enumerate(reports):
            n = r.result.strain.shape[1]
            M = embed_3d(r.matrix) if n == 6 else r.matrix
            _images(out, f"{args.suite}_{i:03d}", M, r.result.strain, fio.strain_names(n))
    for r in reports:
        flag = "" if r.converged else "  (not converged)"
        print(f"{r.label:22s} {r.matrix.compact():22s} it={r.iterations:5d} "
              f"e_l2={r.e_l2:.4g} e_eff={r.e_eff:.4g}{flag}")
    print(f"wrote {path}")
    return EXIT_OK if all(r.converged for r in reports) else EXIT_NOT_CONVERGED


COMMANDS = {
    "pattern-info": cmd_pattern_info,
    "solve": cmd_solve,
    "reference": cmd_reference,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if _opt(args, "verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SingularMatrixError, ValueError, OSError) as exc:
        print(f"patternhom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
