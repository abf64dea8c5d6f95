"""Field dumps, residual histories and grayscale image export.

Field dump format (text)::

    #pattern <d> <M_11> <M_12> ... <M_dd>
    #columns lam_1,...,lam_dM,x_1,...,x_d,<value names>
    <one CSV record per pattern point, in pattern order>

Coordinates are written with ``repr`` so a dump reads back bit-for-bit.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .lattice import PatternMatrix, get_pattern

__all__ = ["strain_names", "write_field", "read_field", "write_residuals",
           "rasterize", "write_pgm"]


def strain_names(n: int, prefix: str = "eps") -> list[str]:
    comps = {1: ["11"], 3: ["11", "22", "12"], 6: ["11", "22", "33", "23", "13", "12"]}[n]
    return [prefix + c for c in comps]


def write_field(path, M, values, names=None) -> None:
    """Dump a per-point field (rows in pattern order) in the shared text format."""
    p = get_pattern(M)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != p.m:
        raise ValueError(f"field has {values.shape[0]} rows, pattern has {p.m} points")
    names = list(names) if names is not None else [f"v{i + 1}" for i in range(values.shape[1])]
    cols = ([f"lam_{i + 1}" for i in range(p.dim)] + [f"x_{i + 1}" for i in range(p.d)] + names)
    flat = " ".join(str(v) for row in p.matrix.entries for v in row)
    with open(path, "w", newline="") as fh:
        fh.write(f"#pattern {p.d} {flat}\n")
        fh.write("#columns " + ",".join(cols) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for lam, x, v in zip(p.lambdas, p.coords, values):
            w.writerow([int(a) for a in lam] + [repr(float(a)) for a in x]
                       + [repr(float(a)) for a in v])


def read_field(path):
    """Inverse of :func:`write_field`: ``(matrix, lambdas, coords, values, names)``."""
    with open(path) as fh:
        head = fh.readline().split()
        if not head or head[0] != "#pattern":
            raise ValueError(f"{path}: missing '#pattern' header")
        d = int(head[1])
        nums = [int(v) for v in head[2:]]
        if len(nums) != d * d:
            raise ValueError(f"{path}: pattern header needs {d * d} entries")
        M = PatternMatrix(tuple(tuple(nums[i * d:(i + 1) * d]) for i in range(d)))
        cols = fh.readline()
        if not cols.startswith("#columns "):
            raise ValueError(f"{path}: missing '#columns' header")
        cols = cols[len("#columns "):].strip().split(",")
        rows = [r for r in csv.reader(fh) if r]
    dim = get_pattern(M).dim
    arr = np.array(rows, dtype=float).reshape(len(rows), len(cols))
    names = cols[dim + d:]
    return M, arr[:, :dim].astype(np.int64), arr[:, dim:dim + d], arr[:, dim + d:], names


def write_residuals(path, residuals) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "residual"])
        for i, r in enumerate(residuals, 1):
            w.writerow([i, repr(float(r))])


def rasterize(M, values, size: int = 256) -> np.ndarray:
    """Nearest-pattern-point image of a scalar field on the ``x1, x2`` plane.

    Row 0 is the top (largest ``x2``); ``x3 = 0`` for three-dimensional
    patterns.
    """
    p = get_pattern(M)
    values = np.asarray(values, dtype=float)
    t = (np.arange(size) + 0.5) / size - 0.5
    X1, X2 = np.meshgrid(t, t[::-1])
    pts = np.zeros((size * size, p.d))
    pts[:, 0] = X1.ravel()
    if p.d > 1:
        pts[:, 1] = X2.ravel()
    return values[p.locate(pts)].reshape(size, size)


def write_pgm(path, image: np.ndarray) -> tuple[float, float]:
    """Write a binary 8-bit PGM normalized to the image's own min/max.

    The range is also written to ``<path>.minmax.txt``; returns ``(min, max)``.
    """
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    span = hi - lo
    scaled = np.zeros_like(image) if span == 0 else (image - lo) / span
    data = np.clip(np.rint(scaled * 255), 0, 255).astype(np.uint8)
    h, w = data.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
    Path(str(path) + ".minmax.txt").write_text(f"min {lo!r}\nmax {hi!r}\n")
    return lo, hi
