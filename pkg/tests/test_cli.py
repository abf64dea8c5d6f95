import csv

import numpy as np
import pytest

from patternhom import io as fio
from patternhom.cli import main
from patternhom.experiments import default_laminate
from patternhom.geometry import laminate_strains

from test_io_config import HASHIN, LAMINATE


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_pattern_info(capsys):
    assert main(["pattern-info", "(8,-1;0,8)"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "rank-1 lattice, divisors [64]"
    assert main(["pattern-info", "diag(8,4)", "--csv"]) == 0
    rows = dict(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows["divisors"] == "[4, 8]" and rows["d_M"] == "2"


def test_usage_errors(capsys):
    assert main(["pattern-info", "(1,2;2,4)"]) == 1
    assert "singular" in capsys.readouterr().err
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["solve"]) == 1
    assert main(["experiment", "nonsense"]) == 1
    assert "shear-sweep" in capsys.readouterr().err


def test_solve_laminate(tmp_path, capsys):
    cfg = write(tmp_path, LAMINATE)
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out), "--image"]) == 0
    M, lam, x, eps, names = fio.read_field(out / "strain.csv")
    ref = main(["reference", "--config", cfg, "--out", str(out)])
    assert ref == 0
    _, _, _, exact, _ = fio.read_field(out / "reference_strain.csv")
    assert np.abs(eps - exact).max() < 1e-6
    e1, e2 = laminate_strains(default_laminate(), np.array([1.0, 0, 0]))
    assert {tuple(np.round(r, 12)) for r in exact} == {tuple(np.round(e1, 12)),
                                                       tuple(np.round(e2, 12))}
    assert (out / "residuals.csv").exists() and (out / "effective_action.csv").exists()
    assert (out / "strain_eps11.pgm").exists()
    assert (out / "reference_effective_tensor.csv").exists()


def test_solve_not_converged(tmp_path):
    cfg = write(tmp_path, LAMINATE.replace("[[64, 32], [0, 1]]", "[[32, 0], [0, 32]]"))
    assert main(["solve", "--config", cfg, "--out", str(tmp_path), "--max-iter", "2"]) == 2


def test_reference_hashin_deterministic(tmp_path):
    cfg = write(tmp_path, HASHIN)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reference", "--config", cfg, "--out", str(a)]) == 0
    assert main(["reference", "--config", cfg, "--out", str(b)]) == 0
    ta = (a / "reference_strain.csv").read_bytes()
    assert ta == (b / "reference_strain.csv").read_bytes()
    _, _, _, field, names = fio.read_field(a / "reference_strain.csv")
    assert len(names) == 6
    cfg_h = write(tmp_path, LAMINATE.replace("type = laminate", "type = homogeneous"), "h.ini")
    assert main(["reference", "--config", cfg_h, "--out", str(a)]) == 1


def test_experiment_subsampling(tmp_path):
    assert main(["experiment", "subsampling", "--a", "16", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "subsampling.csv")))
    assert [r["label"] for r in rows] == ["M_a", "M_b", "M_c"]


def test_experiment_shear_sweep_rows(tmp_path):
    assert main(["experiment", "shear-sweep", "--alpha", "0", "--j", "7", "--scale", "3",
                 "--threads", "4", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "shear-sweep.csv")))
    assert len(rows) == 65
    assert [int(r["k"]) for r in rows] == list(range(-512, 513, 16))


def test_experiment_table_and_wrong_geometry(tmp_path):
    assert main(["experiment", "hashin-table", "--scale", "4", "--out", str(tmp_path)]) == 0
    assert len(list(csv.DictReader(open(tmp_path / "hashin-table.csv")))) == 11
    cfg = write(tmp_path, LAMINATE)
    assert main(["experiment", "hashin-table", "--config", cfg, "--out", str(tmp_path)]) == 1
