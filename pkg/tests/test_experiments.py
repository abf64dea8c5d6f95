import csv
import io

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from patternhom import experiments as ex
from patternhom.geometry import HomogeneousSpec
from patternhom.lattice import PatternMatrix, get_pattern, is_subpattern
from patternhom.tensors import IsotropicMaterial, from_mandel, to_mandel


def test_error_l2(rng):
    a = rng.normal(size=(20, 3))
    assert ex.error_l2(a, a) == 0
    assert ex.error_l2(2 * a, a) == pytest.approx(1)
    perm = rng.permutation(20)
    b = a + 0.1 * rng.normal(size=a.shape)
    assert ex.error_l2(b[perm], a[perm]) == pytest.approx(ex.error_l2(b, a))
    with pytest.raises(ValueError):
        ex.error_l2(a, np.zeros_like(a))
    with pytest.raises(ValueError):
        ex.error_l2(a, a[:3])


def test_error_eff(rng):
    s = rng.normal(size=6)
    assert ex.error_eff(s, s) == 0
    assert ex.error_eff(1.1 * s, s) == pytest.approx(0.1)
    t = s + 0.05 * rng.normal(size=6)
    R = Rotation.random(random_state=3).as_matrix()
    rot = lambda v: to_mandel(R @ from_mandel(v) @ R.T)
    assert ex.error_eff(rot(t), rot(s)) == pytest.approx(ex.error_eff(t, s))
    with pytest.raises(ValueError):
        ex.error_eff(s, np.zeros(6))


def test_shear_matrix_examples():
    assert ex.shear_matrix(7, 0, 0) == PatternMatrix("diag(128,128)")
    assert ex.shear_matrix(9, 16, 0) == PatternMatrix("(512,0;16,32)")
    for j in range(4, 11):
        for k in (-512, -16, 0, 48, 512):
            for alpha in (0, 1):
                assert ex.shear_matrix(j, k, alpha).det == 2**14
    assert ex.shear_matrix(9, 16, 0, scale=2) == PatternMatrix("(128,0;4,8)")
    assert ex.shear_matrix(9, 16, 0, dim=3).d == 3
    with pytest.raises(ValueError):
        ex.shear_matrix(9, 17, 0, scale=2)
    with pytest.raises(ValueError):
        ex.shear_matrix(9, 16, 2)


def test_rotated_matrix_examples():
    assert ex.rotated_matrix(7) == PatternMatrix("(64,64;-64,64)")
    assert abs(ex.rotated_matrix(7).det) == 2**13
    assert is_subpattern(ex.rotated_matrix(7), "diag(128,128)")
    with pytest.raises(ValueError):
        ex.rotated_matrix(7, scale=7)


def test_homogeneous_case_is_exact():
    geom = HomogeneousSpec(IsotropicMaterial(2.0, 1.0), 2)
    r = ex.run_case("(8,-1;0,8)", geom)
    assert r.e_l2 == pytest.approx(0, abs=1e-14) and r.e_eff == pytest.approx(0, abs=1e-14)
    assert r.iterations == 1 and r.converged


def test_subsampling_relations():
    Ms = ex.subsampling_matrices(64)
    assert get_pattern(Ms["M_b"]).m == 64 == int(np.sqrt(get_pattern(Ms["M_a"]).m))
    assert get_pattern(Ms["M_b"]).dim == 1
    assert is_subpattern(Ms["M_b"], Ms["M_a"]) and is_subpattern(Ms["M_c"], Ms["M_a"])
    with pytest.raises(ValueError):
        ex.subsampling_matrices(50)


def test_subsampling_small_ordering():
    reps = {r.label: r for r in ex.subsampling_suite(16)}
    assert set(reps) == {"M_a", "M_b", "M_c"}
    assert reps["M_b"].iterations < reps["M_a"].iterations
    assert reps["M_b"].e_l2 < reps["M_c"].e_l2


def test_table_cases():
    cases = ex.hashin_table_cases()
    assert len(cases) == 11
    by = {c["label"]: c["M"] for c in cases}
    assert by["M_{9,15,0}"] == PatternMatrix("(512,0;15,32)")
    assert by["M_{9,17,0}"] == PatternMatrix("(512,0;17,32)")
    assert by["M_{7,2^8,1}"] == PatternMatrix("(128,256;0,128)")
    assert all(abs(M.det) == 2**14 for lbl, M in by.items() if lbl != "~M_7")
    small = {c["label"]: c["M"] for c in ex.hashin_table_cases(3)}
    assert small["M_{9,16,0}"] == PatternMatrix("(64,0;2,4)")
    assert small["M_{9,15,0}"] == PatternMatrix("(64,0;1,4)")


def test_congruence_tag_and_csv(tmp_path):
    cases = [{"M": "(16,0;0,16)", "label": "a"}, {"M": "(16,16;0,16)", "label": "b"},
             {"M": "(32,0;0,8)", "label": "c"}]
    geom = HomogeneousSpec(IsotropicMaterial(1.0, 1.0), 2)
    reps = ex.run_cases(cases, geom)
    assert reps[0].congruence == reps[1].congruence != "" and reps[2].congruence == ""
    p = tmp_path / "x.csv"
    text = ex.write_csv(reps, p)
    rows = list(csv.DictReader(io.StringIO(p.read_text())))
    assert list(rows[0]) == ex.CSV_COLUMNS
    assert [r["label"] for r in rows] == ["a", "b", "c"]
    again = ex.write_csv(ex.run_cases(cases, geom, threads=3))
    drop = lambda t: [{k: v for k, v in r.items() if k != "wall_time_s"}
                      for r in csv.DictReader(io.StringIO(t))]
    assert drop(text) == drop(again)


def test_shear_sweep_small():
    reps = ex.shear_sweep(7, 0, ks=[-16, 0, 16], scale=3)
    assert [r.k for r in reps] == [-16, 0, 16]
    assert all(r.converged and r.e_eff >= 0 for r in reps)
    assert reps[0].matrix == PatternMatrix("(16,0;-2,16)")


def test_error_report_validation():
    with pytest.raises(ValueError):
        ex.ErrorReport("x", PatternMatrix("diag(2,2)"), 1, -1.0, 0.0, 0.0)
