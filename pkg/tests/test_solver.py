import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patternhom import pattern_fft as pf
from patternhom.geometry import (HomogeneousSpec, LaminateSpec, laminate_effective,
                                 laminate_strains, sample_material)
from patternhom.lattice import get_pattern, reorder_map
from patternhom.solver import (MaterialField, ReferenceMedium, SolverConfig, basic_scheme,
                               choose_reference, effective_action, effective_tensor,
                               green_apply, green_operator, isotropic_green_operator)
from patternhom.tensors import (IsotropicMaterial, contract, from_mandel, isotropic_stiffness,
                                to_mandel)

MAT1, MAT2 = IsotropicMaterial(1.0, 1.0), IsotropicMaterial(10.0, 10.0)


def classical_gamma(lam0, mu0, h):
    """Isotropic Green operator in index form (Mura / Moulinec-Suquet)."""
    d = len(h)
    xi = np.asarray(h, float) / np.linalg.norm(h)
    dl = np.eye(d)
    G = np.zeros((d,) * 4)
    for k in range(d):
        for l in range(d):
            for i in range(d):
                for j in range(d):
                    G[k, l, i, j] = ((dl[k, i] * xi[l] * xi[j] + dl[l, i] * xi[k] * xi[j]
                                      + dl[k, j] * xi[l] * xi[i] + dl[l, j] * xi[k] * xi[i])
                                     / (4 * mu0)
                                     - (lam0 + mu0) / (mu0 * (lam0 + 2 * mu0))
                                     * xi[i] * xi[j] * xi[k] * xi[l])
    return G


def test_green_apply_examples():
    lam0, mu0 = 2.0, 3.0
    C0 = isotropic_stiffness(IsotropicMaterial(lam0, mu0), 2)
    out = green_apply(C0, (1, 0), to_mandel(np.diag([1.0, 0.0])))
    assert np.allclose(from_mandel(out), np.diag([-1 / (lam0 + 2 * mu0), 0]), atol=1e-15)
    assert np.allclose(green_apply(C0, (3, -2), np.zeros(3)), 0)
    with pytest.raises(ValueError):
        green_apply(C0, (0, 0), np.ones(3))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 2**32 - 1))
def test_green_apply_vs_classical(d, seed):
    rng = np.random.default_rng(seed)
    lam0, mu0 = rng.uniform(0.1, 5), rng.uniform(0.1, 5)
    C0 = isotropic_stiffness(IsotropicMaterial(lam0, mu0), d)
    h = rng.integers(-9, 10, size=d)
    if not h.any():
        h[0] = 1
    tau = rng.normal(size=(d, d))
    tau = tau + tau.T
    ref = -np.einsum("klij,ij->kl", classical_gamma(lam0, mu0, h), tau)
    for fast in (False, True):
        got = from_mandel(green_apply(C0, h, to_mandel(tau), fast=fast))
        assert np.allclose(got, ref, atol=1e-12 * np.abs(tau).max())
    G = isotropic_green_operator(lam0, mu0, [h])[0]
    Gg = green_operator(C0, [h])[0]
    assert np.allclose(G @ to_mandel(tau), to_mandel(ref), atol=1e-12 * np.abs(tau).max())
    assert np.allclose(G, Gg, atol=1e-12)


def test_green_operator_anisotropic_matches_apply(rng):
    A = rng.normal(size=(6, 6))
    C0 = A @ A.T + 3 * np.eye(6)
    H = rng.integers(-5, 6, size=(10, 3))
    H[0] = 0
    G = green_operator(C0, H)
    assert np.allclose(G[0], 0)
    tau = rng.normal(size=6)
    for h, Gh in zip(H[1:], G[1:]):
        if h.any():
            assert np.allclose(Gh @ tau, green_apply(C0, h, tau), atol=1e-12)
    with pytest.raises(ValueError):
        green_apply(C0, (1, 0, 0), tau, fast=True)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 2**32 - 1))
def test_green_projector_property(d, seed):
    """-Gamma C0 is the identity on compatible strains sym(h u^T)."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d * (d + 1) // 2,) * 2)
    C0 = A @ A.T + np.eye(len(A))
    h = rng.integers(-6, 7, size=d)
    if not h.any():
        h[-1] = 2
    u = rng.normal(size=d)
    eps = to_mandel(0.5 * (np.outer(h, u) + np.outer(u, h)))
    back = -green_apply(C0, h, contract(C0, eps))
    assert np.allclose(back, eps, atol=1e-10 * np.abs(eps).max())
    G = green_operator(C0, [h])[0]
    P = -G @ C0
    assert np.allclose(P @ P, P, atol=1e-10)


def test_choose_reference():
    p = get_pattern("diag(4,4)")
    one = MaterialField(p, np.zeros(16, int), [isotropic_stiffness(IsotropicMaterial(2, 3), 2)])
    ref = choose_reference(one)
    assert (ref.lam0, ref.mu0) == (2, 3)
    two = sample_material("diag(4,4)", LaminateSpec((1, 0), 0.5, MAT1, MAT2))
    ref = choose_reference(two)
    assert (ref.lam0, ref.mu0) == (5.5, 5.5)
    assert np.linalg.eigvalsh(ref.C0)[0] > 0
    rng = np.random.default_rng(3)
    A = rng.normal(size=(3, 3))
    aniso = MaterialField(p, np.arange(16) % 2, [A @ A.T + np.eye(3), np.diag([1.0, 2, 3])])
    assert np.linalg.eigvalsh(choose_reference(aniso).C0)[0] > 0


def test_material_field_validation():
    p = get_pattern("diag(2,2)")
    C = isotropic_stiffness(MAT1, 2)
    with pytest.raises(ValueError):
        MaterialField(p, np.array([0, 0, 0]), [C])
    with pytest.raises(ValueError):
        MaterialField(p, np.array([0, 1, 0, 0]), [C])


def test_homogeneous_one_iteration():
    mat = sample_material("(8,-1;0,8)", HomogeneousSpec(MAT2, 2))
    e0 = np.array([0.3, -0.2, 0.1])
    C = isotropic_stiffness(MAT2, 2)
    res = basic_scheme(mat, e0, C)
    assert res.iterations == 1 and res.converged
    assert np.abs(res.strain - e0).max() <= 1e-12
    assert np.allclose(res.effective_action, C @ e0)
    E = effective_tensor(mat, C)
    assert np.allclose(E.tensor, C)


def test_mean_conservation_and_realness(rng):
    M = "(12,5;-3,7)"
    p = get_pattern(M)
    C1, C2 = isotropic_stiffness(MAT1, 2), isotropic_stiffness(MAT2, 2)
    mat = MaterialField(p, rng.integers(0, 2, size=p.m), [C1, C2])
    e0 = np.array([1.0, 0.5, -0.3])
    res = basic_scheme(mat, e0, cfg=SolverConfig(tolerance=1e-10))
    assert res.converged
    assert all(np.abs(m - e0).max() <= 1e-12 for m in res.mean_history)
    assert res.mean_deviation <= 1e-12
    assert res.imag_residue <= 1e-10
    stress = mat.stress(res.strain)
    assert np.allclose(res.effective_action, stress.mean(axis=0))
    by_phase = sum((mat.phase_index == k).mean() * stress[mat.phase_index == k].mean(axis=0)
                   for k in range(2))
    assert np.allclose(effective_action(res.strain, mat), by_phase)


def test_equilibrium_of_converged_field(rng):
    """Converged stress is divergence-free: sigma_hat(h) h = 0 for h != 0."""
    M = "diag(16,16)"
    p = get_pattern(M)
    mat = MaterialField(p, rng.integers(0, 2, size=p.m),
                        [isotropic_stiffness(MAT1, 2), isotropic_stiffness(MAT2, 2)])
    res = basic_scheme(mat, np.array([1.0, 0, 0]), cfg=SolverConfig(tolerance=1e-12))
    sh = pf.fft(M, mat.stress(res.strain))
    eh = pf.fft(M, res.strain)
    fset = {tuple(h) for h in p.frequencies.tolist()}
    # boundary frequencies whose negative is another representative are skipped:
    # the real part couples them to a different Green multiplier
    inner = [i for i, h in enumerate(p.frequencies.tolist())
             if any(h) and tuple(-v for v in h) in fset]
    assert len(inner) > 200
    for i in inner:
        h = p.frequencies[i]
        assert np.abs(from_mandel(sh[i]) @ h).max() < 1e-9
        hp = np.array([-h[1], h[0]])
        assert abs(hp @ from_mandel(eh[i]) @ hp) < 1e-10


def test_laminate_exact_on_aligned_grid():
    spec = LaminateSpec((1, 0), 0.5, MAT1, MAT2)
    mat = sample_material("diag(256,1)", spec)
    e0 = np.array([1.0, 0.0, 0.0])
    res = basic_scheme(mat, e0)
    e1, e2 = laminate_strains(spec, e0)
    for k, ek in enumerate((e1, e2)):
        assert np.abs(res.strain[mat.phase_index == k] - ek).max() <= 1e-6
    E = effective_tensor(mat)
    ref = laminate_effective(spec)
    assert np.linalg.norm(E.tensor - ref) / np.linalg.norm(ref) <= 1e-3
    assert E.asymmetry <= 1e-8 and E.converged


def test_non_convergence_flagged():
    mat = sample_material("diag(32,32)", LaminateSpec((2, 1), 0.5, MAT1, MAT2))
    res = basic_scheme(mat, np.array([1.0, 0, 0]), cfg=SolverConfig(tolerance=1e-14,
                                                                    max_iterations=3))
    assert not res.converged and res.iterations == 3 and len(res.residuals) == 3


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0)
    with pytest.raises(ValueError):
        SolverConfig(norm="max")


def test_dimension_errors():
    mat = sample_material("diag(4,4)", HomogeneousSpec(MAT1, 2))
    with pytest.raises(ValueError):
        basic_scheme(mat, np.zeros(6))
    with pytest.raises(ValueError):
        basic_scheme(mat, np.zeros(3), ReferenceMedium.isotropic(1, 1, 3))


def test_congruent_equivariance_same_generating_set():
    """Congruent matrices sharing G(M^T) give the same field after reordering."""
    M1, M2 = "(8,0;0,8)", "(8,8;0,8)"
    p1, p2 = get_pattern(M1), get_pattern(M2)
    spec = LaminateSpec((2, 1), 0.5, MAT1, MAT2)
    same = {tuple(h) for h in p1.frequencies.tolist()} == {tuple(h) for h in p2.frequencies.tolist()}
    r1 = basic_scheme(sample_material(M1, spec), np.array([1.0, 0, 0]))
    r2 = basic_scheme(sample_material(M2, spec), np.array([1.0, 0, 0]))
    pi = reorder_map(M1, M2)
    if same:
        assert np.abs(r2.strain[pi] - r1.strain).max() <= 1e-9
    assert np.allclose(r1.effective_action, r2.effective_action, atol=1e-9) or not same
