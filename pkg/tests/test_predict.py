import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifurc.errors import ContractError
from bifurc.flow import constant_flow
from bifurc.jordan import block_grouping
from bifurc.krein import krein_signature
from bifurc.predict import (OFF, ON_NEG, ON_POS, analyze_bifurcation, branch_roots, build_d, positive_inertia,
                            star_factor)
from bifurc.symplectic import rotation
from bifurc.synthetic import planted_jordan, random_partition, random_positive_definite

SHEAR = np.array([[1.0, 1.0], [0.0, 1.0]])


def test_shear_matrices_and_branches():
    an = analyze_bifurcation(SHEAR, np.eye(2), 1.0)
    m = an.matrices
    assert np.allclose(m.S, [[1]]) and np.allclose(m.X, [[1]]) and np.allclose(m.d, [[1]])
    [b1, b2] = an.prediction.branches
    assert b1.a == pytest.approx(1) and b2.a == pytest.approx(1)
    assert an.prediction.values(1e-4) == pytest.approx([1 + 1e-2j, 1 - 1e-2j])
    assert an.prediction.fates(1e-4) == [ON_POS, ON_NEG]
    assert an.prediction.values(-1e-4) == pytest.approx([1 - 1e-2, 1 + 1e-2])
    assert an.prediction.fates(-1e-4) == [OFF, OFF]
    an2 = analyze_bifurcation(SHEAR, 2 * np.eye(2), 1.0)
    assert np.allclose(an2.matrices.S, 2 * m.S)


def test_simple_eigenvalue_direct_substitution():
    th = 0.8
    lam0 = np.exp(1j * th)
    an = analyze_bifurcation(rotation(th), np.eye(2), lam0)
    assert np.allclose(an.matrices.X, [[1]]) and np.allclose(an.matrices.S, [[1]])
    assert np.allclose(an.matrices.d, 1j * lam0 * an.matrices.S / an.matrices.X)
    [b] = an.prediction.branches
    assert b.fate(1e-3) == ON_POS
    # the exact flow is rotation by θ + t
    t = 1e-4
    assert abs(an.prediction.values(t)[0] - np.exp(1j * (th + t))) < 1e-7


def test_build_d_identity_case():
    assert np.allclose(build_d(np.eye(3), np.eye(3), (1, 1, 1), 1.0), 1j * np.eye(3))


def test_branch_roots_diagonal_pencil():
    r = branch_roots(np.diag([2.0, 3.0]), np.eye(2), block_grouping((1, 1)), 1)
    assert np.allclose(sorted(r), [2, 3])


def test_two_oscillator_collision():
    t0 = 2 * np.pi / 3
    g = constant_flow(np.diag([1.0, 2.0, 1.0, 2.0]), t0)
    an = analyze_bifurcation(g, np.diag([1.0, 2.0, 1.0, 2.0]), np.exp(1j * t0), cluster_radius=1e-3)
    assert an.chains.sizes == (1, 1)
    assert sorted(b.a for b in an.prediction.branches) == pytest.approx([-2, 1])
    sig = krein_signature(an.matrices.X)
    assert (sig.p, sig.q) == (1, 1)
    assert sorted(an.prediction.fates(1e-3)) == sorted([ON_POS, ON_NEG])


def test_not_on_circle():
    with pytest.raises(ContractError):
        analyze_bifurcation(SHEAR, np.eye(2), 2.0)


def test_star_factor_roots_of_unity():
    for n in (1, 2, 3, 4):
        w = np.array([star_factor(n, 1.7, q, 1) for q in range(1, n + 1)])
        assert np.allclose(w ** n, 1.7)


def _instance(seed):
    rng = np.random.default_rng(seed)
    sizes = random_partition(4, rng)
    th = rng.uniform(0.3, 2.8)
    g = planted_jordan(sizes, th, rng, mix=0.3)
    A = random_positive_definite(g.shape[0], rng)
    return rng, sizes, th, g, A


@given(st.integers(0, 10_000))
def test_prediction_properties(seed):
    rng, sizes, th, g, A = _instance(seed)
    lam0 = np.exp(1j * th)
    an = analyze_bifurcation(g, A, lam0)
    grp = an.chains.grouping
    # reality and sign census
    for l in range(1, grp.s + 1):
        roots = np.asarray(an.prediction.roots[l])
        assert np.all(np.isreal(roots)) and np.all(roots != 0)
        assert int(np.sum(roots > 0)) == positive_inertia(an.matrices.X, grp, l)
    # star symmetry: deviations of one (l, p) are a common factor times roots of unity
    by_lp = {}
    for b in an.prediction.branches:
        by_lp.setdefault((b.l, b.p), []).append(b)
    for (l, p), bs in by_lp.items():
        n = bs[0].n
        for t in (1e-3, -1e-3):
            dev = np.array([b.deviation(t) for b in bs])
            assert np.allclose(dev ** n, dev[0] ** n, rtol=1e-10)
    # chain-choice invariance
    an2 = analyze_bifurcation(g, A, lam0, rng=rng)
    for l in range(1, grp.s + 1):
        a1, a2 = np.sort(an.prediction.roots[l]), np.sort(an2.prediction.roots[l])
        assert np.allclose(a1, a2, rtol=1e-6)
    # conjugate consistency
    anc = analyze_bifurcation(g, A, np.conj(lam0))
    for t in (1e-4, -1e-4):
        v = np.sort_complex(an.prediction.values(t).conj())
        vc = np.sort_complex(anc.prediction.values(t))
        assert np.allclose(v, vc, atol=1e-10)
