import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifurc.errors import ContractError
from bifurc.jordan import block_grouping, conjugate_partition, eta_chains, jordan_chains, phi, phi_profile
from bifurc.krein import krein_pairing
from bifurc.synthetic import planted_jordan, random_partition

SHEAR = np.array([[1.0, 1.0], [0.0, 1.0]])


def phi_brute(k, sizes):
    """Fewest blocks (any choice) whose sizes sum to at least N - k."""
    need = sum(sizes) - k
    for r in range(len(sizes) + 1):
        if any(sum(c) >= need for c in itertools.combinations(sizes, r)):
            return r


def test_grouping_examples():
    assert block_grouping((4, 2, 2, 1)) == block_grouping([4, 2, 2, 1])
    g = block_grouping((4, 2, 2, 1))
    assert (g.s, g.n, g.m) == (3, (4, 2, 1), (1, 2, 1))
    assert block_grouping((1, 1)).m == (2,)
    g = block_grouping((3, 3, 3))
    assert (g.s, g.n, g.m) == (1, (3,), (3,))
    with pytest.raises(ContractError):
        block_grouping((1, 2))


def test_phi_worked_example():
    sizes = (4, 2, 2, 1)
    assert (phi(1, sizes), phi(3, sizes), phi(5, sizes)) == (3, 2, 1)
    assert phi(0, sizes) == 4
    assert all(phi(k, sizes) == 0 for k in range(9, 19))
    assert all(phi(k, sizes) == phi_brute(k, sizes) for k in range(19))


@given(st.lists(st.integers(1, 6), min_size=1, max_size=6))
def test_phi_monotone_and_brute(parts):
    sizes = sorted(parts, reverse=True)
    prof = phi_profile(sizes, sum(sizes) + 2)
    assert all(prof[k] == phi_brute(k, sizes) for k in range(prof.size))
    steps = -np.diff(prof)
    assert set(steps.tolist()) <= {0, 1}


def test_conjugate_partition():
    assert conjugate_partition([4, 2, 2, 1]) == [4, 3, 1, 1]
    assert conjugate_partition(conjugate_partition([5, 3, 3])) == [5, 3, 3]


def test_shear_chain():
    ch = jordan_chains(SHEAR, 1.0)
    assert ch.sizes == (2,)
    xi1, xi2 = ch.chains[0][:, 0], ch.chains[0][:, 1]
    assert np.allclose(xi1, [1, 0], atol=1e-12)
    assert np.allclose((SHEAR - np.eye(2)) @ xi2, -xi1, atol=1e-12)
    assert np.allclose(xi2, [0, -1], atol=1e-12)
    et = eta_chains(ch)
    assert np.allclose(et.chains[0][:, 0], [-1j, 0], atol=1e-12)
    assert np.allclose(et.chains[0][:, 1], [0, 1], atol=1e-12)


def test_simple_cases():
    assert jordan_chains(np.eye(4), 1.0).sizes == (1, 1, 1, 1)
    from bifurc.symplectic import rotation
    ch = jordan_chains(rotation(0.3), np.exp(-0.3j))
    assert ch.sizes == (1,)
    # θ0 = π/2, j = 1: the scaling factor is 1
    ch = jordan_chains(rotation(-np.pi / 2), 1j)
    et = eta_chains(ch)
    assert np.allclose(et.chains[0], ch.chains[0])


@given(st.integers(0, 10_000))
def test_weyr_segre_duality(seed):
    rng = np.random.default_rng(seed)
    sizes = random_partition(8, rng)
    N = sum(sizes)
    Nil = np.zeros((N, N))
    o = 0
    for k in sizes:
        Nil[o:o + k, o:o + k] = np.diag(np.ones(k - 1), 1)
        o += k
    # well-conditioned similarity so the rank decisions are not borderline
    P = np.linalg.qr(rng.normal(size=(N, N)))[0] * rng.uniform(0.5, 2.0, N)
    M = np.eye(N) + P @ Nil @ np.linalg.inv(P)
    ch = jordan_chains(M, 1.0, cluster_radius=0.5)
    assert list(ch.sizes) == sizes
    B = M - np.eye(N)
    nullity = [N - np.linalg.matrix_rank(np.linalg.matrix_power(B, r), tol=1e-8) for r in range(N + 1)]
    weyr = [b - a for a, b in zip(nullity, nullity[1:]) if b > a]
    assert conjugate_partition(weyr) == sizes


@given(st.integers(0, 10_000))
def test_chain_gram_relations(seed):
    rng = np.random.default_rng(seed)
    sizes = random_partition(4, rng)
    th = rng.uniform(0.3, 2.8)
    g = planted_jordan(sizes, th, rng, mix=0.3)
    ch = jordan_chains(g, np.exp(1j * th), rng=rng)
    assert list(ch.sizes) == sizes
    et = eta_chains(ch)
    scale = max(np.abs(c).max() for c in et.chains) ** 2
    for i, ci in enumerate(et.chains):
        for k, ck in enumerate(et.chains):
            G = krein_pairing(ci, ck)
            top = max(ci.shape[1], ck.shape[1])
            anti = []
            for j in range(1, ci.shape[1] + 1):
                for jj in range(1, ck.shape[1] + 1):
                    if j + jj <= top:
                        assert abs(G[j - 1, jj - 1]) <= 1e-6 * scale
                    elif j + jj == top + 1:
                        anti.append(G[j - 1, jj - 1])
            if anti:
                assert np.ptp(np.array(anti).real) + np.ptp(np.array(anti).imag) <= 1e-6 * scale
