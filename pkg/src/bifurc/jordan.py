"""Jordan chains of a symplectic matrix at an eigenvalue on the unit circle.

Chains follow the convention ``γ ξ_{i,j} = λ0 ξ_{i,j} - ξ_{i,j-1}`` with
``ξ_{i,0} = 0``, so ``ξ_{i,j-1} = -(γ - λ0) ξ_{i,j}``.  The block sizes come
from a rank staircase of ``(γ - λ0)^r`` restricted to the generalized
eigenspace, computed on the leading block of an ordered Schur form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, IllPosedStructureError, NumericalError, StructureError
from .flow import as_matrix
from .krein import schur_subspace


@dataclass(frozen=True)
class Grouping:
    """Distinct block sizes ``n`` (descending) and their multiplicities ``m``."""

    s: int
    m: tuple
    n: tuple

    def offsets(self) -> list:
        """Start index of each group inside the list of chains."""
        return list(np.concatenate([[0], np.cumsum(self.m)]).astype(int))


def block_grouping(sizes: Sequence[int]) -> Grouping:
    """Group non-increasing block sizes, e.g. ``(4,2,2,1) -> s=3, n=(4,2,1), m=(1,2,1)``."""
    sizes = [int(x) for x in sizes]
    if not sizes or any(x <= 0 for x in sizes):
        raise ContractError("block sizes must be positive integers")
    if any(a < b for a, b in zip(sizes, sizes[1:])):
        raise ContractError(f"block sizes must be non-increasing, got {tuple(sizes)}")
    n, m = [], []
    for x in sizes:
        if n and n[-1] == x:
            m[-1] += 1
        else:
            n.append(x)
            m.append(1)
    return Grouping(len(n), tuple(m), tuple(n))


def phi(k: int, sizes: Sequence[int]) -> int:
    """Smallest number of leading blocks whose total size reaches ``N - k``."""
    sizes = sorted((int(x) for x in sizes), reverse=True)
    if k < 0:
        raise ContractError("k must be non-negative")
    need = sum(sizes) - k
    acc = 0
    for i, x in enumerate(sizes):
        if acc >= need:
            return i
        acc += x
    return len(sizes)


def phi_profile(sizes: Sequence[int], kmax: Optional[int] = None) -> np.ndarray:
    N = sum(sizes)
    kmax = N if kmax is None else kmax
    return np.array([phi(k, sizes) for k in range(kmax + 1)])


def conjugate_partition(parts: Sequence[int]) -> list:
    parts = [p for p in parts if p > 0]
    if not parts:
        return []
    return [sum(1 for p in parts if p >= s) for s in range(1, max(parts) + 1)]


# --------------------------------------------------------------------------
# chains
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JordanChainSet:
    """Jordan chains at ``λ0``; ``chains[i][:, j-1]`` is ``ξ_{i,j}``.

    ``staircase`` lists ``(r, rank, singular values)`` of ``(γ - λ0)^r`` on
    the generalized eigenspace so the structural decision can be audited.
    """

    lam0: complex
    theta0: float
    chains: list
    sizes: tuple
    grouping: Grouping
    staircase: list = field(repr=False)
    cluster: np.ndarray = field(repr=False)
    residual: float = 0.0

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def N(self) -> int:
        return int(sum(self.sizes))

    def basis(self) -> np.ndarray:
        return np.hstack(self.chains)

    def to_dict(self) -> dict:
        return {
            "lambda0": [self.lam0.real, self.lam0.imag],
            "theta0": self.theta0,
            "sizes": list(self.sizes),
            "grouping": {"s": self.grouping.s, "m": list(self.grouping.m), "n": list(self.grouping.n)},
            "chains": [[[[z.real, z.imag] for z in col] for col in c.T] for c in self.chains],
            "staircase": [{"power": r, "rank": k, "singular_values": list(map(float, sv))}
                          for r, k, sv in self.staircase],
            "residual": self.residual,
        }


@dataclass(frozen=True, eq=False)
class EtaChainSet:
    """Scaled chains ``η_{i,j} = (-i λ0)^j ξ_{i,j}``; ``chains[i][:, j-1]`` is ``η_{i,j}``."""

    lam0: complex
    theta0: float
    chains: list
    sizes: tuple
    grouping: Grouping

    @property
    def m(self) -> int:
        return len(self.sizes)

    def first(self) -> np.ndarray:
        """Columns ``η_{i,1}``."""
        return np.column_stack([c[:, 0] for c in self.chains])

    def last(self) -> np.ndarray:
        """Columns ``η_{i,j_i}``."""
        return np.column_stack([c[:, -1] for c in self.chains])


def eta_chains(chains: JordanChainSet) -> EtaChainSet:
    f = -1j * chains.lam0
    etas = [c * (f ** np.arange(1, c.shape[1] + 1)) for c in chains.chains]
    return EtaChainSet(chains.lam0, chains.theta0, etas, chains.sizes, chains.grouping)


def _rank(s: np.ndarray, thr: float, what: str) -> int:
    r = int(np.sum(s > thr))
    below = s[s <= thr]
    above = s[s > thr]
    if below.size and below.max() > thr / 10:
        raise IllPosedStructureError(
            f"{what}: singular value {below.max():.3e} within a factor 10 below threshold {thr:.3e}")
    if above.size and above.min() < 10 * thr:
        raise IllPosedStructureError(
            f"{what}: singular value {above.min():.3e} within a factor 10 above threshold {thr:.3e}")
    return r


def _orth(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0:
        return U[:, :0]
    return U[:, s > tol * max(s[0], 1e-300)]


def _null(M: np.ndarray, rank: int) -> np.ndarray:
    _, _, Vh = np.linalg.svd(M)
    return Vh[rank:].conj().T


def _phase(v: np.ndarray) -> complex:
    # unimodular factor making the largest entry of v real positive
    a = np.abs(v)
    k = int(np.flatnonzero(a >= a.max() * (1 - 1e-9))[0])
    return abs(v[k]) / v[k]


def jordan_chains(gamma, lam0: complex, tol: float = 1e-8, cluster_radius: float = 1e-2,
                  rng: Optional[np.random.Generator] = None) -> JordanChainSet:
    """Jordan chains of ``γ`` at the eigenvalue ``λ0``.

    Parameters
    ----------
    gamma : array_like
        Real symplectic matrix.
    lam0 : complex
        Eigenvalue on the unit circle.
    tol : float
        Rank threshold: a singular value of ``B^r`` counts as zero when it is
        at most ``tol * max(1, ||B||)^r``, with ``B`` the nilpotent part on the
        generalized eigenspace.  Singular values within a factor 10 of the
        threshold make the structure ill-posed.
    cluster_radius : float
        All computed eigenvalues within this distance of ``λ0`` belong to the
        generalized eigenspace.  A defective block of size ``k`` spreads its
        computed eigenvalues by roughly ``eps^(1/k)``, hence the loose default.
    rng : numpy.random.Generator, optional
        When given, the chain generators inside each size class are mixed by a
        random unitary and shifted by admissible lower-order components.  The
        result is a different but equally valid chain set.

    Returns
    -------
    JordanChainSet
        Working ``λ0`` is the mean of the cluster projected onto U.  Each chain
        is normalized so that ``||ξ_{i,1}|| = 1``.

    Raises
    ------
    IllPosedStructureError
        On an ambiguous rank decision.
    """
    g = as_matrix(gamma)
    lam0 = complex(lam0)
    if abs(abs(lam0) - 1.0) > max(10 * tol, 1e-6):
        raise ContractError(f"λ0 = {lam0} is not on the unit circle")
    w = np.linalg.eigvals(g)
    d = np.abs(w - lam0)
    inside = d <= cluster_radius
    if not inside.any():
        raise ContractError(f"no eigenvalue within {cluster_radius} of λ0 = {lam0}; nearest is {w[np.argmin(d)]:.6g}")
    r_sel = cluster_radius
    outside = d[~inside]
    if outside.size:
        r_sel = 0.5 * (d[inside].max() + outside.min())
    V, T11, k = schur_subspace(g, lambda z: abs(z - lam0) <= r_sel)
    if k != int(inside.sum()):
        raise NumericalError("Schur reordering disagrees with the eigenvalue cluster")
    lam = np.trace(T11) / k
    lam = lam / abs(lam)
    B = T11 - lam * np.eye(k)
    scale = max(1.0, np.linalg.norm(B, 2))

    # rank staircase of B^r
    staircase = []
    ranks = [k]
    P = np.eye(k, dtype=complex)
    kernels = [np.zeros((k, 0), dtype=complex)]
    while ranks[-1] > 0:
        P = B @ P
        r_pow = len(ranks)
        s = np.linalg.svd(P, compute_uv=False)
        rk = _rank(s, tol * scale ** r_pow, f"rank of (γ - λ0)^{r_pow}")
        staircase.append((r_pow, rk, s))
        if rk >= ranks[-1]:
            raise StructureError(
                f"rank staircase stalls at power {r_pow} (rank {rk}); the cluster of radius "
                f"{cluster_radius} is not a single generalized eigenspace")
        ranks.append(rk)
        kernels.append(_null(P, rk))
    weyr = [ranks[i - 1] - ranks[i] for i in range(1, len(ranks))]
    if any(a < b for a, b in zip(weyr, weyr[1:])):
        raise IllPosedStructureError(f"Weyr characteristic {weyr} is not non-increasing")
    # Weyr characteristic and Segre characteristic are conjugate partitions
    sizes = conjugate_partition(weyr)

    # generators from the largest size down
    tops = {}  # size -> list of top vectors (k-dim)
    for sz in range(len(weyr), 0, -1):
        count = sizes.count(sz)
        if count == 0:
            continue
        lower = [kernels[sz - 1]]
        for big, vs in tops.items():
            for v in vs:
                lower.append((np.linalg.matrix_power(-B, big - sz) @ v).reshape(-1, 1))
        L = _orth(np.hstack(lower))
        Ks = kernels[sz]
        R = Ks - L @ (L.conj().T @ Ks)
        U, sv, _ = np.linalg.svd(R, full_matrices=False)
        if sv.size < count or sv[count - 1] < 1e-6 * max(sv[0], 1e-300):
            raise IllPosedStructureError(f"cannot find {count} independent chain tops of length {sz}")
        G = U[:, :count]
        if rng is not None:
            Qm, _ = np.linalg.qr(rng.normal(size=(count, count)) + 1j * rng.normal(size=(count, count)))
            G = G @ Qm
            if L.shape[1]:
                G = G + 0.5 * L @ (rng.normal(size=(L.shape[1], count)) + 1j * rng.normal(size=(L.shape[1], count)))
        tops[sz] = [G[:, c] for c in range(count)]

    chains = []
    for sz in sorted(tops, reverse=True):
        for v in tops[sz]:
            cols = [v]
            for _ in range(sz - 1):
                cols.append(-B @ cols[-1])
            X = V @ np.column_stack(cols[::-1])  # column j-1 holds ξ_j
            X = X / np.linalg.norm(X[:, 0])
            chains.append(X * _phase(X[:, 0]))

    res = 0.0
    for c in chains:
        prev = np.zeros(g.shape[0], dtype=complex)
        for j in range(c.shape[1]):
            res = max(res, float(np.linalg.norm(g @ c[:, j] - lam * c[:, j] + prev)))
            prev = c[:, j]
    return JordanChainSet(complex(lam), float(np.angle(lam)), chains, tuple(sizes),
                          block_grouping(sizes), staircase, w[inside], res)
