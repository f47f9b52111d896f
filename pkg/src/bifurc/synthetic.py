"""Random symplectic matrices with a prescribed Jordan structure on U.

Used by the tests and demos.  A Jordan block ``exp(i(θ0 I + N))`` with ``N``
the nilpotent shift preserves the Hermitian form ``±F`` (``F`` the flip
matrix).  Realifying ``C^k`` turns ``Im(z^H H w)`` into a real symplectic
form; a Darboux basis for it then gives a real symplectic matrix whose
complexification has exactly the planted blocks at ``e^{±iθ0}``.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .symplectic import darboux_basis, random_symplectic, rotation, standard_J, symplectic_inverse, symplectic_sum


def _unitary_block(k: int, theta0: float) -> np.ndarray:
    N = np.diag(np.ones(k - 1), 1)
    return sla.expm(1j * (theta0 * np.eye(k) + N))


def planted_jordan(sizes: Sequence[int], theta0: float, rng: np.random.Generator,
                   signs: Optional[Sequence[int]] = None, mix: float = 0.5,
                   extra: Optional[np.ndarray] = None) -> np.ndarray:
    """Real symplectic matrix with Jordan blocks ``sizes`` at ``e^{iθ0}``.

    Parameters
    ----------
    sizes : sequence of int
    theta0 : float
        Must not be a multiple of ``π`` (the eigenvalue is non-real).
    rng : numpy.random.Generator
    signs : sequence of {+1, -1}, optional
        Sign of the invariant Hermitian form on each block; random if omitted.
    mix : float
        Scale of the random symplectic conjugation.
    extra : array, optional
        Symplectic matrix appended by symplectic sum before conjugation.
    """
    sizes = list(sizes)
    N = sum(sizes)
    if signs is None:
        signs = rng.choice([-1, 1], size=len(sizes))
    K = np.zeros((N, N), dtype=complex)
    H = np.zeros((N, N))
    o = 0
    for k, s in zip(sizes, signs):
        K[o:o + k, o:o + k] = _unitary_block(k, theta0)
        H[o:o + k, o:o + k] = s * np.fliplr(np.eye(k))
        o += k
    # realify: z = x + i y, u = (x, y)
    KR = np.block([[K.real, -K.imag], [K.imag, K.real]])
    R = np.hstack([np.eye(N), 1j * np.eye(N)])
    Omega = (R.conj().T @ H @ R).imag
    P = darboux_basis(Omega)
    g = np.linalg.solve(P, KR @ P)
    if extra is not None:
        g = symplectic_sum(g, np.asarray(extra, dtype=float))
    S = random_symplectic(g.shape[0], rng, mix)
    return S @ g @ symplectic_inverse(S)


def planted_unit_jordan(sizes: Sequence[int], lam: int, rng: np.random.Generator, mix: float = 0.5) -> np.ndarray:
    """Real symplectic matrix with a single even-size Jordan block at ``±1``.

    Uses the symplectic shear ``[[1, 1], [0, 1]]`` (one block of size 2) or
    the identity (two blocks of size 1) as building blocks; ``sizes`` must
    consist of 2s or pairs of 1s.
    """
    pieces = []
    ones = sizes.count(1)
    if ones % 2:
        raise ValueError("blocks of size 1 at ±1 come in pairs")
    for s in sizes:
        if s == 2:
            pieces.append(np.array([[1.0, 1.0], [0.0, 1.0]]))
        elif s != 1:
            raise ValueError("only sizes 1 and 2 are supported at ±1")
    pieces += [np.eye(2)] * (ones // 2)
    g = pieces[0]
    for p in pieces[1:]:
        g = symplectic_sum(g, p)
    g = lam * g
    S = random_symplectic(g.shape[0], rng, mix)
    return S @ g @ symplectic_inverse(S)


def random_positive_definite(dim: int, rng: np.random.Generator, floor: float = 0.5) -> np.ndarray:
    M = rng.normal(size=(dim, dim))
    return M @ M.T / dim + floor * np.eye(dim)


def random_partition(total_max: int, rng: np.random.Generator) -> list:
    """Uniform-ish random non-increasing partition of an integer ``<= total_max``."""
    n = int(rng.integers(1, total_max + 1))
    parts = []
    while n > 0:
        p = int(rng.integers(1, n + 1))
        parts.append(p)
        n -= p
    return sorted(parts, reverse=True)


__all__ = ["planted_jordan", "planted_unit_jordan", "random_positive_definite", "random_partition",
           "rotation", "standard_J"]
