"""Small linear-algebra helpers shared by every module."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import ContractError, NumericalError


def standard_J(dim: int) -> np.ndarray:
    """The standard skew form ``[[0, I], [-I, 0]]`` of size ``dim``."""
    if dim <= 0 or dim % 2:
        raise ContractError(f"symplectic dimension must be a positive even integer, got {dim}")
    n = dim // 2
    J = np.zeros((dim, dim))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def symplecticity_defect(gamma: np.ndarray) -> float:
    """Frobenius norm of ``gamma^T J gamma - J``."""
    J = standard_J(gamma.shape[0])
    return float(np.linalg.norm(gamma.T @ J @ gamma - J))


def symplectic_inverse(gamma: np.ndarray) -> np.ndarray:
    # gamma^{-1} = J^T gamma^T J for symplectic gamma
    J = standard_J(gamma.shape[0])
    return J.T @ gamma.T @ J


def reproject(gamma: np.ndarray, iterations: int = 3) -> np.ndarray:
    """Pull an almost-symplectic matrix back onto Sp(2n).

    Newton-type right correction ``gamma <- gamma (I + J E / 2)`` with
    ``E = gamma^T J gamma - J``; quadratically convergent for small defects.
    """
    J = standard_J(gamma.shape[0])
    g = np.array(gamma, dtype=float)
    for _ in range(iterations):
        E = g.T @ J @ g - J
        E = 0.5 * (E - E.T)
        g = g @ (np.eye(g.shape[0]) + 0.5 * J @ E)
    return g


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def hermitize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def rotation(theta: float) -> np.ndarray:
    """``exp(theta J_2)``: the flow of ``A = Id_2`` after time ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def darboux_basis(omega: np.ndarray) -> np.ndarray:
    """Real ``P`` with ``P^T omega P = J`` for a nondegenerate real skew ``omega``."""
    omega = 0.5 * (omega - omega.T)
    dim = omega.shape[0]
    T, Z = sla.schur(omega, output="real")
    n = dim // 2
    cols_e, cols_f = [], []
    k = 0
    while k < dim:
        s = T[k, k + 1] if k + 1 < dim else 0.0
        if abs(s) <= 1e-14 * max(1.0, np.abs(T).max()):
            raise NumericalError("skew form is degenerate")
        e, f = Z[:, k], Z[:, k + 1]
        if s < 0:
            e, f, s = f, e, -s
        r = np.sqrt(s)
        cols_e.append(e / r)
        cols_f.append(f / r)
        k += 2
    P = np.column_stack(cols_e + cols_f)
    if P.shape[1] != 2 * n:
        raise NumericalError("skew form is degenerate")
    return P


def random_symplectic(dim: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """A well-conditioned random element of Sp(dim) (product of a shear and a rotation)."""
    n = dim // 2
    S = rng.normal(size=(n, n)) * scale
    S = 0.5 * (S + S.T)
    shear = np.eye(dim)
    shear[:n, n:] = S
    H = rng.normal(size=(dim, dim)) * scale
    H = 0.5 * (H + H.T)
    return shear @ sla.expm(standard_J(dim) @ H)


def symplectic_sum(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    """Interleaved block embedding ``M1 ⋄ M2`` of two even-sized square matrices.

    With ``Mi = [[Mi11, Mi12], [Mi21, Mi22]]`` split into equal quarters the
    result is ``[[M111, 0, M112, 0], [0, M211, 0, M212], [M121, 0, M122, 0],
    [0, M221, 0, M222]]``; it is symplectic whenever both inputs are.
    """
    M1 = np.asarray(M1)
    M2 = np.asarray(M2)
    for M in (M1, M2):
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise ContractError(f"symplectic sum needs even square matrices, got shape {M.shape}")
    k1, k2 = M1.shape[0] // 2, M2.shape[0] // 2
    k = k1 + k2
    out = np.zeros((2 * k, 2 * k), dtype=np.result_type(M1, M2))
    i1 = np.r_[0:k1, k:k + k1]
    i2 = np.r_[k1:k, k + k1:2 * k]
    out[np.ix_(i1, i1)] = M1
    out[np.ix_(i2, i2)] = M2
    return out
