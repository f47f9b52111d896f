"""Reduction of a flow to an invariant symplectic subspace.

Given a family of spectral divisions ``Λ(t) ∪ Λ̃(t)`` of ``γ(t)``:

* :func:`riesz_projector` builds the spectral projector by contour quadrature;
* :func:`symplectic_frame` builds a smooth symplectic basis ``Q(t)`` of the
  invariant subspace whose derivative lies in the symplectic complement;
* :func:`reduced_monodromy` gives ``M_Q = -J Qᵀ J γ Q``, which solves its own
  Hamiltonian ODE with coefficient ``Qᵀ A Q``;
* :func:`decomposition_residual` checks ``γ Y = Y (M_Q ⋄ M_Q̃)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import ContourError, ContractError, FrameError, ReductionIntegrityError
from .flow import HamiltonianCurve, as_matrix, sampled_curve, curve_to_dict
from .symplectic import standard_J, symmetrize, symplectic_sum


# --------------------------------------------------------------------------
# spectral division and projectors
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralDivision:
    """Split of the spectrum into the selected part ``Λ`` and its complement."""

    selected: np.ndarray
    complement: np.ndarray
    closed: bool
    separation: float

    @property
    def k(self) -> int:
        return self.selected.size // 2

    def contours(self, shrink: float = 0.5):
        """Circles around each selected eigenvalue, of radius ``shrink`` times the gap to ``Λ̃``."""
        return _contours(self.selected, self.complement, shrink)

    def complement_contours(self, shrink: float = 0.5):
        return _contours(self.complement, self.selected, shrink)


def _closure_defect(vals: np.ndarray) -> float:
    """How far ``vals`` is from being closed under ``λ ↦ conj(λ)`` and ``λ ↦ 1/conj(λ)``."""
    if vals.size == 0:
        return 0.0
    out = 0.0
    for img in (vals.conj(), 1.0 / vals.conj()):
        C = np.abs(vals[:, None] - img[None, :])
        r, c = linear_sum_assignment(C)
        out = max(out, C[r, c].max())
    return float(out)


def spectral_division(values, mask, tol: float = 1e-6) -> SpectralDivision:
    """Division of ``values`` into ``values[mask]`` and the rest."""
    values = np.asarray(values, dtype=complex)
    mask = np.asarray(mask, dtype=bool)
    sel, rest = values[mask], values[~mask]
    if sel.size == 0 or sel.size % 2:
        raise ContractError(f"the selected part must have positive even size, got {sel.size}")
    closed = _closure_defect(sel) <= tol and _closure_defect(rest) <= tol
    sep = float(np.abs(sel[:, None] - rest[None, :]).min()) if rest.size else np.inf
    return SpectralDivision(sel, rest, bool(closed), sep)


def _contours(inside, outside, shrink):
    inside = np.asarray(inside)
    if outside.size == 0:
        c = complex(inside.mean())
        return [(c, float(np.abs(inside - c).max()) + 1.0)]
    # group selected eigenvalues closer than the gap, one circle per group
    gap = np.abs(inside[:, None] - outside[None, :]).min()
    r = shrink * gap
    groups = []
    for z in inside:
        for g in groups:
            if np.abs(np.array(g) - z).min() < r:
                g.append(z)
                break
        else:
            groups.append([z])
    out = []
    for n, g in enumerate(groups):
        g = np.array(g)
        c = complex(g.mean())
        ext = float(np.abs(g - c).max())
        others = np.concatenate([outside] + [np.array(h) for m, h in enumerate(groups) if m != n])
        dout = float(np.abs(others - c).min())
        if dout <= 1.05 * ext:
            raise ContourError(f"no separating circle around {c:.6g}")
        out.append((c, 0.5 * (ext + dout)))
    return out


def riesz_projector(gamma, contours, nodes: int = 64, tol: float = 1e-10, max_nodes: int = 1024,
                    realify: bool = True) -> np.ndarray:
    """Spectral projector ``(2πi)⁻¹ ∮ (z - γ)⁻¹ dz`` by the trapezoid rule.

    Parameters
    ----------
    gamma : (m, m) array
    contours : list of (center, radius) or a single pair
        Circles; the projector is the sum over all of them.
    nodes : int
        Starting number of nodes per circle, doubled until ``‖P² - P‖ <= tol``.
    realify : bool
        Drop the imaginary part (which is at rounding level when the enclosed
        set is closed under conjugation).

    Raises
    ------
    ContourError
        An eigenvalue lies within ``10 tol`` of a contour, or the quadrature
        did not converge within ``max_nodes``.
    """
    g = as_matrix(gamma)
    if isinstance(contours, tuple) and len(contours) == 2 and np.isscalar(contours[1]):
        contours = [contours]
    vals = np.linalg.eigvals(g)
    for c, r in contours:
        d = np.abs(np.abs(vals - c) - r)
        i = int(np.argmin(d))
        if d[i] <= 10 * tol * max(1.0, r):
            raise ContourError(f"eigenvalue {vals[i]:.10g} lies on the contour |z - {c:.6g}| = {r:.6g}")
    m = g.shape[0]
    I = np.eye(m)
    n = nodes
    while True:
        P = np.zeros((m, m), dtype=complex)
        for c, r in contours:
            w = r * np.exp(2j * np.pi * np.arange(n) / n)
            for wk in w:
                P += wk * np.linalg.solve((c + wk) * I - g, I)
        P /= n
        defect = np.linalg.norm(P @ P - P, 2)
        if defect <= tol:
            break
        if 2 * n > max_nodes:
            raise ContourError(f"projector quadrature did not converge at {n} nodes (‖P²-P‖ = {defect:.3g})")
        n *= 2
    if realify:
        if np.abs(P.imag).max() > max(1e3 * tol, 1e-8):
            raise ContourError("enclosed eigenvalues are not closed under conjugation")
        return P.real
    return P


def division_path(gammas, mask0) -> list:
    """Follow a division along a sequence of matrices by nearest-value matching."""
    out = []
    prev = None
    for g in gammas:
        v = np.linalg.eigvals(g)
        if prev is None:
            mask = np.asarray(mask0, dtype=bool)
            vals = v
        else:
            C = np.abs(prev[:, None] - v[None, :])
            _, perm = linear_sum_assignment(C)
            vals = v[perm]
        out.append(spectral_division(vals, mask))
        prev = vals
    return out


# --------------------------------------------------------------------------
# symplectic frames
# --------------------------------------------------------------------------

def _omega(x, y, J):
    return x @ J @ y


def symplectic_gram_schmidt(W: np.ndarray, pairs: Optional[Sequence] = None, tol: float = 1e-10):
    """Symplectic basis ``[e_1..e_k, f_1..f_k]`` of the span of ``W``.

    Parameters
    ----------
    W : (2n, 2k) array
    pairs : sequence of (i, j), optional
        Column pairs to use as ``(e, f)`` pivots, in order.  When omitted,
        the pair with the largest ``|ωxy|`` among the remaining columns is
        taken first at every step.

    Returns
    -------
    Q : (2n, 2k) array
        ``Qᵀ J Q = J_{2k}``.
    pairs : list of (i, j)
    """
    W = np.array(W, dtype=float)
    dim, m = W.shape
    if m % 2:
        raise ContractError("need an even number of columns")
    k = m // 2
    J = standard_J(dim)
    scale = max(1.0, np.abs(W).max()) ** 2
    E, F, used = [], [], []
    cols = [W[:, i].copy() for i in range(m)]
    remaining = list(range(m))
    for step in range(k):
        # orthogonalize the remaining columns against the accepted pairs
        for i in remaining:
            v = cols[i]
            for e, f in zip(E, F):
                v = v - _omega(v, f, J) * e + _omega(v, e, J) * f
            cols[i] = v
        if pairs is not None:
            i, j = pairs[step]
        else:
            best = (-1.0, None)
            for a in remaining:
                for b in remaining:
                    if a < b:
                        w = abs(_omega(cols[a], cols[b], J))
                        if w > best[0]:
                            best = (w, (a, b))
            i, j = best[1]
        s = _omega(cols[i], cols[j], J)
        if abs(s) <= tol * scale:
            raise FrameError(f"symplectic Gram-Schmidt breakdown: pivot {abs(s):.3g}")
        e = cols[i] / np.sqrt(abs(s))
        f = np.sign(s) * cols[j] / np.sqrt(abs(s))
        E.append(e)
        F.append(f)
        used.append((i, j))
        remaining = [c for c in remaining if c not in (i, j)]
    return np.column_stack(E + F), used


@dataclass(frozen=True, eq=False)
class SymplecticFrame:
    """Symplectic bases ``Q(t) = T(t) V(t)`` of an invariant family ``E_t``."""

    times: np.ndarray
    Q: np.ndarray
    T: np.ndarray
    V: np.ndarray
    k: int
    defect: np.ndarray = field(repr=False)

    @property
    def max_defect(self) -> float:
        return float(self.defect.max())


def frame_defect(Q: np.ndarray) -> float:
    k = Q.shape[1] // 2
    return float(np.linalg.norm(Q.T @ standard_J(Q.shape[0]) @ Q - standard_J(2 * k), 2))


def seed_basis(P: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Symplectic basis of the range of a real projector."""
    U, s, _ = np.linalg.svd(P)
    r = int(np.sum(s > 0.5))
    Q, _ = symplectic_gram_schmidt(U[:, :r], tol=tol)
    return Q


def _derivative(X: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.gradient(X, t, axis=0, edge_order=2)


def symplectic_frame(projectors, seed: np.ndarray, grid, tol: float = 1e-8) -> SymplecticFrame:
    """Symplectic frame along a path of projectors.

    ``T(t)`` is the symplectic Gram-Schmidt of ``P(t)·seed`` (pivot pairs
    chosen once at ``grid[0]``); ``V`` solves ``V' = J_{2k} Tᵀ J_{2n} T' V``
    with ``V(grid[0]) = Id``, ``T'`` from second-order differences on the
    grid and a midpoint exponential step.  Then ``Q = T V``.

    Raises
    ------
    ContractError
        Projector path jumps (``‖ΔP‖ >= 0.5``) or the seed is not symplectic.
    FrameError
        Gram-Schmidt breakdown or frame defect above ``tol``.
    """
    Ps = np.asarray(projectors, dtype=float)
    grid = np.asarray(grid, dtype=float)
    seed = np.asarray(seed, dtype=float)
    if Ps.shape[0] != grid.size:
        raise ContractError("one projector per grid point is required")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ContractError("grid must be increasing")
    for a, b in zip(Ps[:-1], Ps[1:]):
        if np.linalg.norm(b - a, 2) >= 0.5:
            raise ContractError("projector path is not continuous on this grid; refine it")
    if frame_defect(seed) > max(tol, 1e-8):
        raise ContractError("seed is not a symplectic basis")
    dim, m = seed.shape
    k = m // 2
    J, Jk = standard_J(dim), standard_J(m)
    Ts = np.empty((grid.size, dim, m))
    pairs = None
    for i, P in enumerate(Ps):
        Ts[i], pairs = symplectic_gram_schmidt(P @ seed, pairs)
    if grid.size == 1:
        V = np.eye(m)[None]
    else:
        dT = _derivative(Ts, grid)
        Sig = np.array([symmetrize(T.T @ J @ d) for T, d in zip(Ts, dT)])
        V = np.empty((grid.size, m, m))
        V[0] = np.eye(m)
        for i in range(grid.size - 1):
            h = grid[i + 1] - grid[i]
            V[i + 1] = sla.expm(h * Jk @ (0.5 * (Sig[i] + Sig[i + 1]))) @ V[i]
    Q = Ts @ V
    defect = np.array([frame_defect(q) for q in Q])
    if defect.max() > tol:
        raise FrameError(f"frame defect {defect.max():.3g} exceeds {tol:.3g}")
    return SymplecticFrame(grid.copy(), Q, Ts, V, k, defect)


# --------------------------------------------------------------------------
# reduced system
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Reduced monodromy ``M_Q`` and coefficient ``B_Q = Qᵀ A Q`` on a grid.

    ``residual[i]`` compares the difference quotient of ``M_Q`` over step ``i``
    with ``J B_Q M_Q`` at the step midpoint.
    """

    times: np.ndarray
    M: np.ndarray
    B: np.ndarray
    residual: np.ndarray
    spectrum_error: np.ndarray
    frame: SymplecticFrame = field(repr=False)

    @property
    def max_residual(self) -> float:
        return float(self.residual.max()) if self.residual.size else 0.0

    def to_scenario(self, name: str = "reduced") -> dict:
        """Scenario document for the reduced system (sampled ``B_Q`` plus ``M_Q`` at the first time)."""
        curve = sampled_curve(self.times, self.B)
        return {"name": name, "curve": curve_to_dict(curve), "gamma0": self.M[0].tolist(),
                "t_gamma0": float(self.times[0]), "grid": {"start": float(self.times[0]),
                                                           "stop": float(self.times[-1]),
                                                           "num": int(self.times.size)}}


def reduced_matrix(gamma, Q) -> np.ndarray:
    m = Q.shape[1]
    return -standard_J(m) @ Q.T @ standard_J(Q.shape[0]) @ as_matrix(gamma) @ Q


def _match_error(a, b) -> float:
    C = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


def reduced_monodromy(gammas, frame: SymplecticFrame, curve: HamiltonianCurve, selected=None,
                      spectrum_tol: float = 1e-6) -> ReducedSystem:
    """Reduced monodromy on the frame grid.

    Parameters
    ----------
    gammas : (T, 2n, 2n) array
        ``γ(t)`` on ``frame.times``.
    selected : sequence of arrays, optional
        ``Λ(t)`` per grid point; when given, the spectrum of ``M_Q(t)`` must
        match it within ``spectrum_tol``.

    Raises
    ------
    ReductionIntegrityError
        Spectrum mismatch.
    """
    gammas = np.asarray(gammas, dtype=float)
    t = frame.times
    if gammas.shape[0] != t.size:
        raise ContractError("one γ per grid point is required")
    Jk = standard_J(2 * frame.k)
    M = np.array([reduced_matrix(g, q) for g, q in zip(gammas, frame.Q)])
    B = np.array([symmetrize(q.T @ curve(s) @ q) for s, q in zip(t, frame.Q)])
    res = np.empty(max(t.size - 1, 0))
    for i in range(t.size - 1):
        h = t[i + 1] - t[i]
        Bm = 0.5 * (B[i] + B[i + 1])
        Mm = 0.5 * (M[i] + M[i + 1])
        res[i] = np.linalg.norm((M[i + 1] - M[i]) / h - Jk @ Bm @ Mm, 2)
    err = np.zeros(t.size)
    if selected is not None:
        for i, (m, lam) in enumerate(zip(M, selected)):
            err[i] = _match_error(np.linalg.eigvals(m), lam)
        if err.max() > spectrum_tol:
            i = int(np.argmax(err))
            raise ReductionIntegrityError(f"spectrum of the reduced monodromy misses the selected "
                                          f"eigenvalues by {err[i]:.3g} at t = {t[i]:.6g}")
    return ReducedSystem(t.copy(), M, B, res, err, frame)


def assemble_Y(Q: np.ndarray, Qc: np.ndarray) -> np.ndarray:
    """Columns of ``Q`` and ``Q̃`` in the order matching ``symplectic_sum``."""
    k1, k2 = Q.shape[1] // 2, Qc.shape[1] // 2
    k = k1 + k2
    Y = np.empty((Q.shape[0], 2 * k))
    Y[:, np.r_[0:k1, k:k + k1]] = Q
    Y[:, np.r_[k1:k, k + k1:2 * k]] = Qc
    return Y


def decomposition_residual(gamma, Q, Qc) -> float:
    """``‖γ Y - Y (M_Q ⋄ M_Q̃)‖``, relative to ``max(1, ‖γ‖)``."""
    g = as_matrix(gamma)
    Y = assemble_Y(Q, Qc)
    M = symplectic_sum(reduced_matrix(g, Q), reduced_matrix(g, Qc))
    return float(np.linalg.norm(g @ Y - Y @ M, 2) / max(1.0, np.linalg.norm(g, 2)))


@dataclass(frozen=True, eq=False)
class Reduction:
    """Both halves of a division along a grid."""

    divisions: list
    projectors: np.ndarray
    complement_projectors: np.ndarray
    reduced: ReducedSystem
    complement: ReducedSystem
    decomposition: np.ndarray
    complementarity: np.ndarray


def reduce_flow(curve: HamiltonianCurve, gammas, grid, mask0, nodes: int = 64, tol: float = 1e-8) -> Reduction:
    """Split a flow along a division followed from ``mask0`` at ``grid[0]``."""
    gammas = np.asarray(gammas, dtype=float)
    divs = division_path(gammas, mask0)
    for t, d in zip(grid, divs):
        if not d.closed:
            raise ContractError(f"division at t = {t:.6g} is not closed under conjugation and inversion")
    P = np.array([riesz_projector(g, d.contours(), nodes) for g, d in zip(gammas, divs)])
    Pc = np.array([riesz_projector(g, d.complement_contours(), nodes) for g, d in zip(gammas, divs)])
    comp = np.array([np.linalg.norm(a + b - np.eye(a.shape[0]), 2) for a, b in zip(P, Pc)])
    fr = symplectic_frame(P, seed_basis(P[0]), grid, tol)
    frc = symplectic_frame(Pc, seed_basis(Pc[0]), grid, tol)
    red = reduced_monodromy(gammas, fr, curve, [d.selected for d in divs])
    redc = reduced_monodromy(gammas, frc, curve, [d.complement for d in divs])
    dec = np.array([decomposition_residual(g, a, b) for g, a, b in zip(gammas, fr.Q, frc.Q)])
    return Reduction(divs, P, Pc, red, redc, dec, comp)
