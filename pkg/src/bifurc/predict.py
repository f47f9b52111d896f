"""First-order prediction of how a multiple eigenvalue on U splits.

Given chains at ``λ0`` (scaled as ``η_{i,j} = (-i λ0)^j ξ_{i,j}``) and the
coefficient ``A0 = A(t0)``:

* ``S[i, i'] = <A0 η_{i,1}, η_{i',1}>``
* ``X[i, i'] = (η_{i,j_i}, η_{i',1})_G``
* ``d = S X^{-1} diag((-1)^{j-1} (i λ0)^j)``

For each size group ``ℓ`` the speeds ``a_{ℓ,p}`` are the roots of
``det(S_head - z X̂_ℓ)``, and the eigenvalues behave like

    λ - λ0 ≈ i λ0 · w,
    w = sgn(t a) |a t|^(1/n) e^{2πi(q-1)/n}                     (n odd)
    w = |a t|^(1/n) e^{2πi(q-1)/n} e^{iπ(1 - sgn(t a))/(2n)}   (n even)

Branches with real ``w`` stay on the circle to first order.  Under the
convexity assumption a Krein-positive eigenvalue on U moves
counter-clockwise as ``t`` grows, so an on-circle branch is Krein-positive
exactly when ``sgn(t) · sgn(w) > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import ConsistencyError, NumericalError, StructureError
from .jordan import EtaChainSet, Grouping, JordanChainSet, block_grouping, eta_chains, jordan_chains
from .krein import krein_pairing, krein_signature
from .symplectic import standard_J

ON_POS = "on-circle Krein-positive"
ON_NEG = "on-circle Krein-negative"
OFF = "off-circle"


def _blocks(grouping: Grouping):
    off = grouping.offsets()
    return [slice(off[l], off[l + 1]) for l in range(grouping.s)]


@dataclass(frozen=True, eq=False)
class BifurcationMatrices:
    S: np.ndarray
    X: np.ndarray
    d: np.ndarray
    sizes: tuple
    grouping: Grouping
    lam0: complex
    cond_X: float

    def block(self, name: str, l1: int, l2: int) -> np.ndarray:
        """Sub-block ``(ℓ1, ℓ2)`` (1-based) of ``S``, ``X`` or ``d``."""
        M = getattr(self, name)
        b = _blocks(self.grouping)
        return M[b[l1 - 1], b[l2 - 1]]

    def to_dict(self) -> dict:
        c = lambda M: [[[z.real, z.imag] for z in row] for row in M]
        return {"S": c(self.S), "X": c(self.X), "d": c(self.d), "sizes": list(self.sizes),
                "lambda0": [self.lam0.real, self.lam0.imag], "cond_X": self.cond_X}


def _xi_first(etas: EtaChainSet) -> np.ndarray:
    return etas.first() / (-1j * etas.lam0)


def build_S(etas: EtaChainSet, A0, tol: float = 1e-10) -> np.ndarray:
    """Gram matrix of ``<A0 ., .>`` on the first chain vectors.

    Raises
    ------
    ConsistencyError
        If the η-form and the ξ-form differ (they agree because the scaling
        factors are unimodular).
    """
    A0 = np.asarray(A0, dtype=float)
    H = etas.first()
    S = (H.conj().T @ A0 @ H).T
    Xi = _xi_first(etas)
    S_xi = (Xi.conj().T @ A0 @ Xi).T
    scale = max(1.0, np.abs(S).max())
    if np.abs(S - S_xi).max() > tol * scale:
        raise ConsistencyError("S differs between the scaled and unscaled chain forms")
    return 0.5 * (S + S.conj().T)


def build_X(etas: EtaChainSet, tol: float = 1e-6) -> np.ndarray:
    """Krein pairings of top chain vectors against first chain vectors.

    Raises
    ------
    StructureError
        When a strictly-lower block is not zero or a diagonal block is not
        Hermitian, which only happens for corrupted chains.
    """
    X = krein_pairing(etas.last(), etas.first())
    lam = etas.lam0
    J = standard_J(etas.first().shape[0])
    f = -1j * lam
    X_xi = np.empty_like(X)
    for i, ci in enumerate(etas.chains):
        j = ci.shape[1]
        top = ci[:, -1] / f ** j
        for i2, c2 in enumerate(etas.chains):
            first = c2[:, 0] / f
            X_xi[i, i2] = (-1) ** (j - 1) * 1j ** j * lam ** (j - 1) * np.vdot(J @ first, top)
    scale = max(1.0, np.abs(X).max())
    if np.abs(X - X_xi).max() > 1e-10 * scale:
        raise ConsistencyError("X differs between the scaled and unscaled chain forms")
    b = _blocks(etas.grouping)
    for l2 in range(len(b)):
        for l1 in range(l2):
            low = np.abs(X[b[l2], b[l1]]).max()
            if low > tol * scale:
                raise StructureError(f"X block ({l2 + 1},{l1 + 1}) should vanish but has size {low:.3e}")
        D = X[b[l2], b[l2]]
        if np.abs(D - D.conj().T).max() > tol * scale:
            raise StructureError(f"X diagonal block {l2 + 1} is not Hermitian")
    return X


def build_d(S, X, sizes, lam0: complex) -> np.ndarray:
    """``d = S X^{-1} Λ`` with ``Λ = diag((-1)^{j_i-1} (i λ0)^{j_i})``.

    Raises
    ------
    NumericalError
        If ``X`` is numerically singular.
    """
    X = np.asarray(X, dtype=complex)
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"X is numerically singular (condition number {cond:.3e})")
    j = np.asarray(sizes)
    lam_diag = (-1.0) ** (j - 1) * (1j * lam0) ** j
    return np.linalg.solve(X.T, np.asarray(S, dtype=complex).T).T * lam_diag[None, :]


def bifurcation_matrices(etas: EtaChainSet, A0, tol: float = 1e-6) -> BifurcationMatrices:
    S = build_S(etas, A0)
    X = build_X(etas, tol)
    d = build_d(S, X, etas.sizes, etas.lam0)
    return BifurcationMatrices(S, X, d, etas.sizes, etas.grouping, etas.lam0, float(np.linalg.cond(X)))


def _head(M, grouping, l):
    off = grouping.offsets()
    return M[:off[l], :off[l]], off[l - 1], off[l]


def branch_roots(S, X, grouping: Grouping, l: int, tol: float = 1e-8) -> np.ndarray:
    """Real roots ``a_{ℓ,p}`` of ``det(S_head - z X̂_ℓ)`` (``ℓ`` is 1-based).

    Solved as a generalized eigenproblem by QZ; the ``m_ℓ`` finite
    eigenvalues are kept.

    Raises
    ------
    NumericalError
        For roots that are not real or are too close to zero.
    """
    Sh, lo, hi = _head(np.asarray(S, dtype=complex), grouping, l)
    Xh = np.zeros_like(Sh)
    Xh[lo:hi, lo:hi] = np.asarray(X, dtype=complex)[lo:hi, lo:hi]
    (alpha, beta) = sla.eig(Sh, Xh, right=False, homogeneous_eigvals=True)
    mag = np.abs(beta) / np.hypot(np.abs(alpha), np.abs(beta))
    keep = np.argsort(-mag)[: hi - lo]
    if np.any(mag[keep] < 1e-12):
        raise NumericalError(f"pencil for group {l} has fewer than {hi - lo} finite roots")
    z = alpha[keep] / beta[keep]
    if np.any(np.abs(z.imag) > tol * (1 + np.abs(z.real)) + 1e-7 * np.abs(z)):
        raise NumericalError(f"branch roots of group {l} are not real: {z}")
    a = np.sort(z.real)
    if np.any(np.abs(a) <= tol):
        raise NumericalError(f"branch root of group {l} is (numerically) zero: {a}")
    return a


def weak_condition(S, grouping: Grouping) -> dict:
    """Leading block determinants of ``S``; all nonzero is the weaker sufficient gate."""
    off = grouping.offsets()
    dets = [complex(np.linalg.det(np.asarray(S)[:off[l], :off[l]])) for l in range(1, grouping.s + 1)]
    scale = max(1.0, np.abs(S).max())
    ok = all(abs(x) > 1e-10 * scale ** (off[l + 1]) for l, x in enumerate(dets))
    return {"determinants": dets, "satisfied": ok}


# --------------------------------------------------------------------------
# branch fates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    l: int
    p: int
    q: int
    n: int
    a: float
    coef_pos: complex  # λ - λ0 ≈ coef_pos * t^(1/n) for t > 0
    coef_neg: complex  # λ - λ0 ≈ coef_neg * |t|^(1/n) for t < 0
    fate_pos: str
    fate_neg: str

    @property
    def exponent(self) -> float:
        return 1.0 / self.n

    @property
    def star_angle(self) -> float:
        return 2 * np.pi / self.n

    def fate(self, t: float) -> str:
        return self.fate_pos if t > 0 else self.fate_neg

    def deviation(self, t: float) -> complex:
        c = self.coef_pos if t > 0 else self.coef_neg
        return c * abs(t) ** (1.0 / self.n)


def star_factor(n: int, a: float, q: int, sign_t: int) -> complex:
    """``w / |t|^(1/n)`` for the branch ``q`` and the sign of ``t``."""
    st = np.sign(sign_t * a)
    root = abs(a) ** (1.0 / n) * np.exp(2j * np.pi * (q - 1) / n)
    if n % 2:
        return st * root
    return root * np.exp(1j * np.pi * (1 - st) / (2 * n))


def _fate(w: complex, sign_t: int, n: int) -> str:
    if abs(w.imag) > 1e-9 * abs(w):
        return OFF
    return ON_POS if sign_t * w.real > 0 else ON_NEG


@dataclass(frozen=True, eq=False)
class BranchPrediction:
    lam0: complex
    theta0: float
    branches: list
    roots: dict
    grouping: Grouping

    def values(self, t: float) -> np.ndarray:
        """Predicted eigenvalues ``λ0 + leading term`` of every branch."""
        return np.array([self.lam0 + b.deviation(t) for b in self.branches])

    def fates(self, t: float) -> list:
        return [b.fate(t) for b in self.branches]

    def to_dict(self) -> dict:
        return {
            "lambda0": [self.lam0.real, self.lam0.imag],
            "theta0": self.theta0,
            "grouping": {"s": self.grouping.s, "m": list(self.grouping.m), "n": list(self.grouping.n)},
            "roots": {str(l): list(map(float, r)) for l, r in self.roots.items()},
            "branches": [
                {"l": b.l, "p": b.p, "q": b.q, "n": b.n, "a": b.a, "exponent": b.exponent,
                 "star_angle": b.star_angle,
                 "coef_t_pos": [b.coef_pos.real, b.coef_pos.imag],
                 "coef_t_neg": [b.coef_neg.real, b.coef_neg.imag],
                 "fate_t_pos": b.fate_pos, "fate_t_neg": b.fate_neg}
                for b in self.branches
            ],
        }


def predict_branches(roots: dict, lam0: complex, grouping: Grouping) -> BranchPrediction:
    """All ``Σ m_ℓ n_ℓ`` branches with leading terms and fates for both signs of t.

    Parameters
    ----------
    roots : dict
        ``ℓ -> array of a_{ℓ,p}`` (1-based ``ℓ``).
    """
    lam0 = complex(lam0)
    out = []
    for l in range(1, grouping.s + 1):
        n = grouping.n[l - 1]
        for p, a in enumerate(roots[l], start=1):
            for q in range(1, n + 1):
                wp = star_factor(n, a, q, 1)
                wn = star_factor(n, a, q, -1)
                out.append(Branch(l, p, q, n, float(a), 1j * lam0 * wp, 1j * lam0 * wn,
                                  _fate(wp, 1, n), _fate(wn, -1, n)))
    return BranchPrediction(lam0, float(np.angle(lam0)), out, dict(roots), grouping)


@dataclass(frozen=True, eq=False)
class Analysis:
    """Everything the pipeline produced at one ``(t0, λ0)``."""

    chains: JordanChainSet
    etas: EtaChainSet
    matrices: BifurcationMatrices
    prediction: BranchPrediction
    weak: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"chains": self.chains.to_dict(), "matrices": self.matrices.to_dict(),
                "prediction": self.prediction.to_dict(), "weak_condition": {
                    "satisfied": self.weak.get("satisfied"),
                    "determinants": [[z.real, z.imag] for z in self.weak.get("determinants", [])]}}


def analyze_bifurcation(gamma0, A0, lam0: complex, tol: float = 1e-8, cluster_radius: float = 1e-2,
                        rng: Optional[np.random.Generator] = None) -> Analysis:
    """Chains, S, X, d, roots and branch prediction at one eigenvalue."""
    ch = jordan_chains(gamma0, lam0, tol=tol, cluster_radius=cluster_radius, rng=rng)
    et = eta_chains(ch)
    mats = bifurcation_matrices(et, A0)
    roots = {l: branch_roots(mats.S, mats.X, ch.grouping, l) for l in range(1, ch.grouping.s + 1)}
    pred = predict_branches(roots, ch.lam0, ch.grouping)
    return Analysis(ch, et, mats, pred, weak_condition(mats.S, ch.grouping))


def positive_inertia(X, grouping: Grouping, l: int) -> int:
    """Positive inertia index of the diagonal block ``X^{(ℓℓ)}``."""
    b = _blocks(grouping)[l - 1]
    return krein_signature(np.asarray(X)[b, b]).p
