"""Characteristic-polynomial coefficients re-centred at ``λ0`` and their orders in t.

``det(λ Id - γ(t)) = Σ_k c_k(t) (λ - λ0)^k``.  With Jordan sizes
``j_1 >= ... >= j_m`` at ``λ0`` (total ``N``), ``c_k(t) = O(t^φ(k))``, and
when ``N - k`` is the total size of the ``φ(k)`` largest blocks the limit

    c_k(t) / t^φ(k)  ->  (-1)^(N-k) c_N(0) Σ_{I} det d[I, I]

holds, the sum running over index sets ``I`` of ``φ(k)`` blocks with total
size ``N - k``.  Blowing up ``λ - λ0 = w t^(1/n_ℓ)`` isolates one size group
and leads to the polynomials ``Q_ℓ`` and ``Q̃_ℓ`` whose roots are the
rescaled first-order branch positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .flow import HamiltonianCurve, as_matrix, evaluate, propagate
from .jordan import Grouping, phi
from .predict import BifurcationMatrices, analyze_bifurcation


def charpoly_coeffs(gamma, lam0: complex) -> np.ndarray:
    """Coefficients ``c_0..c_{2n}`` of ``det(λ Id - γ)`` in powers of ``λ - λ0``.

    Built from the eigenvalues of ``γ - λ0 Id``, so coefficients that are
    tiny because eigenvalues are close to ``λ0`` keep their relative
    accuracy.
    """
    g = as_matrix(gamma)
    nu = np.linalg.eigvals(g - complex(lam0) * np.eye(g.shape[0]))
    return np.poly(nu)[::-1]


def cN0_from_spectrum(gamma, lam0: complex, N: int) -> complex:
    """``Π (λ0 - μ)`` over the eigenvalues ``μ`` of ``γ`` outside the ``N`` nearest to ``λ0``."""
    g = as_matrix(gamma)
    nu = np.linalg.eigvals(g - complex(lam0) * np.eye(g.shape[0]))
    nu = nu[np.argsort(np.abs(nu))][N:]
    return complex(np.prod(-nu))


def exact_order_sets(k: int, sizes: Sequence[int]) -> list:
    """Index sets ``I`` of ``φ(k)`` blocks whose sizes sum to ``N - k``.

    Empty when ``k`` is not an exact-order index (``N - k`` is not the total
    size of some ``φ(k)`` blocks).
    """
    sizes = list(sizes)
    f = phi(k, sizes)
    target = sum(sizes) - k
    return [I for I in combinations(range(len(sizes)), f) if sum(sizes[i] for i in I) == target]


def is_exact_order(k: int, sizes: Sequence[int]) -> bool:
    """``N - k`` equals the total size of the ``φ(k)`` largest blocks."""
    sizes = sorted(sizes, reverse=True)
    return 0 <= k <= sum(sizes) and sum(sizes[:phi(k, sizes)]) == sum(sizes) - k


def coefficient_limit(k: int, d: np.ndarray, sizes: Sequence[int], cN0: complex) -> complex:
    """``(-1)^(N-k) c_N(0) Σ_I det d[I, I]`` for an exact-order ``k``."""
    N = sum(sizes)
    tot = sum(np.linalg.det(d[np.ix_(I, I)]) if I else 1.0 for I in exact_order_sets(k, sizes))
    return complex((-1) ** (N - k) * cN0 * tot)


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    lam0: complex
    times: np.ndarray
    coeffs: np.ndarray  # (len(times), 2n+1)
    cN0: complex
    N: int
    norms: np.ndarray = field(repr=False, default=None)

    def to_csv_rows(self):
        for t, row in zip(self.times, self.coeffs):
            for k, c in enumerate(row):
                yield (float(t), k, float(abs(c)))


def coefficient_series(curve: HamiltonianCurve, gamma0, lam0: complex, t_samples, N: int,
                       t0: float = 0.0, tol: float = 1e-10) -> CoefficientSeries:
    """``c_k(t)`` on a ladder of times ``t0 + t_samples`` (either sign)."""
    ts = np.asarray(t_samples, dtype=float)
    g0 = as_matrix(gamma0)
    rows = np.empty((ts.size, g0.shape[0] + 1), dtype=complex)
    norms = np.empty(ts.size)
    for sgn in (1, -1):
        idx = np.flatnonzero(np.sign(ts) == sgn)
        if not idx.size:
            continue
        order = idx[np.argsort(np.abs(ts[idx]))]
        flow = propagate(curve, g0, np.concatenate([[t0], t0 + ts[order]]), tol)
        for i, gk in zip(order, flow.gammas[1:]):
            rows[i] = charpoly_coeffs(gk, lam0)
            norms[i] = np.linalg.norm(gk, 2)
    c0 = charpoly_coeffs(g0, lam0)
    return CoefficientSeries(complex(lam0), ts, rows, complex(c0[N]), N, norms)


@dataclass(frozen=True, eq=False)
class OrderReport:
    sizes: tuple
    per_k: list
    limits: list
    passed: bool

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "orders": self.per_k, "limits": self.limits, "passed": self.passed}


def verify_coeff_orders(curve: HamiltonianCurve, gamma0, lam0: complex, t_samples, sizes=None,
                        t0: float = 0.0, tol: float = 1e-10, slope_tol: float = 0.15,
                        limit_tol: float = 0.05, analysis=None,
                        noise_floor: Optional[float] = None) -> OrderReport:
    """Empirical vanishing orders of ``c_k(t)`` and the exact-order limits.

    For every ``k < N`` the least-squares slope of ``log|c_k|`` against
    ``log|t|`` must be at least ``φ(k) - slope_tol``.  For exact-order ``k``
    the ratio ``c_k(t) / t^φ(k)`` at the smallest ``|t|`` must be within
    ``limit_tol`` (relative) of the closed-form limit.  Samples below the
    noise floor ``1e3 eps ||γ||^(2n)`` are dropped and flagged; pass
    ``noise_floor`` to use a fixed floor instead (the coefficients come from
    eigenvalue products and keep relative accuracy well below that bound).
    """
    g0 = as_matrix(gamma0)
    if analysis is None:
        analysis = analyze_bifurcation(g0, evaluate(curve, t0), lam0)
    if sizes is None:
        sizes = analysis.chains.sizes
    sizes = tuple(sizes)
    lam0 = analysis.chains.lam0
    N = sum(sizes)
    ser = coefficient_series(curve, g0, lam0, t_samples, N, t0, tol)
    ts = np.abs(ser.times)
    eps = np.finfo(float).eps
    if noise_floor is None:
        floor = 1e3 * eps * np.maximum(1.0, ser.norms) ** g0.shape[0]
    else:
        floor = np.full(ts.size, float(noise_floor))
    per_k, limits = [], []
    ok = True
    small = int(np.argmin(ts))
    for k in range(N):
        f = phi(k, sizes)
        mag = np.abs(ser.coeffs[:, k])
        keep = mag > floor
        entry = {"k": k, "phi": f, "skipped_samples": int((~keep).sum())}
        if keep.sum() >= 2:
            slope = float(np.polyfit(np.log(ts[keep]), np.log(mag[keep]), 1)[0])
            entry["slope"] = slope
            entry["passed"] = bool(slope >= f - slope_tol)
        else:
            entry["slope"] = None
            entry["passed"] = True
            entry["below_noise_floor"] = True
        ok &= entry["passed"]
        per_k.append(entry)
        if is_exact_order(k, sizes):
            L = coefficient_limit(k, analysis.matrices.d, sizes, ser.cN0)
            t_s = ser.times[small]
            r = complex(ser.coeffs[small, k] / t_s ** f)
            rel = abs(r - L) / max(abs(L), 1e-300)
            lim = {"k": k, "phi": f, "t": float(t_s), "ratio": [r.real, r.imag], "limit": [L.real, L.imag],
                   "relative_error": rel, "passed": bool(rel <= limit_tol)}
            ok &= lim["passed"]
            limits.append(lim)
    return OrderReport(sizes, per_k, limits, bool(ok))


# --------------------------------------------------------------------------
# blow-up polynomials
# --------------------------------------------------------------------------

def tau(grouping: Grouping, l: int) -> int:
    n_l = grouping.n[l - 1]
    return int(sum(m * min(n, n_l) for m, n in zip(grouping.m, grouping.n)))


def _det_poly(fn, degree: int, radius: float) -> np.ndarray:
    """Coefficients (ascending) of the polynomial ``w -> fn(w)`` of known degree.

    Sampled at ``degree + 1`` points on a circle and inverted by FFT.
    """
    K = degree + 1
    w = radius * np.exp(2j * np.pi * np.arange(K) / K)
    vals = np.array([fn(x) for x in w])
    c = np.fft.fft(vals) / K
    return c * radius ** (-np.arange(K, dtype=float))


def _poly_roots(coef_asc: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(coef_asc[::-1], "f")
    return np.roots(c) if c.size > 1 else np.array([], dtype=complex)


def _trailing_embed(grouping, l, k):
    off = grouping.offsets()
    E = np.zeros((off[l], off[l]), dtype=complex)
    E[off[l - 1]:off[l], off[l - 1]:off[l]] = np.eye(off[l] - off[l - 1])
    return E


def Q_poly(mats: BifurcationMatrices, l: int) -> np.ndarray:
    """``Q_ℓ(w) = det(d_head + (-w)^n_ℓ E_ℓ)``, ascending coefficients."""
    g = mats.grouping
    off = g.offsets()
    n = g.n[l - 1]
    dh = mats.d[:off[l], :off[l]]
    E = _trailing_embed(g, l, n)
    deg = (off[l] - off[l - 1]) * n
    rad = max(1e-3, np.abs(mats.block("d", l, l)).max() ** (1.0 / n))
    return _det_poly(lambda w: np.linalg.det(dh + (-w) ** n * E), deg, rad)


def Q_tilde_poly(mats: BifurcationMatrices, l: int) -> np.ndarray:
    """``Q̃_ℓ(w)``: ``S_head`` with ``w^n (iλ0)^(-n) X^{(ℓℓ)}`` subtracted from its trailing block."""
    g = mats.grouping
    off = g.offsets()
    n = g.n[l - 1]
    lo, hi = off[l - 1], off[l]
    Sh = mats.S[:hi, :hi]
    Xt = np.zeros_like(Sh)
    Xt[lo:hi, lo:hi] = mats.X[lo:hi, lo:hi]
    c = (1j * mats.lam0) ** (-n)
    deg = (hi - lo) * n
    scale = np.abs(mats.block("S", l, l)).max() / max(np.abs(mats.block("X", l, l)).max(), 1e-300)
    rad = max(1e-3, scale ** (1.0 / n))
    return _det_poly(lambda w: np.linalg.det(Sh - w ** n * c * Xt), deg, rad)


def limit_poly_tilde(S, X, grouping: Grouping, l: int, lam0: complex) -> np.ndarray:
    """Ascending coefficients of ``Q̃_ℓ`` from raw ``S`` and ``X``."""
    mats = BifurcationMatrices(np.asarray(S, complex), np.asarray(X, complex), np.zeros_like(S, dtype=complex),
                               (), grouping, complex(lam0), 1.0)
    return Q_tilde_poly(mats, l)


def predicted_w_roots(roots_l: Sequence[float], n: int, lam0: complex) -> np.ndarray:
    """``w`` with ``(w / (i λ0))^n = a`` for every listed ``a``."""
    out = []
    for a in roots_l:
        base = complex(a) ** (1.0 / n) if a > 0 else abs(a) ** (1.0 / n) * np.exp(1j * np.pi / n)
        for q in range(n):
            out.append(1j * lam0 * base * np.exp(2j * np.pi * q / n))
    return np.array(out)


def match_distance(u, v) -> float:
    """Largest distance under the optimal pairing of two equal-size multisets."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.size != v.size:
        return np.inf
    if u.size == 0:
        return 0.0
    C = np.abs(u[:, None] - v[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


@dataclass(frozen=True, eq=False)
class BlowupFamily:
    l: int
    tau: int
    n: int
    K: int  # Σ_{ℓ'>ℓ} m n, the power of w split off from q(w, 0)
    t: float
    q_coeffs: np.ndarray  # q(w, t) at the smallest t, ascending in w
    q_limit: np.ndarray  # closed form (sign) c_N(0) w^K Q_ℓ(w)
    Q: np.ndarray
    Q_tilde: np.ndarray
    roots_Q: np.ndarray
    roots_Q_tilde: np.ndarray
    roots_predicted: np.ndarray
    limit_error: float

    def consistency(self) -> float:
        return max(match_distance(self.roots_Q, self.roots_Q_tilde),
                   match_distance(self.roots_Q, self.roots_predicted),
                   match_distance(self.roots_Q_tilde, self.roots_predicted))

    def to_dict(self) -> dict:
        c = lambda v: [[complex(z).real, complex(z).imag] for z in v]
        return {"l": self.l, "tau": self.tau, "n": self.n, "K": self.K, "t": self.t,
                "q_coeffs": c(self.q_coeffs), "q_limit": c(self.q_limit), "Q": c(self.Q),
                "Q_tilde": c(self.Q_tilde), "roots_Q": c(self.roots_Q), "roots_Q_tilde": c(self.roots_Q_tilde),
                "roots_predicted": c(self.roots_predicted), "limit_error": self.limit_error,
                "consistency": self.consistency()}


def blowup_polynomial(series: Optional[CoefficientSeries], l: int, mats: BifurcationMatrices,
                      roots_l: Optional[Sequence[float]] = None) -> BlowupFamily:
    """Blow-up family of size group ``ℓ`` (1-based).

    ``q(w, t) = Σ_k c_k(t) t^((k - τ)/n) w^k`` is evaluated at the smallest
    positive sample of ``series`` and compared with the closed form
    ``(-1)^(Σ_{ℓ'≤ℓ} m n) c_N(0) w^K Q_ℓ(w)``; ``limit_error`` is the largest
    coefficient difference relative to the largest closed-form coefficient.
    """
    g = mats.grouping
    n = g.n[l - 1]
    ta = tau(g, l)
    K = int(sum(m * nn for m, nn in zip(g.m[l:], g.n[l:])))
    Q = Q_poly(mats, l)
    Qt = Q_tilde_poly(mats, l)
    if roots_l is None:
        from .predict import branch_roots
        roots_l = branch_roots(mats.S, mats.X, g, l)
    pred = predicted_w_roots(roots_l, n, mats.lam0)
    q_t = np.array([])
    q_lim = np.array([])
    err = np.nan
    t_used = np.nan
    if series is not None:
        pos = np.flatnonzero(series.times > 0)
        if pos.size:
            i = pos[np.argmin(series.times[pos])]
            t_used = float(series.times[i])
            kk = np.arange(series.coeffs.shape[1])
            q_t = series.coeffs[i] * t_used ** ((kk - ta) / n)
            sign = (-1) ** int(sum(m * nn for m, nn in zip(g.m[:l], g.n[:l])))
            q_lim = np.zeros_like(q_t)
            q_lim[K:K + Q.size] = sign * series.cN0 * Q
            # only the degrees that survive in the limit are compared
            top = K + Q.size
            err = float(np.abs(q_t[:top] - q_lim[:top]).max() / max(np.abs(q_lim).max(), 1e-300))
    return BlowupFamily(l, ta, n, K, t_used, q_t, q_lim, Q, Qt, _poly_roots(Q), _poly_roots(Qt), pred, err)
