"""Measured eigenvalue paths along a flow.

* :func:`track_spectrum` follows every eigenvalue over a grid.
* :func:`classify_branches` and :func:`nu_plus` implement the side/type
  bookkeeping near an eigenvalue collision.
* :func:`eigenvalue_index` computes the locally constant ``p_t - q_t``.
* :func:`detect_D` isolates the times with a Krein-indefinite eigenvalue on U.
* :func:`verify_prediction` compares measured paths with a first-order prediction.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ContractError, NumericalError
from .flow import HamiltonianCurve, as_matrix, flow_to, propagate
from .krein import (check_convexity_assumption, default_circle_tol, invariant_subspace, krein_gram,
                    krein_signature, spectrum_from_values)
from .predict import OFF, ON_NEG, ON_POS, BranchPrediction


class FlowCache:
    """``γ(t)`` at arbitrary times, integrating from the nearest known time."""

    def __init__(self, curve: HamiltonianCurve, gamma0, t0: float, tol: float = 1e-10):
        self.curve = curve
        self.tol = tol
        self._t = [float(t0)]
        self._g = [as_matrix(gamma0)]
        self.evaluations = 0

    def add(self, ts, gammas):
        for t, g in zip(ts, gammas):
            i = bisect.bisect_left(self._t, t)
            if i < len(self._t) and self._t[i] == t:
                continue
            self._t.insert(i, float(t))
            self._g.insert(i, g)

    def grid(self, ts) -> np.ndarray:
        """Values on a monotone grid with one integration call from the start point."""
        ts = np.asarray(ts, dtype=float)
        t0 = self._t[0] if len(self._t) == 1 else self._nearest(ts[0])[0]
        g0 = self._g[self._t.index(t0)]
        out = np.empty((ts.size,) + g0.shape)
        # integrate outwards from t0 in both directions
        right = ts >= t0
        for mask, order in ((right, np.argsort(ts)), (~right, np.argsort(-ts))):
            idx = [i for i in order if mask[i]]
            if not idx:
                continue
            tt = ts[idx]
            pts = tt if tt[0] != t0 else tt[1:]
            if pts.size:
                fl = propagate(self.curve, g0, np.concatenate([[t0], pts]), self.tol)
                vals = fl.gammas[1:]
            else:
                vals = np.empty((0,) + g0.shape)
            j = 0
            for i in idx:
                if ts[i] == t0:
                    out[i] = g0
                else:
                    out[i] = vals[j]
                    j += 1
        self.add(ts, out)
        return out

    def _nearest(self, t):
        i = bisect.bisect_left(self._t, t)
        cands = [k for k in (i - 1, i) if 0 <= k < len(self._t)]
        k = min(cands, key=lambda k: abs(self._t[k] - t))
        return self._t[k], self._g[k]

    def at(self, t: float) -> np.ndarray:
        ts, gs = self._nearest(t)
        if ts == t:
            return gs
        g = flow_to(self.curve, gs, ts, t, self.tol)
        self.evaluations += 1
        self.add([t], [g])
        return g


# --------------------------------------------------------------------------
# Krein labels of an arbitrary list of eigenvalues
# --------------------------------------------------------------------------

def krein_labels(gamma, values, cluster_tol: float, circle_tol: float):
    """Per-eigenvalue (on_circle, sign, p, q) from the clusters of ``values``.

    ``sign`` is +1 / -1 for a Krein-definite cluster on U, and 0 for
    indefinite or degenerate clusters and for eigenvalues off U.
    """
    spec = spectrum_from_values(values, cluster_tol)
    B = len(values)
    on = np.zeros(B, dtype=bool)
    sign = np.zeros(B, dtype=int)
    p = np.zeros(B, dtype=int)
    q = np.zeros(B, dtype=int)
    for c in spec.clusters:
        if not c.on_circle(circle_tol):
            continue
        sub = invariant_subspace(gamma, c, spectrum=spec)
        sig = krein_signature(krein_gram(sub.basis))
        for i in c.members:
            on[i] = True
            sign[i] = sig.sign
            p[i], q[i] = sig.p, sig.q
    return on, sign, p, q


# --------------------------------------------------------------------------
# tracking
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenPathSet:
    """Eigenvalue trajectories; column ``b`` of every array is branch ``b``.

    Attributes
    ----------
    times : (T,) array
    values : (T, B) complex array
    on_circle, krein, p, q : (T, B) arrays
        ``krein`` is +1 / -1 for Krein-definite on-circle eigenvalues, 0 otherwise.
    unresolved : (B,) bool array
        Branches that took part in a collision the refinement could not separate.
    confidence : (B,) array
        Smallest ratio ``gap / motion`` seen by the branch (large is safe).
    """

    times: np.ndarray
    values: np.ndarray
    on_circle: np.ndarray
    krein: np.ndarray
    p: np.ndarray
    q: np.ndarray
    unresolved: np.ndarray
    confidence: np.ndarray
    gammas: np.ndarray = field(repr=False)
    refinements: int = 0
    cluster_tol: float = 0.0
    circle_tol: float = 0.0

    @property
    def n_branches(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "branch_id", "re", "im", "on_circle", "p", "q"])
        for k, t in enumerate(self.times):
            for b in range(self.n_branches):
                z = self.values[k, b]
                w.writerow([repr(float(t)), b, repr(float(z.real)), repr(float(z.imag)),
                            int(self.on_circle[k, b]), int(self.p[k, b]), int(self.q[k, b])])
        return buf.getvalue()


def _min_gap(v: np.ndarray) -> np.ndarray:
    """Distance from each entry to its nearest other entry."""
    D = np.abs(v[:, None] - v[None, :])
    np.fill_diagonal(D, np.inf)
    return D.min(axis=1)


def track_spectrum(curve: HamiltonianCurve, gamma0, grid: Sequence[float], tol: float = 1e-10,
                   t_gamma0: Optional[float] = None, max_depth: int = 20,
                   cluster_tol: Optional[float] = None, circle_tol: Optional[float] = None) -> EigenPathSet:
    """Follow all eigenvalues of ``γ(t)`` over ``grid``.

    Consecutive spectra are matched by a minimum-cost assignment on
    ``|λ_new - λ_predicted|``, where the prediction extrapolates each branch
    with its last velocity (plain positions on the first step).  When the
    smallest gap between eigenvalues is below 5 times the largest matching
    displacement, the step is bisected (up to ``max_depth`` levels);
    branches still inside such a near-collision at full depth are flagged
    unresolved.

    Parameters
    ----------
    gamma0 : array_like
        ``γ`` at ``t_gamma0`` (default ``grid[0]``).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ContractError("grid must be one-dimensional")
    if grid.size > 1 and not (np.all(np.diff(grid) > 0) or np.all(np.diff(grid) < 0)):
        raise ContractError("grid must be strictly monotone")
    t_start = grid[0] if t_gamma0 is None else float(t_gamma0)
    cache = FlowCache(curve, gamma0, t_start, tol)
    gammas = cache.grid(grid)
    dim = curve.dim
    T = grid.size
    values = np.empty((T, dim), dtype=complex)
    v0 = np.linalg.eigvals(gammas[0])
    values[0] = v0[np.lexsort((np.abs(v0), np.angle(v0)))]
    unresolved = np.zeros(dim, dtype=bool)
    confidence = np.full(dim, np.inf)
    state = {"refine": 0}

    def advance(ta, tb, cur, vel, vals_b, depth):
        pred = cur if vel is None else cur + vel * (tb - ta)
        C = np.abs(pred[:, None] - vals_b[None, :])
        _, perm = linear_sum_assignment(C)
        new = vals_b[perm]
        moved = np.abs(new - pred)
        motion = moved.max()
        gap = np.minimum(_min_gap(cur), _min_gap(new))
        scale = 1e-13 * max(1.0, np.abs(new).max())
        close = gap < 5 * np.maximum(motion, scale)
        if motion > scale and close.any():
            if depth < max_depth:
                state["refine"] += 1
                tm = 0.5 * (ta + tb)
                vm = np.linalg.eigvals(cache.at(tm))
                mid, vmid = advance(ta, tm, cur, vel, vm, depth + 1)
                return advance(tm, tb, mid, vmid, vals_b, depth + 1)
            unresolved[close] = True
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(moved > scale, gap / np.maximum(motion, scale), np.inf)
        np.minimum(confidence, ratio, out=confidence)
        return new, (new - cur) / (tb - ta)

    vel = None
    for k in range(T - 1):
        vb = np.linalg.eigvals(gammas[k + 1])
        values[k + 1], vel = advance(grid[k], grid[k + 1], values[k], vel, vb, 0)

    ctol = cluster_tol
    on = np.zeros((T, dim), dtype=bool)
    kr = np.zeros((T, dim), dtype=int)
    pp = np.zeros((T, dim), dtype=int)
    qq = np.zeros((T, dim), dtype=int)
    ctol_used = ctol if ctol is not None else 1e-6 * max(1.0, max(np.linalg.norm(g, 2) for g in gammas))
    circ = circle_tol if circle_tol is not None else max(default_circle_tol(g) for g in gammas)
    for k in range(T):
        on[k], kr[k], pp[k], qq[k] = krein_labels(gammas[k], values[k], ctol_used, circ)
    return EigenPathSet(grid.copy(), values, on, kr, pp, qq, unresolved, confidence, gammas,
                        state["refine"], float(ctol_used), float(circ))


# --------------------------------------------------------------------------
# classification near a collision
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BranchClassification:
    """Side/type sets for the branches leaving ``λ0`` at ``t0``.

    ``I_plus`` / ``I_minus`` come from the measured first-order limits;
    ``J_plus[k]`` etc. refer to ``times[k]`` (the samples inside the window).
    """

    lam0: complex
    t0: float
    branches: tuple
    exponents: dict
    limits: dict
    I_plus: frozenset
    I_minus: frozenset
    unclassified: frozenset
    times: np.ndarray
    sample_index: np.ndarray
    J_plus: list
    J_minus: list
    K_plus: list
    K_minus: list
    invalid: np.ndarray  # samples where a branch is Krein-indefinite on U

    def census(self) -> list:
        """Per sample: ``(#K+ == #I+, #K- == #I-)``."""
        return [(len(kp) == len(self.I_plus), len(km) == len(self.I_minus))
                for kp, km in zip(self.K_plus, self.K_minus)]


def _pick_branches(dist: np.ndarray, count: Optional[int]):
    order = np.argsort(dist)
    if count is None:
        d = dist[order]
        if d.size == 1:
            return (int(order[0]),)
        ratios = d[1:] / np.maximum(d[:-1], 1e-300)
        # without a clear gap every eigenvalue counts as a branch of λ0
        count = int(np.argmax(ratios)) + 1 if ratios.max() >= 10 else d.size
    return tuple(sorted(int(b) for b in order[:count]))


def _window(off, lo, hi):
    """Indices of offsets inside ``[lo, hi]``, with slack for the rounding of ``t0 + offset``."""
    slack = 1e-9 * max(abs(lo), abs(hi))
    return np.flatnonzero((off >= lo - slack) & (off <= hi + slack) & (off != 0))


def classify_branches(paths: EigenPathSet, lam0: complex, t0: float, window, exponents=None,
                      count: Optional[int] = None, tol: float = 0.1) -> BranchClassification:
    """Classify the branches emanating from ``λ0`` at ``t0`` over ``window``.

    Parameters
    ----------
    window : (float, float)
        Offsets ``(lo, hi)`` from ``t0``, both of the same sign.
    exponents : int or dict, optional
        Block size ``n`` of each branch (``λ - λ0 ~ |t|^(1/n)``).  Estimated
        from the log-log slope when omitted.
    count : int, optional
        Number of branches leaving ``λ0``; guessed from the largest distance
        ratio at the innermost sample when omitted.
    tol : float
        A limit is real when ``|Im| <= tol |value|``; limits with modulus
        below ``tol`` times the largest one are unclassified.
    """
    lam0 = complex(lam0)
    lo, hi = sorted(window)
    if lo < 0 < hi:
        raise ContractError("window must lie on one side of t0")
    off = paths.times - t0
    idx = _window(off, lo, hi)
    if idx.size == 0:
        raise ContractError("no samples inside the window")
    inner = idx[np.argmin(np.abs(off[idx]))]
    dist = np.abs(paths.values[inner] - lam0)
    branches = _pick_branches(dist, count)
    ex, lim = {}, {}
    for b in branches:
        if exponents is None:
            d = np.abs(paths.values[idx, b] - lam0)
            ok = d > 0
            if ok.sum() >= 2:
                slope = np.polyfit(np.log(np.abs(off[idx][ok])), np.log(d[ok]), 1)[0]
                ex[b] = max(1, int(round(1.0 / max(slope, 1e-3))))
            else:
                ex[b] = 1
        else:
            ex[b] = exponents[b] if isinstance(exponents, dict) else int(exponents)
        lim[b] = complex((paths.values[inner, b] - lam0) / (1j * lam0 * abs(off[inner]) ** (1.0 / ex[b])))
    big = max((abs(v) for v in lim.values()), default=0.0)
    Ip, Im, Un = set(), set(), set()
    for b, v in lim.items():
        if abs(v) < tol * big or big == 0:
            Un.add(b)
        elif abs(v.imag) <= tol * abs(v):
            (Ip if v.real > 0 else Im).add(b)
    Jp, Jm, Kp, Km = [], [], [], []
    invalid = np.zeros(idx.size, dtype=bool)
    for n, k in enumerate(idx):
        jp, jm, kp, km = set(), set(), set(), set()
        for b in branches:
            if not paths.on_circle[k, b]:
                continue
            s = paths.krein[k, b]
            if s > 0:
                jp.add(b)
            elif s < 0:
                jm.add(b)
            else:
                invalid[n] = True
            side = (paths.values[k, b] / lam0).imag
            if side > 0:
                kp.add(b)
            elif side < 0:
                km.add(b)
        Jp.append(jp)
        Jm.append(jm)
        Kp.append(kp)
        Km.append(km)
    return BranchClassification(lam0, float(t0), branches, ex, lim, frozenset(Ip), frozenset(Im), frozenset(Un),
                                paths.times[idx], idx, Jp, Jm, Kp, Km, invalid)


def nu_plus(paths: EigenPathSet, classification: BranchClassification, t: float) -> int:
    """``#(K+ ∩ J+) - #(K+ ∩ J-)`` at the window sample nearest ``t``.

    At samples where a branch is Krein-indefinite the value of the nearest
    earlier valid sample is used.
    """
    c = classification
    n = int(np.argmin(np.abs(c.times - t)))
    while n > 0 and c.invalid[n]:
        n -= 1
    return len(c.K_plus[n] & c.J_plus[n]) - len(c.K_plus[n] & c.J_minus[n])


def nu_plus_series(paths: EigenPathSet, classification: BranchClassification) -> np.ndarray:
    """``ν+`` at every window sample, in increasing ``|t - t0|`` order."""
    order = np.argsort(np.abs(classification.times - classification.t0))
    return np.array([nu_plus(paths, classification, classification.times[i]) for i in order])


# --------------------------------------------------------------------------
# eigenvalue index
# --------------------------------------------------------------------------

def _local_index(gamma, lam, radius, cluster_tol, circle_tol):
    vals = np.linalg.eigvals(gamma)
    inside = np.abs(vals - lam) <= radius
    spec = spectrum_from_values(vals, cluster_tol)
    idx = 0
    for c in spec.clusters:
        if not all(inside[i] for i in c.members):
            if any(inside[i] for i in c.members):
                raise NumericalError("probe disk cuts through an eigenvalue cluster")
            continue
        if not c.on_circle(circle_tol):
            continue
        sub = invariant_subspace(gamma, c, spectrum=spec)
        idx += krein_signature(krein_gram(sub.basis)).index
    return idx, int(inside.sum())


@dataclass(frozen=True)
class IndexReport:
    value: int
    left: int
    right: int
    at_t0: int
    branches: int


def eigenvalue_index(curve: HamiltonianCurve, gamma_t0, t0: float, lam: complex, probe_dt: float = 1e-4,
                     tol: float = 1e-10, radius: Optional[float] = None, cluster_tol: float = 1e-6,
                     circle_tol: Optional[float] = None, report: bool = False):
    """``p_t - q_t`` of the branches of ``λ``, probed at ``t0 ± probe_dt``.

    ``p_t`` (``q_t``) counts Krein-positive (negative) dimensions carried by
    the on-circle eigenvalues of ``γ(t)`` inside a disk around ``λ``; off-U
    eigenvalues contribute nothing.  ``gamma_t0`` is ``γ(t0)``.

    Raises
    ------
    NumericalError
        If the two probes disagree (a probe landed in D or crossed another
        collision); use a smaller ``probe_dt``.
    """
    g0 = as_matrix(gamma_t0)
    lam = complex(lam)
    vals = np.linalg.eigvals(g0)
    d = np.abs(vals - lam)
    if d.min() > 1e-4:
        raise ContractError(f"{lam} is not an eigenvalue of γ(t0)")
    if radius is None:
        far = d[d > 1e-3]
        radius = 0.5 * far.min() if far.size else 0.5
    if circle_tol is None:
        circle_tol = default_circle_tol(g0)
    out = []
    for dt in (-probe_dt, probe_dt):
        g = flow_to(curve, g0, t0, t0 + dt, tol)
        out.append(_local_index(g, lam, radius, cluster_tol, circle_tol))
    (left, nl), (right, nr) = out
    mid, _ = _local_index(g0, lam, radius, 1e-3 * radius, circle_tol)
    if left != right or nl != nr:
        raise NumericalError(f"index probes disagree ({left} vs {right}); use a smaller probe_dt")
    rep = IndexReport(int(right), int(left), int(right), int(mid), int(nr))
    return rep if report else rep.value


# --------------------------------------------------------------------------
# the Krein-indefinite set D
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DReport:
    interval: tuple
    grid_step: float
    tol: float
    intervals: list
    history: list
    convexity_violations: list
    unmarked_transitions: list
    evaluations: int

    @property
    def widths(self) -> list:
        return [b - a for a, b in self.intervals]

    def to_dict(self) -> dict:
        return {"interval": list(self.interval), "grid_step": self.grid_step, "tol": self.tol,
                "intervals": [list(x) for x in self.intervals], "widths": self.widths,
                "history": self.history, "convexity_violations": self.convexity_violations,
                "unmarked_transitions": self.unmarked_transitions, "evaluations": self.evaluations}


class _DState:
    """Marking and configuration signature of ``γ(t)`` at cluster radius ``tol``."""

    def __init__(self, cache: FlowCache, tol: float, circle_tol: Optional[float]):
        self.cache = cache
        self.tol = tol
        self.circle_tol = circle_tol
        self.memo = {}

    def __call__(self, t):
        if t in self.memo:
            return self.memo[t]
        g = self.cache.at(t)
        vals = np.linalg.eigvals(g)
        ctol = self.circle_tol if self.circle_tol is not None else default_circle_tol(g)
        spec = spectrum_from_values(vals, self.tol)
        marked = False
        config = []
        off = 0
        for c in spec.clusters:
            if not c.on_circle(ctol):
                off += c.multiplicity
                continue
            sub = invariant_subspace(g, c, spectrum=spec)
            sig = krein_signature(krein_gram(sub.basis))
            if not sig.definite:
                marked = True
            config.append((round(float(np.angle(c.center)) % (2 * np.pi), 12), sig.sign * c.multiplicity))
        config = (tuple(s for _, s in sorted(config)), off)
        self.memo[t] = (marked, config)
        return marked, config


def _edge(state, a_unmarked, b_marked, target):
    """Bisect between an unmarked and a marked time; returns (marked end, widths)."""
    widths = []
    u, m = a_unmarked, b_marked
    while abs(m - u) > target:
        mid = 0.5 * (u + m)
        if state(mid)[0]:
            m = mid
        else:
            u = mid
        widths.append(abs(m - u))
    return m, widths


def _locate(state, a, b, ca, target):
    """Find a marked time between ``a`` and ``b`` whose configurations differ."""
    while b - a > target:
        mid = 0.5 * (a + b)
        mk, cm = state(mid)
        if mk:
            return mid, a, b
        if cm == ca:
            a = mid
        else:
            b = mid
    return None, a, b


def detect_D(curve: HamiltonianCurve, gamma0, interval, grid_step: float, tol: float = 1e-3,
             t_gamma0: Optional[float] = None, flow_tol: float = 1e-10, circle_tol: Optional[float] = None,
             check_convexity: bool = True) -> DReport:
    """Sub-intervals of ``interval`` where some eigenvalue on U is Krein indefinite.

    Eigenvalues closer than ``tol`` form one cluster, so a transversal
    collision of two definite eigenvalues is marked on a window whose width
    is proportional to ``tol``.  The scan compares, between grid points, the
    ordered list of Krein types around the circle; any change means a
    collision happened in between, which is then located by bisection.
    Interval ends are refined to ``tol / 32``.

    Parameters
    ----------
    gamma0 : array_like
        ``γ`` at ``t_gamma0`` (default: the start of ``interval``).
    """
    a0, b0 = map(float, interval)
    if not b0 > a0:
        raise ContractError("interval must be increasing")
    if not (grid_step > 0 and tol > 0):
        raise ContractError("grid_step and tol must be positive")
    t_start = a0 if t_gamma0 is None else float(t_gamma0)
    n = max(1, int(np.ceil((b0 - a0) / grid_step - 1e-9)))
    grid = np.linspace(a0, b0, n + 1)
    cache = FlowCache(curve, gamma0, t_start, flow_tol)
    gammas = cache.grid(grid)
    state = _DState(cache, tol, circle_tol)
    st = [state(t) for t in grid]
    violations = []
    if check_convexity:
        for t, g in zip(grid, gammas):
            rep = check_convexity_assumption(curve, g, t)
            if not rep.satisfied:
                violations.append({"t": float(t), "margin": rep.worst_margin})
    target = tol / 32
    seeds = []  # (marked time, left unmarked bound, right unmarked bound)
    unmarked = []
    k = 0
    while k < grid.size:
        if st[k][0]:
            j = k
            while j + 1 < grid.size and st[j + 1][0]:
                j += 1
            seeds.append((grid[k], grid[j], grid[k - 1] if k > 0 else None, grid[j + 1] if j + 1 < grid.size else None))
            k = j + 1
            continue
        if k + 1 < grid.size and not st[k + 1][0] and st[k][1] != st[k + 1][1]:
            m, a, b = _locate(state, grid[k], grid[k + 1], st[k][1], target / 4)
            if m is None:
                unmarked.append([float(a), float(b)])
            else:
                seeds.append((m, m, a, b))
        k += 1
    intervals, history = [], []
    for first, last, left, right in seeds:
        if left is None:
            lo, wl = a0, []
        else:
            lo, wl = _edge(state, left, first, target)
        if right is None:
            hi, wr = b0, []
        else:
            hi, wr = _edge(state, right, last, target)
        intervals.append((float(lo), float(hi)))
        history.append({"left_bracket_widths": [float(x) for x in wl],
                        "right_bracket_widths": [float(x) for x in wr]})
    # merge overlaps, keep sorted and disjoint
    merged, mh = [], []
    for (lo, hi), h in sorted(zip(intervals, history), key=lambda x: x[0][0]):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
            mh.append(h)
    return DReport((a0, b0), float(grid_step), float(tol), merged, mh, violations, unmarked,
                   cache.evaluations + grid.size)


# --------------------------------------------------------------------------
# prediction check
# --------------------------------------------------------------------------

def measured_fate(on: bool, sign: int) -> str:
    if not on:
        return OFF
    return ON_POS if sign > 0 else (ON_NEG if sign < 0 else "on-circle indefinite")


@dataclass(frozen=True, eq=False)
class VerificationReport:
    t0: float
    window: tuple
    assignment: dict
    ties: bool
    branches: list
    delta: float
    passed: bool

    def to_dict(self) -> dict:
        return {"t0": self.t0, "window": list(self.window), "assignment": {str(k): v for k, v in self.assignment.items()},
                "ties": self.ties, "branches": self.branches, "validated_delta": self.delta, "passed": self.passed}


def verify_prediction(paths: EigenPathSet, prediction: BranchPrediction, t0: float, window,
                      residual_cap: float = 0.5) -> VerificationReport:
    """Compare measured branches with the first-order prediction.

    Each predicted branch is assigned to a measured one by minimal total
    distance at the innermost sample.  A branch passes when its relative
    residual ``|λ - λ0 - lead| / |lead|`` shrinks with ``|t - t0|`` (positive
    log-log slope) and its fate (on/off circle, Krein type) agrees on the
    inner half of the window.  ``delta`` is the largest offset up to which
    all fates agree and all residuals stay below ``residual_cap``.
    """
    lo, hi = sorted(window)
    if lo < 0 < hi:
        raise ContractError("window must lie on one side of t0")
    off = paths.times - t0
    idx = _window(off, lo, hi)
    if idx.size < 2:
        raise ContractError("need at least two samples inside the window")
    idx = idx[np.argsort(np.abs(off[idx]))]
    inner = idx[0]
    pv = prediction.values(off[inner])
    C = np.abs(pv[:, None] - paths.values[inner][None, :])
    r, c = linear_sum_assignment(C)
    assign = {int(i): int(b) for i, b in zip(r, c)}
    ties = bool(np.any(_min_gap(pv) <= 1e-12 * max(1.0, np.abs(pv).max()))) if pv.size > 1 else False
    reports = []
    ok_all = True
    agree_upto = np.full(idx.size, True)
    half = 0.5 * max(abs(lo), abs(hi))
    for i, br in enumerate(prediction.branches):
        b = assign[i]
        res, fates = [], []
        for k in idx:
            dev = br.deviation(off[k])
            res.append(abs(paths.values[k, b] - prediction.lam0 - dev) / abs(dev))
            fates.append(measured_fate(paths.on_circle[k, b], paths.krein[k, b]) == br.fate(off[k]))
        res = np.array(res)
        fates = np.array(fates)
        pos = res > 0
        slope = float(np.polyfit(np.log(np.abs(off[idx][pos])), np.log(res[pos]), 1)[0]) if pos.sum() >= 2 else np.inf
        inner_half = np.abs(off[idx]) <= half
        fate_ok = bool(fates[inner_half].all())
        passed = bool(slope > 0 and fate_ok)
        ok_all &= passed
        agree_upto &= fates & (res <= residual_cap)
        reports.append({"branch": i, "measured_branch": b, "l": br.l, "p": br.p, "q": br.q,
                        "sup_residual": float(res.max()), "inner_residual": float(res[0]), "slope": slope,
                        "fates_agree": fate_ok, "predicted_fate": br.fate(off[inner]), "passed": passed})
    bad = np.flatnonzero(~agree_upto)
    last_ok = idx.size if bad.size == 0 else bad[0]
    delta = float(abs(off[idx[last_ok - 1]])) if last_ok > 0 else 0.0
    return VerificationReport(float(t0), (float(lo), float(hi)), assign, ties, reports, delta, bool(ok_all))
