"""Spectra of symplectic matrices, invariant subspaces and the Krein form.

The Krein form is ``(x, y)_G = i <x, J y>`` with ``<x, y> = Σ x_j conj(y_j)``.
It is Hermitian and invariant under symplectic maps, and its restriction to
the invariant subspace of an eigenvalue on the unit circle decides whether
that eigenvalue can leave the circle under small perturbations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

from .errors import NumericalError, SymmetryViolation
from .flow import HamiltonianCurve, as_matrix, evaluate
from .symplectic import hermitize, standard_J


def default_cluster_tol(gamma) -> float:
    return 1e-6 * max(1.0, np.linalg.norm(gamma, 2))


def default_circle_tol(gamma) -> float:
    return 1e-8 + 1e-6 * np.linalg.norm(gamma, 2)


# --------------------------------------------------------------------------
# spectrum
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Cluster:
    """Group of computed eigenvalues treated as one eigenvalue."""

    id: int
    center: complex
    multiplicity: int
    members: tuple
    radius: float

    def on_circle(self, tol: float) -> bool:
        return abs(abs(self.center) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    clusters: tuple
    cluster_tol: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def cluster_of(self, lam: complex) -> Cluster:
        """Cluster whose center is closest to ``lam``."""
        return min(self.clusters, key=lambda c: abs(c.center - lam))

    def to_dict(self) -> dict:
        return {
            "cluster_tol": self.cluster_tol,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "clusters": [
                {"id": c.id, "center": [float(c.center.real), float(c.center.imag)],
                 "multiplicity": c.multiplicity, "radius": c.radius}
                for c in self.clusters
            ],
        }


def _order_key(z: complex):
    # by argument, then modulus; rounding keeps conjugate ties deterministic
    return (round(float(np.angle(z)), 12), round(abs(z), 12), round(z.real, 12))


def cluster_values(vals, tol: float):
    """Single-linkage clusters (connected components at distance <= tol)."""
    vals = np.asarray(vals, dtype=complex)
    n = len(vals)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        for b in range(a + 1, n):
            if abs(vals[a] - vals[b]) <= tol:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def eigen_decompose(gamma, cluster_tol: Optional[float] = None) -> Spectrum:
    """Eigenvalues with multiplicity, clustered and deterministically ordered.

    Parameters
    ----------
    gamma : array_like
    cluster_tol : float, optional
        Linking distance; default ``1e-6 * max(1, ||γ||)``.
    """
    g = as_matrix(gamma)
    if not np.all(np.isfinite(g)):
        raise NumericalError("matrix has non-finite entries")
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(g)
    try:
        w = sla.eigvals(g)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from None
    w = np.asarray(sorted(w, key=_order_key))
    groups = cluster_values(w, cluster_tol)
    raw = []
    for members in groups:
        center = complex(np.mean(w[members]))
        radius = float(np.max(np.abs(w[members] - center)))
        raw.append((center, members, radius))
    raw.sort(key=lambda r: _order_key(r[0]))
    clusters = tuple(
        Cluster(k, center, len(members), tuple(members), radius)
        for k, (center, members, radius) in enumerate(raw)
    )
    return Spectrum(w, clusters, float(cluster_tol))


def spectrum_from_values(vals, cluster_tol: float) -> Spectrum:
    """Clustered spectrum keeping the given order of ``vals`` (members index into it)."""
    vals = np.asarray(vals, dtype=complex)
    clusters = []
    for mem in cluster_values(vals, cluster_tol):
        c = complex(np.mean(vals[mem]))
        clusters.append((c, mem, float(np.max(np.abs(vals[mem] - c)))))
    clusters.sort(key=lambda r: _order_key(r[0]))
    return Spectrum(vals, tuple(Cluster(k, c, len(m), tuple(m), r) for k, (c, m, r) in enumerate(clusters)),
                    float(cluster_tol))


def quadruple_partners(spec, tol: float = 1e-6):
    """Group clusters into orbits of ``λ -> conj(λ), 1/λ, conj(1/λ)``.

    Parameters
    ----------
    spec : Spectrum or sequence of complex
    tol : float
        Partner distance allowance on top of the cluster radii.

    Returns
    -------
    list of list of complex
        Each group lists the cluster centers, sorted; groups sorted by their
        first entry.

    Raises
    ------
    SymmetryViolation
        If some cluster has no partner under one of the maps.
    """
    if not isinstance(spec, Spectrum):
        vals = np.asarray(spec, dtype=complex)
        spec = Spectrum(np.asarray(sorted(vals, key=_order_key)), (), tol)
        groups = cluster_values(spec.eigenvalues, tol)
        clusters = []
        for k, mem in enumerate(sorted(groups, key=lambda m: _order_key(np.mean(spec.eigenvalues[m])))):
            c = complex(np.mean(spec.eigenvalues[mem]))
            clusters.append(Cluster(k, c, len(mem), tuple(mem), float(np.max(np.abs(spec.eigenvalues[mem] - c)))))
        spec = Spectrum(spec.eigenvalues, tuple(clusters), tol)
    cl = spec.clusters
    n = len(cl)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    maps = (np.conj, lambda z: 1.0 / z, lambda z: 1.0 / np.conj(z))
    for a, c in enumerate(cl):
        if c.center == 0:
            raise SymmetryViolation("zero eigenvalue: matrix is singular, not symplectic")
        for f in maps:
            img = f(c.center)
            # for |λ| far from 1 the inverse map amplifies errors
            allow = tol * max(1.0, abs(img)) + 2 * c.radius * max(1.0, abs(img) / abs(c.center)) + 1e-12
            dist = [abs(img - d.center) - d.radius for d in cl]
            b = int(np.argmin(dist))
            if dist[b] > allow:
                raise SymmetryViolation(
                    f"eigenvalue {c.center:.6g} has no partner near {img:.6g} (distance {dist[b] + cl[b].radius:.3e})")
            if cl[b].multiplicity != c.multiplicity:
                raise SymmetryViolation(
                    f"eigenvalue {c.center:.6g} has multiplicity {c.multiplicity} but its partner "
                    f"{cl[b].center:.6g} has {cl[b].multiplicity}")
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(cl[a].center)
    out = [sorted(g, key=_order_key) for g in groups.values()]
    out.sort(key=lambda g: _order_key(g[0]))
    return out


# --------------------------------------------------------------------------
# invariant subspaces
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InvariantSubspace:
    """Orthonormal basis of the invariant subspace of a set of eigenvalues."""

    basis: np.ndarray
    center: complex
    multiplicity: int
    residual: float
    separation: float
    ill_conditioned: bool = False

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def schur_subspace(gamma, select: Callable[[complex], bool]):
    """Leading Schur vectors for the eigenvalues with ``select(λ)`` true.

    Returns ``(Z_selected, T11, k)``.
    """
    g = as_matrix(gamma).astype(complex)
    T, Z, k = sla.schur(g, output="complex", sort=select)
    return Z[:, :k], T[:k, :k], k


def invariant_subspace(gamma, cluster, tol: float = 1e-8, spectrum: Optional[Spectrum] = None) -> InvariantSubspace:
    """Basis of ``E_λ`` for one cluster, via ordered complex Schur form.

    Parameters
    ----------
    gamma : array_like
    cluster : Cluster or complex
        A cluster of ``eigen_decompose(gamma)`` or an eigenvalue (then the
        nearest cluster is used).
    tol : float
        Residual tolerance; the result is flagged ill-conditioned when the
        cluster is closer than ``10 tol`` to the rest of the spectrum.
    """
    g = as_matrix(gamma)
    if spectrum is None:
        spectrum = eigen_decompose(g)
    if not isinstance(cluster, Cluster):
        cluster = spectrum.cluster_of(complex(cluster))
    others = [z for i, z in enumerate(spectrum.eigenvalues) if i not in cluster.members]
    gap = min((abs(z - cluster.center) for z in others), default=np.inf)
    r_sel = 0.5 * (cluster.radius + gap) if np.isfinite(gap) else np.inf
    V, T11, k = schur_subspace(g, lambda z: abs(z - cluster.center) <= r_sel)
    if k != cluster.multiplicity:
        raise NumericalError(
            f"Schur reordering selected {k} eigenvalues for a cluster of multiplicity {cluster.multiplicity}")
    res = float(np.linalg.norm(g @ V - V @ (V.conj().T @ g @ V)))
    sep = float(gap - cluster.radius)
    return InvariantSubspace(V, cluster.center, k, res, sep, ill_conditioned=sep < 10 * tol or res > tol * max(1.0, np.linalg.norm(g)))


def complement_subspace(gamma, cluster, spectrum: Optional[Spectrum] = None) -> InvariantSubspace:
    """Basis of ``F_λ``, the sum of the other clusters' invariant subspaces."""
    g = as_matrix(gamma)
    if spectrum is None:
        spectrum = eigen_decompose(g)
    if not isinstance(cluster, Cluster):
        cluster = spectrum.cluster_of(complex(cluster))
    inside = [spectrum.eigenvalues[i] for i in cluster.members]
    dists = [min(abs(z - w) for w in inside) for i, z in enumerate(spectrum.eigenvalues) if i not in cluster.members]
    gap = min(dists, default=np.inf)
    r_sel = 0.5 * (cluster.radius + gap)
    V, _, k = schur_subspace(g, lambda z: abs(z - cluster.center) > r_sel)
    res = float(np.linalg.norm(g @ V - V @ (V.conj().T @ g @ V)))
    return InvariantSubspace(V, cluster.center, k, res, float(gap - cluster.radius))


# --------------------------------------------------------------------------
# Krein form
# --------------------------------------------------------------------------

def krein_pairing(U, V) -> np.ndarray:
    """Matrix of ``(u_a, v_b)_G = i <u_a, J v_b>`` for columns of ``U`` and ``V``."""
    U = np.atleast_2d(np.asarray(U, dtype=complex).T).T
    V = np.atleast_2d(np.asarray(V, dtype=complex).T).T
    J = standard_J(U.shape[0])
    # <u, Jv> = (Jv)^H u
    return 1j * (U.T @ J @ V.conj())


def krein_gram(basis) -> np.ndarray:
    """Hermitian Gram matrix of the Krein form on the columns of ``basis``."""
    return hermitize(krein_pairing(basis, basis))


def krein_product(x, y) -> complex:
    return complex(krein_pairing(np.reshape(x, (-1, 1)), np.reshape(y, (-1, 1)))[0, 0])


@dataclass(frozen=True, eq=False)
class KreinSignature:
    p: int
    q: int
    z: int
    gram: np.ndarray = field(repr=False)
    null_tol: float = 0.0

    @property
    def label(self) -> str:
        if self.z > 0:
            return "degenerate"
        if self.q == 0:
            return "positive-definite"
        if self.p == 0:
            return "negative-definite"
        return "indefinite"

    @property
    def definite(self) -> bool:
        return self.label in ("positive-definite", "negative-definite")

    @property
    def sign(self) -> int:
        """+1 / -1 for positive / negative definite, 0 otherwise."""
        return {"positive-definite": 1, "negative-definite": -1}.get(self.label, 0)

    @property
    def index(self) -> int:
        return self.p - self.q

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "z": self.z, "label": self.label}


def krein_signature(gram, null_tol: Optional[float] = None) -> KreinSignature:
    """Inertia ``(p, q, z)`` of a Hermitian Gram matrix.

    Eigenvalues with ``|μ| <= null_tol`` count as null; the default is
    ``1e-10 * max(1, ||gram||)``.
    """
    G = hermitize(np.atleast_2d(np.asarray(gram, dtype=complex)))
    mu = np.linalg.eigvalsh(G)
    if null_tol is None:
        null_tol = 1e-10 * max(1.0, float(np.max(np.abs(mu), initial=0.0)))
    p = int(np.sum(mu > null_tol))
    q = int(np.sum(mu < -null_tol))
    return KreinSignature(p, q, len(mu) - p - q, G, float(null_tol))


def cluster_signature(gamma, cluster, spectrum: Optional[Spectrum] = None, null_tol=None) -> KreinSignature:
    """Krein signature on the invariant subspace of one cluster."""
    sub = invariant_subspace(gamma, cluster, spectrum=spectrum)
    return krein_signature(krein_gram(sub.basis), null_tol)


# --------------------------------------------------------------------------
# convexity assumption and stability
# --------------------------------------------------------------------------

def numerical_kernel(M, tol: float) -> np.ndarray:
    """Right singular vectors with ``σ <= tol σ_max``; at least one column."""
    M = np.asarray(M, dtype=complex)
    _, s, Vh = np.linalg.svd(M)
    smax = s[0] if s[0] > 0 else 1.0
    k = max(1, int(np.sum(s <= tol * smax)))
    return Vh[-k:].conj().T


@dataclass(frozen=True, eq=False)
class ConvexityReport:
    satisfied: bool
    worst_margin: float
    witness: Optional[np.ndarray]
    witness_eigenvalue: Optional[complex]
    margins: dict
    circle_tol: float

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "worst_margin": self.worst_margin,
            "witness_eigenvalue": None if self.witness_eigenvalue is None
            else [self.witness_eigenvalue.real, self.witness_eigenvalue.imag],
            "witness": None if self.witness is None else [[z.real, z.imag] for z in self.witness],
            "margins": [{"eigenvalue": [k.real, k.imag], "margin": v} for k, v in self.margins.items()],
            "circle_tol": self.circle_tol,
        }


def check_convexity_assumption(curve: HamiltonianCurve, gamma, t: float, tol: float = 1e-8,
                               circle_tol: Optional[float] = None,
                               spectrum: Optional[Spectrum] = None) -> ConvexityReport:
    """Check that ``A(t)`` is positive definite on ``ker(ω - γ)`` for every ``ω`` on U.

    For each cluster on the unit circle the numerical kernel of
    ``ω Id - γ`` is taken at SVD threshold ``tol``; the margin is the least
    eigenvalue of ``V* A(t) V``.  With no eigenvalue on U the assumption
    holds vacuously and the margin is ``+inf``.
    """
    g = as_matrix(gamma)
    A = evaluate(curve, t)
    if circle_tol is None:
        circle_tol = default_circle_tol(g)
    if spectrum is None:
        spectrum = eigen_decompose(g)
    worst, witness, wlam = np.inf, None, None
    margins = {}
    for c in spectrum.clusters:
        if not c.on_circle(circle_tol):
            continue
        V = numerical_kernel(c.center * np.eye(g.shape[0]) - g, tol)
        H = hermitize(V.conj().T @ A @ V)
        mu, W = np.linalg.eigh(H)
        margins[c.center] = float(mu[0])
        if mu[0] < worst:
            worst, witness, wlam = float(mu[0]), V @ W[:, 0], c.center
    return ConvexityReport(bool(worst > 0), worst, witness, wlam, margins, float(circle_tol))


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    verdict: str  # "strongly_stable" | "stable" | "unstable"
    reasons: list
    clusters: list
    circle_tol: float

    @property
    def stable(self) -> bool:
        return self.verdict in ("stable", "strongly_stable")

    @property
    def strongly_stable(self) -> bool:
        return self.verdict == "strongly_stable"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reasons": self.reasons, "clusters": self.clusters,
                "circle_tol": self.circle_tol}


def geometric_multiplicity(gamma, lam: complex, tol: float) -> int:
    g = as_matrix(gamma)
    s = np.linalg.svd(lam * np.eye(g.shape[0]) - g, compute_uv=False)
    return int(np.sum(s <= tol * max(s[0], 1e-300)))


def stability_verdict(gamma, tol: float = 1e-8, circle_tol: Optional[float] = None,
                      cluster_tol: Optional[float] = None) -> StabilityVerdict:
    """Stable: spectrum on U and semisimple.  Strongly stable: also Krein definite.

    Semisimplicity is decided by the numerical nullity of ``λ Id - γ`` at SVD
    threshold ``tol``.
    """
    g = as_matrix(gamma)
    if circle_tol is None:
        circle_tol = default_circle_tol(g)
    spec = eigen_decompose(g, cluster_tol)
    reasons, info = [], []
    stable, strong = True, True
    for c in spec.clusters:
        entry = {"eigenvalue": [c.center.real, c.center.imag], "multiplicity": c.multiplicity,
                 "modulus": abs(c.center)}
        if not c.on_circle(circle_tol):
            stable = False
            entry["on_circle"] = False
            reasons.append(f"eigenvalue {c.center:.6g} has modulus {abs(c.center):.6g}")
            info.append(entry)
            continue
        entry["on_circle"] = True
        gm = geometric_multiplicity(g, c.center, tol)
        entry["geometric_multiplicity"] = gm
        if gm < c.multiplicity:
            stable = False
            reasons.append(f"eigenvalue {c.center:.6g} is not semisimple "
                           f"(geometric {gm} < algebraic {c.multiplicity})")
        sig = cluster_signature(g, c, spec)
        entry["krein"] = sig.to_dict()
        if not sig.definite:
            strong = False
            reasons.append(f"eigenvalue {c.center:.6g} is Krein {sig.label} (p={sig.p}, q={sig.q}, z={sig.z})")
        info.append(entry)
    verdict = "unstable" if not stable else ("strongly_stable" if strong else "stable")
    return StabilityVerdict(verdict, reasons, info, float(circle_tol))
