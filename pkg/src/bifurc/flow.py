"""Coefficient curves ``t -> A(t)`` and the fundamental solution of ``dγ/dt = J A(t) γ``.

A curve is one of four kinds: a constant matrix, a matrix polynomial (monomial
or Bernstein basis), uniform samples with cubic interpolation, or one of the
named builtin test systems.  A curve may carry a ``perturbation`` curve
``A1``; it then describes the affine family ``A(t, ε) = A(t) + ε A1(t)`` with
``∂A/∂ε = A1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from .errors import ContractError, DomainError, IntegrationError, NumericalError, ValidationError
from .symplectic import reproject, standard_J, symmetrize, symplectic_inverse, symplecticity_defect

KINDS = ("constant", "poly", "samples", "builtin", "function")


# --------------------------------------------------------------------------
# builtin systems
# --------------------------------------------------------------------------

def _coupling4() -> np.ndarray:
    C = np.zeros((4, 4))
    C[0, 1] = C[1, 0] = 1.0
    C[2, 3] = C[3, 2] = 1.0
    return C


_D4 = np.diag([1.0, 2.0, 1.0, 2.0])
_C4 = _coupling4()

_BUILTINS = {
    # name: (dim, A(t), default gamma0, period)
    "O1-shear": (2, lambda t: np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]), None),
    "O2-rotation": (2, lambda t: np.eye(2), np.eye(2), None),
    "O3-oscillators": (4, lambda t: _D4.copy(), np.eye(4), None),
    "O4-coupled": (4, lambda t: _D4 + 0.25 * (1.0 + math.sin(t)) * _C4, np.eye(4), 2 * np.pi),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_gamma0(name: str) -> np.ndarray:
    """Default initial condition attached to a builtin system."""
    if name not in _BUILTINS:
        raise ValidationError(f"unknown builtin {name!r}; expected one of {BUILTIN_NAMES}")
    return _BUILTINS[name][2].copy()


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HamiltonianCurve:
    """A path of real symmetric ``dim x dim`` matrices.

    Construct through the helpers :func:`constant_curve`, :func:`poly_curve`,
    :func:`sampled_curve`, :func:`builtin_curve` or :func:`curve_from_dict`
    rather than directly.
    """

    dim: int
    kind: str
    data: dict = field(repr=False)
    domain: tuple = (-np.inf, np.inf)
    period: Optional[float] = None
    perturbation: Optional["HamiltonianCurve"] = field(default=None, repr=False)
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown curve kind {self.kind!r}")
        if self.dim <= 0 or self.dim % 2:
            raise ValidationError(f"curve dimension must be a positive even integer, got {self.dim}")
        if self.period is not None and not self.period > 0:
            raise ValidationError("period must be positive")
        if self.perturbation is not None and self.perturbation.dim != self.dim:
            raise ValidationError("perturbation curve has the wrong dimension")
        if self.kind == "samples":
            t = self.data["times"]
            vals = self.data["values"]
            bc = "not-a-knot"
            if self.period is not None:
                bc = "periodic"
                vals = vals.copy()
                vals[-1] = vals[0]
            object.__setattr__(self, "_spline", CubicSpline(t, vals, axis=0, bc_type=bc))

    def __call__(self, t: float) -> np.ndarray:
        return evaluate(self, t)

    @property
    def has_perturbation(self) -> bool:
        return self.perturbation is not None

    def at_eps(self, eps: float) -> "HamiltonianCurve":
        """The member ``A(., ε)`` of the affine family."""
        if self.perturbation is None:
            raise ContractError("curve carries no ε-direction")
        if eps == 0:
            return self
        base, pert = self, self.perturbation
        return function_curve(
            lambda t: evaluate(base, t) + eps * evaluate(pert, t),
            self.dim, domain=self.domain, period=self.period,
        )

    def d_eps(self, t: float) -> np.ndarray:
        """``∂A/∂ε`` at ``t`` (independent of ε for an affine family)."""
        if self.perturbation is None:
            raise ContractError("curve carries no ε-direction")
        return evaluate(self.perturbation, t)


def constant_curve(A, **kw) -> HamiltonianCurve:
    A = np.array(A, dtype=float)
    _check_square(A, "matrix")
    return HamiltonianCurve(A.shape[0], "constant", {"matrix": symmetrize(A)}, **kw)


def poly_curve(coeffs, basis: str = "monomial", domain=None, **kw) -> HamiltonianCurve:
    """Matrix polynomial with coefficient stack ``coeffs[k]``.

    ``basis='monomial'`` means ``Σ coeffs[k] t^k``; ``basis='bernstein'`` means
    control points of the Bernstein form on ``domain`` (default ``[-1, 1]``).
    """
    C = np.array(coeffs, dtype=float)
    if C.ndim != 3 or C.shape[1] != C.shape[2] or C.shape[0] == 0:
        raise ValidationError(f"polynomial coefficients must have shape (K, d, d), got {C.shape}")
    if basis not in ("monomial", "bernstein"):
        raise ValidationError(f"unknown polynomial basis {basis!r}")
    if domain is None:
        domain = (-1.0, 1.0) if basis == "bernstein" else (-np.inf, np.inf)
    domain = (float(domain[0]), float(domain[1]))
    if basis == "bernstein" and not np.all(np.isfinite(domain)):
        raise ValidationError("Bernstein polynomials need a finite domain")
    C = 0.5 * (C + C.transpose(0, 2, 1))
    return HamiltonianCurve(C.shape[1], "poly", {"coeffs": C, "basis": basis}, domain=domain, **kw)


def sampled_curve(times, values, period=None, **kw) -> HamiltonianCurve:
    """Piecewise-cubic interpolation of samples ``values[k] = A(times[k])``."""
    t = np.array(times, dtype=float)
    V = np.array(values, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise ValidationError("sample times must be a strictly increasing list of length >= 2")
    if V.shape[0] != t.size or V.ndim != 3 or V.shape[1] != V.shape[2]:
        raise ValidationError(f"sample values must have shape ({t.size}, d, d), got {V.shape}")
    if period is not None and not np.isclose(t[-1] - t[0], period):
        raise ValidationError("periodic samples must span exactly one period")
    dom = (t[0], t[-1]) if period is None else (-np.inf, np.inf)
    return HamiltonianCurve(V.shape[1], "samples", {"times": t, "values": V}, domain=dom, period=period, **kw)


def builtin_curve(name: str, perturbation: Optional[HamiltonianCurve] = None) -> HamiltonianCurve:
    if name not in _BUILTINS:
        raise ValidationError(f"unknown builtin {name!r}; expected one of {BUILTIN_NAMES}")
    dim, _, _, period = _BUILTINS[name]
    return HamiltonianCurve(dim, "builtin", {"name": name}, period=period, name=name,
                            perturbation=perturbation)


def function_curve(fn: Callable[[float], np.ndarray], dim: int, domain=(-np.inf, np.inf),
                   period=None, **kw) -> HamiltonianCurve:
    """Wrap an arbitrary callable; usable everywhere except JSON export."""
    return HamiltonianCurve(dim, "function", {"fn": fn}, domain=tuple(domain), period=period, **kw)


def rescale(curve: HamiltonianCurve, center: float, h: float) -> HamiltonianCurve:
    """Time-rescaled curve ``s -> h A(center + h s)``.

    Its flow satisfies ``γ̃(s) = γ(center + h s)`` once started from
    ``γ(center)`` at ``s = 0``, so a window around ``center`` is mapped onto
    ``[-1, 1]`` (the rescaled domain is clipped accordingly).
    """
    if h == 0:
        raise ContractError("rescaling factor must be nonzero")
    lo, hi = ((curve.domain[0] - center) / h, (curve.domain[1] - center) / h)
    dom = (min(lo, hi), max(lo, hi))
    pert = None if curve.perturbation is None else rescale(curve.perturbation, center, h)
    return function_curve(lambda s: h * evaluate(curve, center + h * s), curve.dim,
                          domain=dom, perturbation=pert)


def _check_square(A, what):
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {A.shape}")
    if A.shape[0] % 2:
        raise ValidationError(f"{what} must have even size, got {A.shape[0]}")


def _de_casteljau(P: np.ndarray, s: float) -> np.ndarray:
    b = P.copy()
    for r in range(1, P.shape[0]):
        b = (1.0 - s) * b[:-1] + s * b[1:]
    return b[0]


def evaluate(curve: HamiltonianCurve, t: float) -> np.ndarray:
    """``A(t)``, exactly symmetric.

    Raises
    ------
    DomainError
        If ``t`` lies outside the declared domain.
    """
    t = float(t)
    lo, hi = curve.domain
    span = hi - lo if np.isfinite(hi - lo) else 1.0
    slack = 1e-12 * max(1.0, abs(span))
    if not (lo - slack <= t <= hi + slack):
        raise DomainError(f"t={t!r} outside the curve domain [{lo}, {hi}]")
    kind = curve.kind
    if kind == "constant":
        return curve.data["matrix"].copy()
    if kind == "poly":
        C = curve.data["coeffs"]
        if curve.data["basis"] == "monomial":
            out = C[-1].copy()
            for Ck in C[-2::-1]:
                out = out * t + Ck
        else:
            s = (min(max(t, lo), hi) - lo) / (hi - lo)
            out = _de_casteljau(C, s)
        return symmetrize(out)
    if kind == "samples":
        if curve.period is not None:
            t0 = curve.data["times"][0]
            t = t0 + math.fmod(t - t0, curve.period)
            if t < t0:
                t += curve.period
        return symmetrize(curve._spline(min(max(t, curve.data["times"][0]), curve.data["times"][-1])))
    if kind == "builtin":
        return symmetrize(np.asarray(_BUILTINS[curve.data["name"]][1](t), dtype=float))
    return symmetrize(np.asarray(curve.data["fn"](t), dtype=float))


# --------------------------------------------------------------------------
# symplectic matrices and flows
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """Real ``2n x 2n`` matrix checked against ``γᵀ J γ = J`` at construction.

    The tolerance is relative: ``defect <= tol * max(1, ||γ||^2)``.
    """

    matrix: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        g = np.array(self.matrix, dtype=float)
        _check_square(g, "symplectic matrix")
        if not np.all(np.isfinite(g)):
            raise ValidationError("symplectic matrix has non-finite entries")
        scale = max(1.0, np.linalg.norm(g) ** 2)
        d = symplecticity_defect(g)
        if d > self.tol * scale:
            raise ValidationError(f"matrix is not symplectic: defect {d:.3e} exceeds {self.tol * scale:.3e}")
        if abs(np.linalg.det(g) - 1.0) > 1e3 * self.tol * scale ** (g.shape[0] / 2):
            raise ValidationError("symplectic matrix has determinant far from 1")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def defect(self) -> float:
        return symplecticity_defect(self.matrix)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def as_matrix(gamma) -> np.ndarray:
    return np.array(gamma.matrix if isinstance(gamma, SymplecticMatrix) else gamma, dtype=float)


@dataclass(frozen=True, eq=False)
class FlowResult:
    """Fundamental solution sampled on a grid.

    Attributes
    ----------
    times : (K+1,) array
    gammas : (K+1, 2n, 2n) array
        ``gammas[0]`` is the supplied initial condition, unchanged.
    local_errors : (K,) array
        Sum of the accepted step-doubling error estimates over each grid
        interval (``nan`` for fixed-step runs).
    drift : (K+1,) array
        Running maximum of ``||γᵀJγ - J||_F`` before any re-projection.
    reprojected : (K+1,) bool array
        Where a re-projection onto the symplectic group was applied.
    """

    times: np.ndarray
    gammas: np.ndarray
    local_errors: np.ndarray
    drift: np.ndarray
    reprojected: np.ndarray
    tol: float
    n_steps: int

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.gammas[-1]


def _rk4(curve, J, t, y, h, k1=None):
    if k1 is None:
        k1 = J @ _checked(curve, t) @ y
    Am = J @ _checked(curve, t + 0.5 * h)
    k2 = Am @ (y + 0.5 * h * k1)
    k3 = Am @ (y + 0.5 * h * k2)
    k4 = J @ _checked(curve, t + h) @ (y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _checked(curve, t):
    A = evaluate(curve, t)
    if not np.all(np.isfinite(A)):
        raise IntegrationError("non-finite coefficient matrix", t)
    return A


def propagate(curve: HamiltonianCurve, gamma0, grid: Sequence[float], tol: float = 1e-10,
              max_step: Optional[float] = None, fixed_step: Optional[float] = None) -> FlowResult:
    """Integrate ``dγ/dt = J A(t) γ`` through the points of ``grid``.

    Classical RK4.  By default every step is controlled by step doubling: a
    step of size ``h`` is compared with two steps of size ``h/2`` and accepted
    when ``|y_h/2 - y_h| / 15 <= tol * |h| * max(1, |y|)``, i.e. local error
    at most ``tol`` per unit time.  With ``fixed_step`` each grid interval is
    split into equal steps no longer than ``fixed_step`` and no error control
    is done.

    Parameters
    ----------
    curve : HamiltonianCurve
    gamma0 : array_like or SymplecticMatrix
        Value at ``grid[0]``.
    grid : sequence of float
        Strictly monotone (increasing or decreasing).
    tol : float
    max_step : float, optional
        Upper bound on the adaptive step.
    fixed_step : float, optional

    Returns
    -------
    FlowResult
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ContractError("grid must be a one-dimensional sequence")
    dt = np.diff(grid)
    if grid.size > 1 and not (np.all(dt > 0) or np.all(dt < 0)):
        raise ContractError("grid must be strictly monotone")
    if not tol > 0:
        raise ContractError("tol must be positive")
    g0 = as_matrix(gamma0)
    if g0.shape != (curve.dim, curve.dim):
        raise ContractError(f"initial condition has shape {g0.shape}, curve dimension is {curve.dim}")
    d0 = symplecticity_defect(g0)
    if d0 > max(1e-8, 10 * tol) * max(1.0, np.linalg.norm(g0) ** 2):
        raise ContractError(f"initial condition is not symplectic (defect {d0:.3e})")

    J = standard_J(curve.dim)
    K = grid.size - 1
    gammas = np.empty((K + 1, curve.dim, curve.dim))
    gammas[0] = g0
    local = np.full(K, np.nan if fixed_step else 0.0)
    drift = np.empty(K + 1)
    drift[0] = d0
    flags = np.zeros(K + 1, dtype=bool)
    y = g0.copy()
    n_steps = 0
    h = None

    for k in range(K):
        t, t_end = grid[k], grid[k + 1]
        direction = 1.0 if t_end > t else -1.0
        if fixed_step:
            nsub = max(1, int(math.ceil(abs(t_end - t) / fixed_step - 1e-9)))
            hs = (t_end - t) / nsub
            for i in range(nsub):
                ti = t + i * hs
                y = _rk4(curve, J, ti, y, hs)
                n_steps += 1
        else:
            if h is None:
                nA = max(1.0, np.linalg.norm(_checked(curve, t), 2))
                h = 0.05 / nA
            if max_step:
                h = min(h, max_step)
            while direction * (t_end - t) > 0:
                rest = abs(t_end - t)
                if rest <= 1e-13 * max(1.0, abs(t)):
                    y = _rk4(curve, J, t, y, direction * rest)
                    t = t_end
                    n_steps += 1
                    break
                # absorb a sliver remainder into this step
                hh = rest if h >= rest * (1 - 1e-6) else h
                last = hh == rest
                hs = direction * hh
                k1 = J @ _checked(curve, t) @ y
                y1 = _rk4(curve, J, t, y, hs, k1)
                ym = _rk4(curve, J, t, y, 0.5 * hs, k1)
                y2 = _rk4(curve, J, t + 0.5 * hs, ym, 0.5 * hs)
                err = np.linalg.norm(y2 - y1) / 15.0
                if not np.isfinite(err):
                    raise IntegrationError("solution became non-finite", t)
                bound = max(tol * hh, 64 * np.finfo(float).eps) * max(1.0, np.linalg.norm(y2))
                fac = 4.0 if err == 0 else min(4.0, max(0.2, 0.9 * (bound / err) ** 0.25))
                if err <= bound:
                    y = y2
                    t = t_end if last else t + hs
                    local[k] += err
                    n_steps += 1
                    if not last or fac < 1:
                        h = hh * fac
                else:
                    h = hh * fac
                if max_step:
                    h = min(h, max_step)
                if h < 1e-14 * max(1.0, abs(t)):
                    raise IntegrationError("step size underflow", t)
        d = symplecticity_defect(y)
        drift[k + 1] = max(drift[k], d)
        if d > 10 * tol:
            y = reproject(y)
            flags[k + 1] = True
        gammas[k + 1] = y
    return FlowResult(grid.copy(), gammas, local, drift, flags, tol, n_steps)


def flow_to(curve: HamiltonianCurve, gamma_a, t_a: float, t_b: float, tol: float = 1e-10, **kw) -> np.ndarray:
    """``γ(t_b)`` from the value ``gamma_a`` at ``t_a``."""
    g = as_matrix(gamma_a)
    if t_a == t_b:
        return g.copy()
    return propagate(curve, g, [t_a, t_b], tol, **kw).final


def constant_flow(A, t: float, gamma0=None) -> np.ndarray:
    """Closed-form flow ``expm(t J A) γ0`` of a constant coefficient."""
    A = np.asarray(A, dtype=float)
    g = expm(t * standard_J(A.shape[0]) @ A)
    return g if gamma0 is None else g @ np.asarray(gamma0, dtype=float)


# --------------------------------------------------------------------------
# Bernstein approximation
# --------------------------------------------------------------------------

def bernstein_approximant(curve: HamiltonianCurve, M: int) -> HamiltonianCurve:
    """Degree-``2M`` Bernstein polynomial of ``A`` on ``[-1, 1]``.

    ``A^(M)(t) = Σ_{k=-M}^{M} A(k/M) C(2M, M+k) ((1-t)/2)^{M-k} ((1+t)/2)^{M+k}``,
    stored by its control points ``A(k/M)`` and evaluated by de Casteljau.
    """
    M = int(M)
    if M < 1:
        raise ContractError("Bernstein order must be at least 1")
    nodes = np.arange(-M, M + 1) / M
    P = np.stack([evaluate(curve, x) for x in nodes])
    pert = None if curve.perturbation is None else bernstein_approximant(curve.perturbation, M)
    return poly_curve(P, basis="bernstein", domain=(-1.0, 1.0), perturbation=pert)


# --------------------------------------------------------------------------
# perturbation matrices C(T, ε), B(T, ε)
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PerturbationMatrices:
    """``C = ∫_0^T γᵀ ∂_εA γ dt`` and ``B = γ(T)^{-T} C γ(T)^{-1}``.

    ``C_fd`` is the independent value ``-γ(T)ᵀ J ∂_εγ(T)`` from a central
    difference in ε and ``discrepancy`` is ``||C - C_fd||_F``.
    """

    C: np.ndarray
    B: np.ndarray
    T: float
    eps: float
    gamma_T: np.ndarray
    C_fd: np.ndarray
    discrepancy: float
    quad_steps: int


def _simpson_weights(n_panels: int, T: float) -> np.ndarray:
    w = np.ones(2 * n_panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (T / (6.0 * n_panels))


def _integral_form(family, eps, T, n_panels):
    grid = np.linspace(0.0, T, 2 * n_panels + 1)
    curve = family.at_eps(eps)
    flow = propagate(curve, np.eye(family.dim), grid, tol=np.inf, fixed_step=abs(T) / (2 * n_panels))
    w = _simpson_weights(n_panels, T)
    C = np.zeros((family.dim, family.dim))
    for wk, tk, gk in zip(w, grid, flow.gammas):
        C += wk * (gk.T @ family.d_eps(tk) @ gk)
    return C, flow.final


def _difference_form(family, eps, T, n_panels, gamma_T):
    h = max(1e-6, 1e-6 * abs(eps))
    step = abs(T) / (2 * n_panels)
    ends = []
    for e in (eps + h, eps - h):
        curve = family.at_eps(e)
        ends.append(propagate(curve, np.eye(family.dim), np.linspace(0.0, T, 2 * n_panels + 1),
                              tol=np.inf, fixed_step=step).final)
    dgamma = (ends[0] - ends[1]) / (2 * h)
    return -gamma_T.T @ standard_J(family.dim) @ dgamma


def perturbation_matrices(family: HamiltonianCurve, T: float, eps: float = 0.0,
                          quad_steps: int = 64, tol: float = 1e-6) -> PerturbationMatrices:
    """Perturbation matrices of an affine family at ``(T, ε)``.

    The flow starts from the identity at ``t = 0``.  ``C`` comes from
    composite Simpson quadrature with ``quad_steps`` panels on RK4 nodes; the
    finite-difference form is computed on the same nodes so the two only
    differ by quadrature and difference errors.  If they disagree by more
    than ``tol * max(1, |C|)`` the panel count is doubled once; persistent
    disagreement raises.

    Raises
    ------
    NumericalError
        When the two forms still disagree after refinement.
    """
    if not family.has_perturbation:
        raise ContractError("family needs an ε-direction (perturbation curve)")
    if quad_steps < 1:
        raise ContractError("quad_steps must be positive")
    dim = family.dim
    if T == 0:
        Z = np.zeros((dim, dim))
        return PerturbationMatrices(Z, Z.copy(), 0.0, eps, np.eye(dim), Z.copy(), 0.0, quad_steps)
    n = quad_steps
    for attempt in range(2):
        C, gT = _integral_form(family, eps, T, n)
        C_fd = _difference_form(family, eps, T, n, gT)
        disc = float(np.linalg.norm(C - C_fd))
        if disc <= tol * max(1.0, np.linalg.norm(C)):
            break
        if attempt == 1:
            raise NumericalError(f"C forms disagree by {disc:.3e} after refinement to {n} panels")
        n *= 2
    C = symmetrize(C)
    gi = symplectic_inverse(gT)
    B = symmetrize(gi.T @ C @ gi)
    return PerturbationMatrices(C, B, float(T), float(eps), gT, C_fd, disc, n)


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------

def curve_to_dict(curve: HamiltonianCurve) -> dict:
    out = {"dim": curve.dim, "kind": curve.kind}
    if curve.kind == "constant":
        out["matrix"] = curve.data["matrix"].tolist()
    elif curve.kind == "poly":
        out["basis"] = curve.data["basis"]
        out["coeffs"] = curve.data["coeffs"].tolist()
        if np.all(np.isfinite(curve.domain)):
            out["domain"] = list(curve.domain)
    elif curve.kind == "samples":
        out["times"] = curve.data["times"].tolist()
        out["values"] = curve.data["values"].tolist()
    elif curve.kind == "builtin":
        out["name"] = curve.data["name"]
    else:
        raise ValidationError("function-kind curves cannot be serialized")
    if curve.period is not None and curve.kind != "builtin":
        out["period"] = curve.period
    if curve.perturbation is not None:
        out["perturbation"] = curve_to_dict(curve.perturbation)
    return out


def curve_from_dict(doc: dict, where: str = "curve") -> HamiltonianCurve:
    """Inverse of :func:`curve_to_dict`; errors name the offending field."""
    if isinstance(doc, str):
        return builtin_curve(doc)
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: expected an object or builtin name")
    kind = doc.get("kind")
    pert = doc.get("perturbation")
    pert = None if pert is None else curve_from_dict(pert, where + ".perturbation")
    period = doc.get("period")
    try:
        if kind == "constant":
            c = constant_curve(_field(doc, "matrix", where), period=period, perturbation=pert)
        elif kind == "poly":
            c = poly_curve(_field(doc, "coeffs", where), basis=doc.get("basis", "monomial"),
                           domain=doc.get("domain"), period=period, perturbation=pert)
        elif kind == "samples":
            c = sampled_curve(_field(doc, "times", where), _field(doc, "values", where), period=period,
                              perturbation=pert)
        elif kind == "builtin":
            c = builtin_curve(_field(doc, "name", where), perturbation=pert)
        else:
            raise ValidationError(f"{where}.kind: expected one of constant|poly|samples|builtin, got {kind!r}")
    except ValidationError as exc:
        if str(exc).startswith(where):
            raise
        raise ValidationError(f"{where}: {exc}") from None
    if "dim" in doc and int(doc["dim"]) != c.dim:
        raise ValidationError(f"{where}.dim: declared {doc['dim']} but data has dimension {c.dim}")
    return c


def _field(doc, key, where):
    if key not in doc:
        raise ValidationError(f"{where}.{key}: missing field")
    return doc[key]
