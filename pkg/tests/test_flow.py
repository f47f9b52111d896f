import numpy as np
import pytest
from scipy.linalg import expm

from bifurc.errors import DomainError, ValidationError
from bifurc.flow import (bernstein_approximant, builtin_curve, builtin_gamma0, constant_curve, constant_flow,
                         curve_from_dict, curve_to_dict, evaluate, flow_to, function_curve, perturbation_matrices,
                         poly_curve, propagate, sampled_curve, SymplecticMatrix)
from bifurc.symplectic import standard_J, symplecticity_defect

# closed forms evaluated in 30-digit arithmetic
C_SHIFT = np.array([[0.727324356706420423849004966478, 0.354036709136785596749392057375],
                    [0.354036709136785596749392057375, 0.272675643293579576150995033522]])
TRACE_SHEAR_07 = 0.885466687331285890022946629465


def test_evaluate_trivial_cases():
    assert np.array_equal(evaluate(constant_curve(np.eye(2)), 0.7), np.eye(2))
    B = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(evaluate(poly_curve([np.zeros((2, 2)), B]), 0.0), np.zeros((2, 2)))
    ts = np.linspace(0, 1, 5)
    vals = [np.diag([1 + t, 2 - t]) for t in ts]
    c = sampled_curve(ts, vals)
    assert np.allclose(evaluate(c, ts[2]), vals[2], atol=1e-15)


def test_bernstein_poly_basis_matches_monomial():
    B = np.array([[1.0, 0.5], [0.5, 2.0]])
    mono = poly_curve([np.eye(2), B], domain=(-1, 1))
    bern = poly_curve([np.eye(2) - B, np.eye(2) + B], basis="bernstein", domain=(-1, 1))
    for t in (-1, -0.3, 0.4, 1):
        assert np.allclose(evaluate(mono, t), evaluate(bern, t), atol=1e-14)


def test_domain_error():
    c = poly_curve([np.eye(2)], domain=(0, 1))
    with pytest.raises(DomainError):
        evaluate(c, 2.0)


def test_zero_curve_keeps_gamma():
    g0 = np.array([[2.0, 1.0], [1.0, 1.0]])
    r = propagate(constant_curve(np.zeros((2, 2))), g0, [0, 0.5, 1.3])
    assert np.allclose(r.gammas, g0, atol=1e-15)


def test_rotation_oracle():
    r = propagate(constant_curve(np.eye(2)), np.eye(2), np.linspace(0, 1, 6), tol=1e-10)
    for t, g in zip(r.times, r.gammas):
        assert np.abs(g - expm(t * standard_J(2))).max() <= 1e-9
    assert np.max(r.drift) <= 1e-9


def test_shear_trace_oracle():
    g = flow_to(builtin_curve("O1-shear"), builtin_gamma0("O1-shear"), 0.0, 0.7, 1e-11)
    assert abs(np.trace(g) - TRACE_SHEAR_07) < 1e-9


def test_backward_and_matches_expm():
    A = np.diag([1.0, 2.0, 1.0, 2.0])
    r = propagate(builtin_curve("O3-oscillators"), np.eye(4), [0, -0.5, -1.0], tol=1e-11)
    assert np.allclose(r.final, constant_flow(A, -1.0), atol=1e-9)


def test_fourth_order():
    c = constant_curve(np.eye(2))
    errs = [np.abs(propagate(c, np.eye(2), [0, 1], fixed_step=h).final - expm(standard_J(2))).max()
            for h in (0.1, 0.05)]
    assert errs[0] / errs[1] >= 8


def test_periodic_cocycle():
    c = builtin_curve("O4-coupled")
    T = c.period
    ts = np.linspace(0, 1.5, 4)
    r = propagate(c, np.eye(4), np.concatenate([ts, T + ts]), tol=1e-10)
    gT = r.gammas[ts.size]
    for k in range(ts.size):
        lhs = r.gammas[ts.size + k] @ np.linalg.inv(gT)
        assert np.abs(lhs - r.gammas[k]).max() <= 20 * 1e-10 * 100


def test_symplectic_matrix_validation():
    with pytest.raises(ValidationError):
        SymplecticMatrix(np.array([[2.0, 0.0], [0.0, 1.0]]))
    assert SymplecticMatrix(builtin_gamma0("O1-shear")).dim == 2


def test_bernstein_reproduces_affine_and_converges():
    B = np.array([[0.5, 0.1], [0.1, -0.3]])
    affine = function_curve(lambda t: np.eye(2) + t * B, 2, (-1, 1))
    ts = np.linspace(-1, 1, 9)
    for M in (3, 8):
        AM = bernstein_approximant(affine, M)
        assert max(np.abs(evaluate(AM, t) - np.eye(2) - t * B).max() for t in ts) < 1e-13
    quad = function_curve(lambda t: (1 + t * t) * np.eye(2), 2, (-1, 1))
    fine = np.linspace(-1, 1, 201)
    sup = [max(np.abs(evaluate(bernstein_approximant(quad, M), t) - (1 + t * t) * np.eye(2)).max() for t in fine)
           for M in (4, 8, 16, 32)]
    assert all(a > b for a, b in zip(sup, sup[1:]))


def test_perturbation_matrices():
    zero = function_curve(lambda t: np.eye(2), 2, perturbation=constant_curve(np.zeros((2, 2))))
    p = perturbation_matrices(zero, 1.0)
    assert np.abs(p.C).max() == 0 and p.discrepancy == 0
    scaled = function_curve(lambda t: np.zeros((2, 2)), 2, perturbation=constant_curve(np.eye(2)))
    assert np.abs(perturbation_matrices(scaled, 0.5).C - 0.5 * np.eye(2)).max() <= 1e-8
    shift = function_curve(lambda t: np.eye(2), 2, perturbation=constant_curve(np.diag([1.0, 0.0])))
    p = perturbation_matrices(shift, 1.0)
    assert np.abs(p.C - C_SHIFT).max() < 1e-8
    assert np.abs(p.C - p.C_fd).max() < 1e-6


def test_curve_json_round_trip():
    for c in (constant_curve(np.diag([1.0, 2.0])), poly_curve([np.eye(2), np.ones((2, 2))]),
              sampled_curve([0, 1, 2], [np.eye(2)] * 3), builtin_curve("O4-coupled")):
        d = curve_to_dict(c)
        c2 = curve_from_dict(d)
        assert np.allclose(evaluate(c2, 0.6), evaluate(c, 0.6))
    with pytest.raises(ValidationError, match="curve.kind"):
        curve_from_dict({"kind": "spline"})
    with pytest.raises(ValidationError, match="curve.matrix"):
        curve_from_dict({"kind": "constant"})


def test_propagate_symplectic_along_grid():
    r = propagate(builtin_curve("O4-coupled"), np.eye(4), np.linspace(0, 6, 13), tol=1e-10)
    assert max(symplecticity_defect(g) for g in r.gammas) <= 10 * 1e-10
