import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bifurc.errors import ContractError
from bifurc.flow import builtin_curve, builtin_gamma0, constant_curve, constant_flow
from bifurc.krein import eigen_decompose
from bifurc.predict import analyze_bifurcation
from bifurc.trajectory import (classify_branches, detect_D, eigenvalue_index, nu_plus, nu_plus_series,
                               track_spectrum, verify_prediction)

O1 = builtin_curve("O1-shear")
SHEAR = builtin_gamma0("O1-shear")
O3_A = np.diag([1.0, 2.0, 1.0, 2.0])
T_CROSS = 2 * np.pi / 3


@pytest.fixture(scope="module")
def shear_paths():
    pos = track_spectrum(O1, SHEAR, np.geomspace(1e-4, 1e-2, 21), t_gamma0=0.0)
    neg = track_spectrum(O1, SHEAR, -np.geomspace(1e-4, 1e-2, 21), t_gamma0=0.0)
    return pos, neg


def test_rotation_paths_closed_form():
    grid = np.linspace(0, 3, 31)
    p = track_spectrum(builtin_curve("O2-rotation"), np.eye(2), grid)
    ex = np.exp(1j * np.outer(grid, [1, -1]))
    err = [min(np.abs(p.values[:, b] - ex[:, 0]).max(), np.abs(p.values[:, b] - ex[:, 1]).max()) for b in range(2)]
    assert max(err) < 1e-8


def test_zero_curve_constant_paths():
    g0 = constant_flow(O3_A, 0.4)
    p = track_spectrum(constant_curve(np.zeros((4, 4))), g0, np.linspace(0, 1, 5))
    assert np.abs(p.values - p.values[0]).max() < 1e-14


def test_crossing_without_label_swap():
    grid = np.linspace(1.5, 2.5, 11)
    p = track_spectrum(builtin_curve("O3-oscillators"), constant_flow(O3_A, 1.5), grid)
    ex = np.exp(1j * np.outer(grid, [1, -1, 2, -2]))
    for b in range(4):
        assert min(np.abs(p.values[:, b] - ex[:, j]).max() for j in range(4)) < 1e-8
    assert not p.unresolved.any()


def test_monotone_grid_required():
    with pytest.raises(ContractError):
        track_spectrum(O1, SHEAR, [0, 1, 0.5])


def test_csv_columns(shear_paths):
    text = shear_paths[0].to_csv().splitlines()
    assert text[0] == "t,branch_id,re,im,on_circle,p,q"
    assert len(text) == 1 + 21 * 2


def test_shear_classification(shear_paths):
    pos, neg = shear_paths
    c = classify_branches(pos, 1.0, 0.0, (1e-4, 1e-2))
    up = int(np.argmax(pos.values[-1].imag))
    assert c.I_plus == {up} and c.I_minus == {1 - up}
    assert all(j == {up} and k == {up} for j, k in zip(c.J_plus, c.K_plus))
    assert all(len(a) == len(c.I_plus) and len(b) == len(c.I_minus) for a, b in zip(c.K_plus, c.K_minus))
    assert nu_plus(pos, c, 1e-3) == 1
    cn = classify_branches(neg, 1.0, 0.0, (-1e-2, -1e-4), exponents=2)
    assert all(not k for k in cn.K_plus) and all(not k for k in cn.K_minus)
    assert nu_plus(neg, cn, -1e-3) == 0


def test_rotation_is_krein_positive_on_upper_half():
    grid = np.linspace(0.2, 2.8, 9)
    p = track_spectrum(builtin_curve("O2-rotation"), constant_flow(np.eye(2), 0.2), grid, t_gamma0=0.2)
    for k in range(grid.size):
        up = int(np.argmax(p.values[k].imag))
        assert p.krein[k, up] == 1 and p.krein[k, 1 - up] == -1


def test_indices():
    g = constant_flow(np.eye(2), 0.5)
    c = builtin_curve("O2-rotation")
    assert eigenvalue_index(c, g, 0.5, np.exp(0.5j)) == 1
    assert eigenvalue_index(c, g, 0.5, np.exp(-0.5j)) == -1
    assert eigenvalue_index(O1, SHEAR, 0.0, 1.0, probe_dt=1e-4) == 0
    rep = eigenvalue_index(builtin_curve("O3-oscillators"), constant_flow(O3_A, T_CROSS), T_CROSS,
                           np.exp(1j * T_CROSS), 1e-3, report=True)
    assert rep.left == rep.right == 0 and rep.branches == 2


def test_detect_D_rotation():
    c = builtin_curve("O2-rotation")
    r = detect_D(c, np.eye(2), (0.0, 3.5), 0.05, 1e-3)
    assert len(r.intervals) == 2
    assert r.intervals[0][0] == 0.0 and r.intervals[0][1] < 1e-3
    assert r.intervals[1][0] < np.pi < r.intervals[1][1]
    r = detect_D(c, constant_flow(np.eye(2), 0.1), (0.1, 3.0), 0.05, 1e-3)
    assert r.intervals == []


def test_detect_D_two_oscillators():
    r = detect_D(builtin_curve("O3-oscillators"), np.eye(4), (1.5, 2.5), 0.05, 1e-3, t_gamma0=0.0)
    # the fast pair also meets at -1 when t = π/2
    assert len(r.intervals) == 2
    (a0, b0), (a, b) = r.intervals
    assert a0 < np.pi / 2 < b0
    assert a < T_CROSS < b and b - a < 2e-3
    assert r.convexity_violations == [] and r.unmarked_transitions == []


def test_verify_shear(shear_paths):
    an = analyze_bifurcation(SHEAR, np.eye(2), 1.0)
    v = verify_prediction(shear_paths[0], an.prediction, 0.0, (1e-4, 1e-2))
    assert v.passed and not v.ties
    assert all(b["inner_residual"] < 0.05 for b in v.branches)


def test_verify_rotation_first_order():
    t0 = 0.5
    g = constant_flow(np.eye(2), t0)
    an = analyze_bifurcation(g, np.eye(2), np.exp(1j * t0))
    off = np.geomspace(1e-5, 1e-2, 10)
    p = track_spectrum(builtin_curve("O2-rotation"), g, t0 + off, t_gamma0=t0)
    v = verify_prediction(p, an.prediction, t0, (1e-5, 1e-2))
    assert v.passed
    [b] = v.branches
    # exact relative residual of the linear term is |e^{iu} - 1 - iu| / u = u/2 + O(u^3)
    assert b["inner_residual"] == pytest.approx(0.5e-5, rel=1e-3)
    assert b["slope"] == pytest.approx(1, abs=0.01)


def test_verify_two_oscillator_collision():
    g = constant_flow(O3_A, T_CROSS)
    an = analyze_bifurcation(g, O3_A, np.exp(1j * T_CROSS), cluster_radius=1e-3)
    off = np.geomspace(1e-5, 1e-2, 10)
    p = track_spectrum(builtin_curve("O3-oscillators"), g, T_CROSS + off, t_gamma0=T_CROSS)
    v = verify_prediction(p, an.prediction, T_CROSS, (1e-5, 1e-2))
    assert v.passed
    c = classify_branches(p, np.exp(1j * T_CROSS), T_CROSS, (1e-5, 1e-2), exponents=1)
    assert len(c.I_plus) == 1 and len(c.I_minus) == 1
    assert np.all(nu_plus_series(p, c) == 1)


@settings(max_examples=10)
@given(st.floats(0.0, 6.0))
def test_spectrum_closure_and_quadruples(t1):
    c = builtin_curve("O4-coupled")
    grid = np.linspace(t1, t1 + 1.0, 6)
    p = track_spectrum(c, constant_flow(np.diag([1.0, 2.0, 1.0, 2.0]), 0.0), grid, t_gamma0=0.0)
    for k, g in enumerate(p.gammas):
        ref = np.sort_complex(eigen_decompose(g).eigenvalues)
        assert np.abs(np.sort_complex(p.values[k]) - ref).max() < 1e-8
        v = p.values[k]
        img = 1 / v.conj()
        assert max(np.abs(v - z).min() for z in img) < 1e-8


@settings(max_examples=5)
@given(st.floats(2e-4, 2e-3))
def test_D_width_linear_in_tol_for_semisimple_collision(tol):
    # the rotation's pair meets at -1 when t = π; the pair is semisimple there
    c = builtin_curve("O2-rotation")
    w = []
    for k in (1, 2):
        r = detect_D(c, constant_flow(np.eye(2), 2.5), (2.5, 3.8), 0.05, tol / k, t_gamma0=2.5)
        [(a, b)] = r.intervals
        assert a < np.pi < b
        w.append(b - a)
    assert 0.25 <= w[1] / w[0] <= 0.75
