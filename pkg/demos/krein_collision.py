"""
A Krein collision between two oscillators
=========================================

``A = diag(1, 2, 1, 2)`` is a pair of uncoupled oscillators with
frequencies 1 and 2.  The multipliers ``e^{it}`` (Krein positive) and
``e^{2it}`` travel around the circle and meet at ``e^{2πi/3}`` when
``t = 2π/3``; the fast pair also meets itself at ``-1`` when ``t = π/2``.
Both instants are Krein indefinite, and nothing else in ``[1.5, 2.5]`` is.
"""

import numpy as np

from bifurc import analyze_bifurcation, builtin_curve, constant_flow, detect_D, eigenvalue_index

curve = builtin_curve("O3-oscillators")
A = np.diag([1.0, 2.0, 1.0, 2.0])

rep = detect_D(curve, np.eye(4), (1.5, 2.5), grid_step=0.05, tol=1e-3, t_gamma0=0.0)
for a, b in rep.intervals:
    print(f"Krein-indefinite instant in [{a:.6f}, {b:.6f}]  width {b - a:.2e}")
print("2π/3 =", 2 * np.pi / 3, "  π/2 =", np.pi / 2)

# local picture at the collision: two simple branches, opposite Krein sign,
# moving past each other on the circle with speeds set by the S-X pencil
tc = 2 * np.pi / 3
g = constant_flow(A, tc)
an = analyze_bifurcation(g, A, np.exp(1j * tc), cluster_radius=1e-3)
print("\nbranch roots a:", np.round(an.prediction.roots[1], 12))
for br in an.prediction.branches:
    print(f"  a={br.a:+.3f}: t>0 {br.fate_pos}, t<0 {br.fate_neg}")

# the index of the colliding cluster is the same on both sides
r = eigenvalue_index(curve, g, tc, np.exp(1j * tc), probe_dt=1e-3, report=True)
print(f"\nindex before {r.left}, after {r.right}, branches {r.branches}")
