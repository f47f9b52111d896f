"""
Branching of a double eigenvalue at 1
=====================================

The shear ``[[1, 1], [0, 1]]`` carries one Jordan block of size 2 at
``λ = 1``.  Under the flow of ``A = Id`` the pair splits like ``1 ± i√t``
onto the unit circle for ``t > 0`` and like ``1 ± √|t|`` along the real
axis for ``t < 0``.
"""

import numpy as np

from bifurc import analyze_bifurcation, builtin_curve, builtin_gamma0, track_spectrum
from bifurc.plots import paths_svg, star_svg

curve = builtin_curve("O1-shear")
gamma0 = builtin_gamma0("O1-shear")

# chains, S and X at t = 0
an = analyze_bifurcation(gamma0, curve(0.0), 1.0)
print("block sizes:", an.chains.sizes)
print("S =", an.matrices.S.ravel(), " X =", an.matrices.X.ravel())
for br in an.prediction.branches:
    print(f"branch q={br.q}: t>0 {br.fate_pos:28s} t<0 {br.fate_neg}")

# track both sides and compare with the leading-order prediction
for sign in (1, -1):
    t = sign * np.geomspace(1e-4, 1e-2, 9)
    paths = track_spectrum(curve, gamma0, t, t_gamma0=0.0)
    pred = np.array([an.prediction.values(tk) for tk in t])
    err = [min(np.abs(v - p).max(), np.abs(v - p[::-1]).max()) for v, p in zip(paths.values, pred)]
    print(f"\nt {'>' if sign > 0 else '<'} 0:   t          error/sqrt|t|   Krein labels")
    for tk, e, k in zip(t, err, paths.krein):
        print(f"        {tk: .2e}   {e / np.sqrt(abs(tk)):.4f}          {k.tolist()}")

# The relative error grows like √|t|/2: it is a second-order effect, so the
# first-order picture is sharp only as t -> 0.

with open("shear_paths.svg", "w") as fh:
    fh.write(paths_svg(track_spectrum(curve, gamma0, np.linspace(0, 1.5, 61), t_gamma0=0.0), title="shear"))
with open("shear_star.svg", "w") as fh:
    fh.write(star_svg(an.prediction, 1.0))
print("\nwrote shear_paths.svg and shear_star.svg")
