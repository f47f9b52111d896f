"""
Reducing a flow to one oscillator
=================================

On ``t ∈ [0.3, 1.5]`` the slow multipliers ``e^{±it}`` stay apart from the
fast ones, so a Riesz projector isolates them along the whole path.  A
symplectic frame of its range turns the 4×4 flow into a 2×2 one, which
is again a Hamiltonian flow; here it is just the rotation by ``t``.
"""

import json

import numpy as np

from bifurc import builtin_curve, propagate, reduce_flow

curve = builtin_curve("O3-oscillators")
grid = np.linspace(0.3, 1.5, 100)
G = propagate(curve, np.eye(4), np.concatenate([[0.0], grid]), tol=1e-12).gammas[1:]
v = np.linalg.eigvals(G[0])
mask = np.abs(np.abs(np.angle(v)) - 0.3) < 1e-6

red = reduce_flow(curve, G, grid, mask)
r = red.reduced
print("reduced dimension:", 2 * r.frame.k)
print("frame defect     :", f"{r.frame.max_defect:.1e}")
print("ODE residual     :", f"{r.max_residual:.2e}  (10 h^2 = {10 * (grid[1] - grid[0]) ** 2:.2e})")
print("decomposition    :", f"{red.decomposition.max():.1e}")
print("M(1.5) =\n", np.round(r.M[-1], 10))
print("rotation(1.5) =\n", np.round([[np.cos(1.5), np.sin(1.5)], [-np.sin(1.5), np.cos(1.5)]], 10))

# the reduced system is itself a scenario the command line can track
with open("slow_oscillator.json", "w") as fh:
    json.dump(r.to_scenario("slow-oscillator"), fh)
print("\nwrote slow_oscillator.json; try: bifurc track slow_oscillator.json")
