"""Static SVG figures: eigenvalue paths on the unit circle and branch star diagrams."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLORS = {1: "#c0392b", -1: "#2c6fbb", 0: "#7f7f7f"}


def _frame(size, body, title):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n<title>{escape(title)}</title>\n'
            f'<rect width="100%" height="100%" fill="white"/>\n{body}</svg>\n')


def paths_svg(paths, size: int = 480, title: str = "eigenvalue paths") -> str:
    """Unit circle with every tracked path; color = Krein sign (red +, blue -, grey otherwise)."""
    vals = paths.values
    R = max(1.2, float(np.abs(vals).max()) * 1.05)
    s = size / (2 * R)
    c = size / 2

    def xy(z):
        return c + s * z.real, c - s * z.imag

    parts = [f'<circle cx="{c:.2f}" cy="{c:.2f}" r="{s:.2f}" fill="none" stroke="black" stroke-width="1"/>\n']
    for b in range(vals.shape[1]):
        for k in range(vals.shape[0] - 1):
            x0, y0 = xy(vals[k, b])
            x1, y1 = xy(vals[k + 1, b])
            col = _COLORS[int(paths.krein[k, b])]
            parts.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" '
                         f'stroke="{col}" stroke-width="2"/>\n')
    return _frame(size, "".join(parts), title)


def star_svg(prediction, t: float = 1.0, size: int = 360, title: str = "branch directions") -> str:
    """Rays of the leading-order branch directions at ``λ0`` for one sign of ``t``."""
    c = size / 2
    L = 0.42 * size
    parts = [f'<circle cx="{c}" cy="{c}" r="3" fill="black"/>\n']
    devs = [br.deviation(t) for br in prediction.branches]
    big = max((abs(d) for d in devs), default=1.0) or 1.0
    lam0 = prediction.lam0
    for br, d in zip(prediction.branches, devs):
        # rotate so the tangent of U at λ0 points up
        z = d / (1j * lam0) * 1j / big
        fate = br.fate(t)
        col = _COLORS[1] if fate.endswith("positive") else _COLORS[-1] if fate.endswith("negative") else _COLORS[0]
        x, y = c + L * z.real, c - L * z.imag
        parts.append(f'<line x1="{c}" y1="{c}" x2="{x:.2f}" y2="{y:.2f}" stroke="{col}" stroke-width="2"/>\n')
        parts.append(f'<text x="{x:.2f}" y="{y:.2f}" font-size="11">{escape(f"l={br.l} p={br.p} q={br.q}")}</text>\n')
    return _frame(size, "".join(parts), title)
