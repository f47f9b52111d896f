"""Scenario files: one JSON document describing a curve, a start matrix, a grid and analysis options.

Example::

    {
      "name": "shear",
      "curve": "O1-shear",
      "gamma0": [[1, 1], [0, 1]],
      "t_gamma0": 0.0,
      "grid": {"start": 1e-4, "stop": 1e-2, "num": 41, "spacing": "log"},
      "tol": 1e-10,
      "predict": {"t0": 0.0, "lambda0": 1.0}
    }

``curve`` is a builtin name or a curve object (see :func:`bifurc.flow.curve_from_dict`);
``gamma0`` is a matrix, ``"identity"``, or omitted (builtin default, else identity).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ValidationError
from .flow import BUILTIN_NAMES, HamiltonianCurve, builtin_gamma0, curve_from_dict

SECTIONS = ("analyze", "predict", "track", "detect_d", "verify", "reduce")


@dataclass(eq=False)
class Scenario:
    name: str
    curve: HamiltonianCurve
    gamma0: np.ndarray
    t_gamma0: float
    grid: Optional[np.ndarray]
    tol: float
    seed: int
    sections: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name) or {})


def parse_grid(spec, where: str = "grid") -> np.ndarray:
    """Grid from a list, a ``{start, stop, num[, spacing]}`` object or a ``"[log:]start:stop:num"`` string."""
    if isinstance(spec, str):
        parts = spec.split(":")
        spacing = "linear"
        if parts and parts[0] in ("log", "linear"):
            spacing, parts = parts[0], parts[1:]
        if len(parts) != 3:
            raise ValidationError(f"{where}: expected '[log:]start:stop:num', got {spec!r}")
        try:
            spec = {"start": float(parts[0]), "stop": float(parts[1]), "num": int(parts[2]), "spacing": spacing}
        except ValueError:
            raise ValidationError(f"{where}: could not parse {spec!r}") from None
    if isinstance(spec, dict):
        for key in ("start", "stop", "num"):
            if key not in spec:
                raise ValidationError(f"{where}.{key}: missing field")
        a, b, n = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        if n < 1:
            raise ValidationError(f"{where}.num: must be positive")
        spacing = spec.get("spacing", "linear")
        if spacing == "linear":
            g = np.linspace(a, b, n)
        elif spacing == "log":
            if a == 0 or b == 0 or np.sign(a) != np.sign(b):
                raise ValidationError(f"{where}: log spacing needs start and stop of one sign, nonzero")
            g = np.sign(a) * np.geomspace(abs(a), abs(b), n)
            g[0], g[-1] = a, b
        else:
            raise ValidationError(f"{where}.spacing: expected linear|log, got {spacing!r}")
    else:
        try:
            g = np.asarray(spec, dtype=float)
        except (TypeError, ValueError):
            raise ValidationError(f"{where}: expected a list of numbers or a grid object") from None
        if g.ndim != 1 or g.size == 0:
            raise ValidationError(f"{where}: expected a non-empty list of numbers")
    if not np.all(np.isfinite(g)):
        raise ValidationError(f"{where}: non-finite grid values")
    d = np.diff(g)
    if g.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
        raise ValidationError(f"{where}: grid must be strictly monotone")
    return g


def parse_complex(x, where: str) -> complex:
    """Number, ``[re, im]`` or ``{"angle": θ}`` (a point ``e^{iθ}`` on the unit circle)."""
    if isinstance(x, dict) and "angle" in x:
        return complex(np.exp(1j * float(x["angle"])))
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    raise ValidationError(f"{where}: expected a number, [re, im] or {{'angle': θ}}")


def positive(x, where: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected a number") from None
    if not (v > 0 and np.isfinite(v)):
        raise ValidationError(f"{where}: must be positive, got {x!r}")
    return v


def _matrix(x, where, dim):
    try:
        M = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected a numeric matrix") from None
    if M.shape != (dim, dim):
        raise ValidationError(f"{where}: expected shape ({dim}, {dim}) to match the curve, got {M.shape}")
    return M


def scenario_from_dict(doc: dict, name: str = "scenario") -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario: expected a JSON object")
    if "curve" not in doc:
        raise ValidationError("curve: missing field")
    curve = curve_from_dict(doc["curve"])
    g0 = doc.get("gamma0")
    if g0 is None:
        bname = doc["curve"] if isinstance(doc["curve"], str) else (doc["curve"].get("name")
                                                                     if doc["curve"].get("kind") == "builtin" else None)
        g0 = builtin_gamma0(bname) if bname in BUILTIN_NAMES else np.eye(curve.dim)
    elif g0 == "identity":
        g0 = np.eye(curve.dim)
    else:
        g0 = _matrix(g0, "gamma0", curve.dim)
    grid = parse_grid(doc["grid"]) if "grid" in doc else None
    tol = positive(doc.get("tol", 1e-10), "tol")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError("seed: expected an integer")
    sections = {}
    for s in SECTIONS:
        if s in doc:
            if not isinstance(doc[s], dict):
                raise ValidationError(f"{s}: expected an object")
            for k, v in doc[s].items():
                if k.endswith("tol") and v is not None:
                    positive(v, f"{s}.{k}")
            sections[s] = doc[s]
    unknown = set(doc) - {"name", "curve", "gamma0", "t_gamma0", "grid", "tol", "seed", *SECTIONS}
    if unknown:
        raise ValidationError(f"{sorted(unknown)[0]}: unknown field")
    return Scenario(str(doc.get("name", name)), curve, g0, float(doc.get("t_gamma0", 0.0)), grid, tol, seed,
                    sections, doc)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc, path.stem)
