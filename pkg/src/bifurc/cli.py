"""``bifurc`` command line: ``bifurc analyze|predict|track|detect-d|verify|reduce scenario.json``.

Every command prints a JSON report and writes it (plus CSV/SVG when
relevant) into the output directory (``--out-dir``, else ``$BIFURC_OUT_DIR``,
else the current directory).  Exit codes: 0 ok, 2 invalid input,
3 numerical failure, 4 unresolved structure, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .charpoly import verify_coeff_orders
from .errors import BifurcError, NumericalError, StructureError, ValidationError
from .flow import flow_to, propagate
from .krein import check_convexity_assumption, cluster_signature, eigen_decompose, stability_verdict
from .plots import paths_svg, star_svg
from .predict import analyze_bifurcation
from .reduction import reduce_flow
from .scenario import load_scenario, parse_complex, parse_grid, positive
from .trajectory import detect_D, track_spectrum

OUT_ENV = "BIFURC_OUT_DIR"


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dumps(doc) -> str:
    return json.dumps(jsonable(doc), indent=2, sort_keys=True) + "\n"


def _gamma_at(sc, t):
    if t == sc.t_gamma0:
        return sc.gamma0
    return flow_to(sc.curve, sc.gamma0, sc.t_gamma0, t, sc.tol)


def _grid(sc, args):
    if args.grid is not None:
        return parse_grid(args.grid, "--grid")
    if sc.grid is None:
        raise ValidationError("grid: missing field (or pass --grid)")
    return sc.grid


# --------------------------------------------------------------------------
# commands; each returns (report, {filename suffix: text})
# --------------------------------------------------------------------------

def cmd_analyze(sc, args):
    sec = sc.section("analyze")
    t = float(args.t if args.t is not None else sec.get("t", sc.t_gamma0))
    g = _gamma_at(sc, t)
    spec = eigen_decompose(g)
    sigs = []
    for c in spec.clusters:
        if c.on_circle(1e-8 + 1e-6 * np.linalg.norm(g, 2)):
            sigs.append({"cluster": c.id, **cluster_signature(g, c, spec).to_dict()})
    report = {"t": t, "spectrum": spec.to_dict(), "signatures": sigs, "stability": stability_verdict(g).to_dict()}
    status = "ok"
    if sec.get("check_convexity", False) or args.check_convexity:
        conv = check_convexity_assumption(sc.curve, g, t)
        report["convexity"] = conv.to_dict()
        if not conv.satisfied:
            status = "assumption-violated"
    return status, report, {}


def cmd_predict(sc, args):
    sec = sc.section("predict")
    t0 = float(args.t if args.t is not None else sec.get("t0", sc.t_gamma0))
    if "lambda0" not in sec and args.lambda0 is None:
        raise ValidationError("predict.lambda0: missing field")
    lam0 = parse_complex(json.loads(args.lambda0) if args.lambda0 else sec["lambda0"], "predict.lambda0")
    g = _gamma_at(sc, t0)
    an = analyze_bifurcation(g, sc.curve(t0), lam0, tol=float(sec.get("tol", 1e-8)),
                             cluster_radius=float(sec.get("cluster_radius", 1e-2)),
                             rng=np.random.default_rng(sc.seed))
    report = {"t0": t0, "lambda0": an.chains.lam0, "sizes": list(an.chains.sizes),
              "weak_condition": an.weak, "matrices": an.matrices.to_dict(), "prediction": an.prediction.to_dict()}
    files = {}
    if args.plot:
        files["star_pos.svg"] = star_svg(an.prediction, 1.0, title="branches for t > 0")
        files["star_neg.svg"] = star_svg(an.prediction, -1.0, title="branches for t < 0")
    return "ok", report, files


def cmd_track(sc, args):
    grid = _grid(sc, args)
    paths = track_spectrum(sc.curve, sc.gamma0, grid, tol=sc.tol, t_gamma0=sc.t_gamma0)
    report = {"n_times": int(grid.size), "n_branches": paths.n_branches, "refinements": paths.refinements,
              "unresolved": paths.unresolved, "confidence": paths.confidence,
              "final": paths.values[-1], "csv_columns": ["t", "branch_id", "re", "im", "on_circle", "p", "q"]}
    files = {"paths.csv": paths.to_csv()}
    if args.plot:
        files["paths.svg"] = paths_svg(paths, title=sc.name)
    return "ok", report, files


def cmd_detect_d(sc, args):
    sec = sc.section("detect_d")
    if "interval" not in sec:
        raise ValidationError("detect_d.interval: missing field")
    iv = sec["interval"]
    if not (isinstance(iv, list) and len(iv) == 2):
        raise ValidationError("detect_d.interval: expected [start, stop]")
    step = positive(sec.get("grid_step", 0.05), "detect_d.grid_step")
    tol = args.tol if args.tol is not None else positive(sec.get("tol", 1e-3), "detect_d.tol")
    rep = detect_D(sc.curve, sc.gamma0, iv, step, tol, t_gamma0=sc.t_gamma0, flow_tol=sc.tol)
    return "ok", rep.to_dict(), {}


def cmd_verify(sc, args):
    sec = sc.section("verify")
    if "lambda0" not in sec:
        raise ValidationError("verify.lambda0: missing field")
    lam0 = parse_complex(sec["lambda0"], "verify.lambda0")
    t0 = float(sec.get("t0", sc.t_gamma0))
    samples = parse_grid(sec["t_samples"], "verify.t_samples") if "t_samples" in sec else _grid(sc, args)
    g = _gamma_at(sc, t0)
    rep = verify_coeff_orders(sc.curve, g, lam0, samples, sizes=sec.get("sizes"), t0=t0, tol=sc.tol,
                              noise_floor=sec.get("noise_floor"))
    return ("ok" if rep.passed else "failed"), rep.to_dict(), {}


def cmd_reduce(sc, args):
    sec = sc.section("reduce")
    grid = _grid(sc, args)
    if "select" not in sec:
        raise ValidationError("reduce.select: missing field (list of eigenvalues at the first grid time)")
    targets = [parse_complex(z, f"reduce.select[{i}]") for i, z in enumerate(sec["select"])]
    gam = propagate(sc.curve, sc.gamma0, np.concatenate([[sc.t_gamma0], grid]) if grid[0] != sc.t_gamma0 else grid,
                    sc.tol).gammas
    gam = gam[1:] if grid[0] != sc.t_gamma0 else gam
    v = np.linalg.eigvals(gam[0])
    mask = np.zeros(v.size, dtype=bool)
    for z in targets:
        for w in (z, np.conj(z)):
            d = np.abs(v - w)
            d[mask] = np.inf
            mask[int(np.argmin(d))] = True
    red = reduce_flow(sc.curve, gam, grid, mask, nodes=int(sec.get("nodes", 64)))
    r = red.reduced
    report = {"k": r.frame.k, "frame_defect": r.frame.max_defect, "max_ode_residual": r.max_residual,
              "grid_step": float(np.max(np.abs(np.diff(grid)))) if grid.size > 1 else 0.0,
              "spectrum_error": float(r.spectrum_error.max()),
              "decomposition_residual": float(red.decomposition.max()),
              "projector_complementarity": float(red.complementarity.max()),
              "final_reduced_spectrum": np.linalg.eigvals(r.M[-1])}
    files = {"reduced.json": dumps(r.to_scenario(sc.name + "-reduced"))}
    return "ok", report, files


COMMANDS = {"analyze": cmd_analyze, "predict": cmd_predict, "track": cmd_track,
            "detect-d": cmd_detect_d, "verify": cmd_verify, "reduce": cmd_reduce}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ValidationError):
        return 2
    if isinstance(exc, NumericalError):
        return 3
    if isinstance(exc, StructureError):
        return 4
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bifurc", description="Eigenvalue bifurcation analysis of linear Hamiltonian flows.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--tol", type=float, default=None,
                   help="flow tolerance (refinement tolerance for detect-d)")
    p.add_argument("--grid", default=None, help="override the grid: '[log:]start:stop:num'")
    p.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--plot", action="store_true", help="also write SVG figures")
    p.add_argument("--t", type=float, default=None, help="evaluation time for analyze / predict")
    p.add_argument("--lambda0", default=None, help="eigenvalue for predict, as JSON (number or [re, im])")
    p.add_argument("--check-convexity", action="store_true", help="analyze: also test the convexity assumption")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir or os.environ.get(OUT_ENV) or ".")
    stem = Path(args.scenario).stem
    doc = {"command": args.command, "scenario": str(args.scenario)}
    files = {}
    try:
        sc = load_scenario(args.scenario)
        stem = sc.name
        if args.tol is not None:
            positive(args.tol, "--tol")
            if args.command != "detect-d":
                sc.tol = args.tol
        status, report, files = COMMANDS[args.command](sc, args)
        doc.update(status=status, report=report)
        code = 0 if status == "ok" else 2 if status == "assumption-violated" else 3
    except BifurcError as exc:
        code = exit_code(exc)
        doc.update(status="error", error={"type": type(exc).__name__, "message": str(exc)})
    except Exception as exc:  # still emit a valid report
        code = 1
        doc.update(status="error", error={"type": type(exc).__name__, "message": str(exc)})
    doc["exit_code"] = code
    text = dumps(doc)
    tag = args.command.replace("-", "_")
    write_atomic(out_dir / f"{stem}.{tag}.json", text)
    for suffix, body in files.items():
        write_atomic(out_dir / f"{stem}.{tag}.{suffix}", body)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
