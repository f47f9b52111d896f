import json
import subprocess
import sys

import numpy as np
import pytest

from bifurc.cli import main

SCEN = {
    "shear": {"curve": "O1-shear", "analyze": {"t": 0.0},
              "grid": {"start": 1e-4, "stop": 1e-2, "num": 9, "spacing": "log"},
              "predict": {"t0": 0.0, "lambda0": 1.0},
              "verify": {"lambda0": 1.0, "t_samples": {"start": 1e-5, "stop": 1e-2, "num": 10, "spacing": "log"}}},
    "rot": {"curve": "O2-rotation", "analyze": {"t": 0.3}},
    "osc": {"curve": "O3-oscillators", "grid": {"start": 0.3, "stop": 1.5, "num": 40},
            "detect_d": {"interval": [1.9, 2.3], "grid_step": 0.05, "tol": 1e-3},
            "reduce": {"select": [{"angle": 0.3}]},
            "predict": {"t0": 2.0943951023931953, "lambda0": {"angle": 2.0943951023931953}}},
    "zero": {"curve": {"kind": "constant", "matrix": [[0, 0], [0, 0]]}, "analyze": {"t": 0.0, "check_convexity": True}},
    "bad": {"curve": "O1-shear", "gamma0": [[1, 0, 0], [0, 1, 0]]},
}


@pytest.fixture
def scen(tmp_path):
    paths = {}
    for k, v in SCEN.items():
        p = tmp_path / f"{k}.json"
        p.write_text(json.dumps(v))
        paths[k] = p
    return tmp_path, paths


def run(cmd, path, out, *extra, stem=None):
    code = main([cmd, str(path), "--out-dir", str(out), *extra])
    stem = stem or path.stem
    doc = json.loads((out / f"{stem}.{cmd.replace('-', '_')}.json").read_text())
    return code, doc


def test_analyze(scen):
    d, p = scen
    code, doc = run("analyze", p["rot"], d / "o")
    assert code == 0 and doc["report"]["stability"]["verdict"] == "strongly_stable"
    ev = sorted(complex(*z).imag for z in doc["report"]["spectrum"]["eigenvalues"])
    assert np.allclose(ev, [-np.sin(0.3), np.sin(0.3)])
    code, doc = run("analyze", p["shear"], d / "o")
    assert code == 0 and doc["report"]["stability"]["verdict"] == "unstable"
    code, doc = run("analyze", p["zero"], d / "o")
    assert code == 2 and doc["report"]["convexity"]["satisfied"] is False


def test_predict(scen):
    d, p = scen
    code, doc = run("predict", p["shear"], d / "o", "--plot")
    assert code == 0
    br = doc["report"]["prediction"]["branches"]
    assert len(br) == 2 and all(abs(b["a"] - 1) < 1e-12 for b in br)
    assert (d / "o" / "shear.predict.star_pos.svg").read_text().startswith("<svg")
    code, doc = run("predict", p["osc"], d / "o")
    fates = sorted(b["fate_t_pos"] for b in doc["report"]["prediction"]["branches"])
    assert code == 0 and fates == ["on-circle Krein-negative", "on-circle Krein-positive"]
    code, doc = run("predict", p["shear"], d / "o", "--lambda0", "[0, 1]")
    assert code == 2 and doc["status"] == "error"


def test_track_and_determinism(scen):
    d, p = scen
    code, _ = run("track", p["shear"], d / "a", "--plot")
    code2, _ = run("track", p["shear"], d / "b", "--plot")
    assert code == code2 == 0
    for suffix in ("track.json", "track.paths.csv", "track.paths.svg"):
        assert (d / "a" / f"shear.{suffix}").read_bytes() == (d / "b" / f"shear.{suffix}").read_bytes()
    head = (d / "a" / "shear.track.paths.csv").read_text().splitlines()[0]
    assert head == "t,branch_id,re,im,on_circle,p,q"


def test_detect_verify_reduce(scen):
    d, p = scen
    code, doc = run("detect-d", p["osc"], d / "o")
    [iv] = doc["report"]["intervals"]
    assert code == 0 and iv[0] < 2 * np.pi / 3 < iv[1]
    code, doc = run("verify", p["shear"], d / "o")
    assert code == 0 and doc["report"]["passed"]
    code, doc = run("reduce", p["osc"], d / "o")
    assert code == 0 and doc["report"]["k"] == 1
    sub = d / "o" / "osc.reduce.reduced.json"
    code, doc = run("track", sub, d / "o", stem="osc-reduced")
    assert code == 0 and doc["report"]["n_branches"] == 2


def test_errors_give_valid_json(scen, tmp_path, monkeypatch):
    d, p = scen
    code, doc = run("analyze", p["bad"], d / "o")
    assert code == 2 and "gamma0" in doc["error"]["message"]
    broken = tmp_path / "broken.json"
    broken.write_text('{"curve": "O1-shear",\n  oops}')
    code, doc = run("track", broken, d / "o")
    assert code == 2 and "line 2" in doc["error"]["message"]
    code, doc = run("track", p["rot"], d / "o")
    assert code == 2 and "grid" in doc["error"]["message"]
    monkeypatch.setenv("BIFURC_OUT_DIR", str(tmp_path / "env"))
    assert main(["analyze", str(p["rot"])]) == 0
    assert (tmp_path / "env" / "rot.analyze.json").exists()


def test_console_script(scen):
    d, p = scen
    r = subprocess.run([sys.executable, "-m", "bifurc.cli", "analyze", str(p["rot"]), "--out-dir", str(d / "s")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["status"] == "ok"
