import csv
import io
import json
import subprocess
import sys

import pytest

from oracles import naive_topology, read_obj
from tetramesh.cli import main, parse_run_config


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_genus2_example_reports_chi_minus_two(tmp_path, capsys):
    obj, rep = tmp_path / "g2.obj", tmp_path / "g2.json"
    code, out, _ = run_cli(capsys, "--algorithm", "midnormal", "--surface", "genus2", "--level", "0.028",
                           "--n", "48", "--out", str(obj), "--report", str(rep))
    assert code == 0 and "pass" in out
    report = json.loads(rep.read_text())
    assert report["eulerChar"] == -2 and report["pass"]["closed-manifold"]
    verts, faces = read_obj(obj)
    assert len(verts) == report["V"] and len(faces) == report["F"]
    assert naive_topology(faces.tolist())["chi"] == -2


def test_gradnormal_sphere_example(tmp_path, capsys):
    rep = tmp_path / "s.json"
    code, _, _ = run_cli(capsys, "--algorithm", "gradnormal", "--surface", "sphere", "--radius", "0.35",
                         "--n", "64", "--report", str(rep), "--no-hausdorff")
    report = json.loads(rep.read_text())
    bounds = report["angleBounds"]
    assert (bounds["min"], bounds["max"]) == (35.2, 101.5)
    assert bounds["tolerance"] == pytest.approx(0.1 + 40 * report["curvature"]["kMe"])
    assert code == 0 and report["pass"]["gradnormal-angles"]


def test_zero_resolution_is_a_usage_error(capsys):
    code, _, err = run_cli(capsys, "--algorithm", "midnormal", "--surface", "sphere", "--n", "0")
    assert code == 1 and "--n" in err


@pytest.mark.parametrize("args", [
    ["--bogus"],
    ["--surface", "expr"],
    ["--surface", "expr", "--expr", "x +* y"],
    ["--surface", "expr", "--expr", "w - 1"],
    ["--box", "0,0,0,1,1"],
    ["--t", "0.7", "--algorithm", "slidnormal"],
    ["--surface", "sphere", "--radius", "5", "--n", "8"],
    ["theory", "profile", "--a", "-1"],
    ["theory", "nonsense"],
])
def test_errors_exit_with_one(args, capsys):
    code, _, err = run_cli(capsys, *args)
    assert code == 1 and err


def test_expression_error_reports_the_offset(capsys):
    code, _, err = run_cli(capsys, "--surface", "expr", "--expr", "x*x + y*y + z*z - 0.1 )", "--n", "8")
    assert code == 1 and "byte 22" in err


def test_quality_failure_exits_with_two(capsys):
    # forcing a far-from-square shape breaks the gradnormal angle bounds
    code, out, _ = run_cli(capsys, "--algorithm", "gradnormal", "--a", "0.6", "--force-a", "--n", "24",
                           "--no-hausdorff")
    assert code == 2 and "FAIL" in out


def test_gradnormal_ignores_a_without_force(capsys):
    cfg = parse_run_config(["--algorithm", "gradnormal", "--a", "0.4"])
    from tetramesh.cli import shape_param
    msgs = []
    assert shape_param(cfg, msgs.append) == pytest.approx(2 ** 0.5 / 4)
    assert "--force-a" in msgs[0]


def test_theory_optimize(capsys):
    code, out, _ = run_cli(capsys, "theory", "optimize", "--objective", "maximin", "--branch", "kp")
    assert code == 0
    assert out.startswith("a* = 0.4330127019 interval [49.1066, 81.7868]")


def test_theory_slidbounds(capsys):
    code, out, _ = run_cli(capsys, "theory", "slidbounds", "--t", "0.25")
    lo, hi = (float(x) for x in out.split("[")[1].rstrip("]\n").split(","))
    assert code == 0 and abs(lo - 16.1) <= 0.5 and abs(hi - 128.7) <= 0.5


def test_theory_profile_square_quad(capsys):
    code, out, _ = run_cli(capsys, "theory", "profile", "--a", "0.353553")
    assert code == 0 and "KLPQ is a square" in out
    data = json.loads(out[:out.rindex("}") + 1])
    assert data["squareQuad"] and data["diagonal"] == "LQ"


def test_theory_curves_to_file(tmp_path, capsys):
    path = tmp_path / "p.csv"
    assert main(["theory", "curves", "--kind", "projection", "--samples", "5", "--out", str(path)]) == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == 5 and set(rows[0]) == {"a", "curve_one", "curve_two", "min"}


def test_theory_shapesearch(capsys):
    code, out, _ = run_cli(capsys, "theory", "shapesearch", "--objective", "maximin", "--grid", "8", "--starts", "1")
    assert code == 0 and out.startswith("maximin [")


@pytest.mark.parametrize("algorithm", ["midnormal", "pyramid", "gradnormal"])
def test_outputs_do_not_depend_on_worker_count(tmp_path, capsys, algorithm):
    blobs = set()
    for w in ("1", "4", "8"):
        obj, rep = tmp_path / f"{w}.ply", tmp_path / f"{w}.json"
        n = "10" if algorithm == "pyramid" else "20"
        main(["--algorithm", algorithm, "--surface", "torus", "--n", n, "--workers", w,
              "--out", str(obj), "--report", str(rep), "--format", "ply"])
        blobs.add((obj.read_bytes(), rep.read_bytes()))
    assert len(blobs) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "tetramesh", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "tetramesh" in r.stdout
