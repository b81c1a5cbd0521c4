"""Acceptance criteria 1 to 11, each at its stated tolerance.

Every test prints one PASS/FAIL line through :func:`acceptance_log.record`;
the lines are repeated in the pytest terminal summary.
"""
import math
import time

import numpy as np
import pytest

from acceptance_log import record
from oracles import dihedral, naive_topology, tetra_volume
from tetramesh.cli import main
from tetramesh.field import Genus2, Sphere, Torus
from tetramesh.mesh import analyze_topology, mesh_text
from tetramesh.midnormal import mid_normal
from tetramesh.pyramid import build_pyramids, interior_overlaps
from tetramesh.quality import measure, report_json, triangle_angles
from tetramesh.refine import grad_normal
from tetramesh.theory import (dihedral_profile, optimize_shape_param, projection_crossing,
                              shape_space_search, slid_worst_case)
from tetramesh.tiling import Box, GoldbergShape

MAXIMIN_A = math.sqrt(3) / 4
CENTRE = np.array([0.5, 0.5, 0.5])
SURFACES = {
    "sphere": (lambda: Sphere(0.3, CENTRE), 2),
    "torus": (lambda: Torus(0.3, 0.12, CENTRE), 0),
    "genus2": (lambda: Genus2(0.028, CENTRE, 0.42), -2),
}
CURVATURE_ROWS = {0.09: (34.2, 101.3), 0.05: (35.4, 102.7), 0.03: (35.2, 101.6)}
PLACEMENTS = 24


def midnormal_run(name, n, a=MAXIMIN_A, workers=1, hausdorff=True):
    field = SURFACES[name][0]()
    shape = GoldbergShape(a, 1.0 / n)
    start = time.perf_counter()
    mesh = mid_normal(field, shape, Box.unit().padded(shape.e), workers)
    rep = measure(mesh, field, shape, algorithm="midnormal", surface=name, hausdorff=hausdorff)
    return mesh, rep, time.perf_counter() - start


@pytest.fixture(scope="module")
def runs48():
    return {name: midnormal_run(name, 48) for name in SURFACES}


@pytest.fixture(scope="module")
def runs24():
    return {name: midnormal_run(name, 24) for name in SURFACES}


@pytest.fixture(scope="module")
def minimax_a():
    return optimize_shape_param("minimax", "LQ").a


def test_criterion_01_midnormal_angles(runs48):
    lo, hi = 49.10, 81.88
    rows = {k: (r.min_angle, r.max_angle, t) for k, (_, r, t) in runs48.items()}
    ok = all(mn >= lo and mx <= hi and t < 30 for mn, mx, t in rows.values())
    detail = "; ".join(f"{k} [{mn:.4f}, {mx:.4f}] {t:.1f}s" for k, (mn, mx, t) in rows.items())
    assert record(1, ok, f"angles within [{lo}, {hi}], <30 s: {detail}")


def test_criterion_02_midnormal_at_minimax_shape(minimax_a):
    lo, hi = 38.3 - 0.1, 76.8 + 0.1
    rows = {k: midnormal_run(k, 48, minimax_a, hausdorff=False)[1] for k in SURFACES}
    ok = all(r.min_angle >= lo and r.max_angle <= hi for r in rows.values())
    detail = "; ".join(f"{k} [{r.min_angle:.4f}, {r.max_angle:.4f}]" for k, r in rows.items())
    assert record(2, ok, f"minimax a={minimax_a:.6f}, angles within [{lo:.1f}, {hi:.1f}]: {detail}")


def test_criterion_03_edge_ratio(runs48, runs24):
    ratios = {f"{k}@{n}": r.edge_ratio for n, runs in ((24, runs24), (48, runs48)) for k, (_, r, _) in runs.items()}
    ok = max(ratios.values()) <= 1.59
    assert record(3, ok, f"max edge ratio {max(ratios.values()):.5f} <= 1.59")


def test_criterion_04_topology(runs48):
    details, ok = [], True
    for name, (mesh, rep, _) in runs48.items():
        chi = SURFACES[name][1]
        top = analyze_topology(mesh)
        ref = naive_topology(mesh.triangles.tolist())
        good = (top.is_closed_manifold and top.euler_char == chi == ref["chi"]
                and ref["edge_counts"] == [2] and ref["good_links"] == mesh.n_vertices
                and np.all(mesh.edge_face_counts == 2) and not top.bad_vertices)
        ok &= bool(good)
        details.append(f"{name} chi={top.euler_char}")
    assert record(4, ok, "closed manifolds, 2 faces per edge, cyclic links: " + ", ".join(details))


def test_criterion_05_hausdorff(runs48, runs24):
    ok, details = True, []
    for name in SURFACES:
        r24, r48 = runs24[name][1], runs48[name][1]
        ratio = r48.hausdorff_upper / r24.hausdorff_upper
        bounded = all(r.hausdorff_upper <= r.bound * 1.05 for r in (r24, r48))
        ok &= bounded and ratio <= 0.55
        details.append(f"{name} {r24.hausdorff_upper:.4f}->{r48.hausdorff_upper:.4f} (x{ratio:.3f})")
    bound = runs48["sphere"][1].bound
    assert record(5, ok, f"<= 2*diameter*1.05 (2*diameter={bound:.4f} at N=48), ratio <= 0.55: " + "; ".join(details))


def _curvature_medians(k_max):
    radius = 1.0 / k_max
    rng = np.random.default_rng(7)
    mins, maxs = [], []
    for c in rng.uniform(0.0, 3.0, size=(PLACEMENTS, 3)):
        m = grad_normal(Sphere(radius, c), Box(c - radius - 2, c + radius + 2), 1.0)
        ang = triangle_angles(m.triangle_points())
        mins.append(ang.min())
        maxs.append(ang.max())
    return float(np.median(mins)), float(np.median(maxs))


def test_criterion_06_gradnormal_curvature_rows():
    measured = {k: _curvature_medians(k) for k in CURVATURE_ROWS}
    ok = all(abs(measured[k][0] - ref[0]) <= 1.5 and abs(measured[k][1] - ref[1]) <= 1.5
             for k, ref in CURVATURE_ROWS.items())
    # excursion outside [35.2, 101.5] must not grow as the curvature falls
    excess = [max(0.0, 35.2 - lo) + max(0.0, hi - 101.5) for lo, hi in (measured[k] for k in sorted(CURVATURE_ROWS, reverse=True))]
    converging = all(b <= a + 1e-9 for a, b in zip(excess, excess[1:]))
    ok = ok and converging
    detail = "; ".join(f"kM={k}: ({lo:.2f}, {hi:.2f}) vs {CURVATURE_ROWS[k]}" for k, (lo, hi) in measured.items())
    assert record(6, ok, f"medians of {PLACEMENTS} placements within 1.5 deg, excess {['%.2f' % x for x in excess]}: {detail}")


def test_criterion_07_theory_engine(minimax_a):
    best = optimize_shape_param("maximin", "KP")
    m1 = optimize_shape_param("minimax", "LQ")
    ok = abs(best.a - MAXIMIN_A) <= 1e-6 and abs(minimax_a - 0.2349) <= 1e-4
    ok &= all(abs(x - y) <= 0.1 for x, y in zip(best.interval, (49.1, 81.8)))
    ok &= all(abs(x - y) <= 0.1 for x, y in zip(m1.interval, (38.3, 76.8)))
    names = {"AB": (0, 1), "AC": (0, 2), "AD": (0, 3), "BC": (1, 2), "BD": (1, 3), "CD": (2, 3)}
    worst = 0.0
    for a in np.random.default_rng(17).uniform(0.05, 1.0, 200):
        v = GoldbergShape(float(a)).canonical_vertices()
        assert tetra_volume(v) > 0
        d = dihedral_profile(float(a))
        worst = max(worst, max(abs(d[k] - dihedral(v, i, j)) for k, (i, j) in names.items()))
    ok &= worst <= 1e-10
    _, crossing = projection_crossing()
    ok &= abs(crossing - 35.4128) <= 1e-4
    assert record(7, ok, f"maximin a={best.a:.9f} {tuple(round(x, 4) for x in best.interval)}, minimax a={minimax_a:.6f} "
                         f"{tuple(round(x, 4) for x in m1.interval)}, dihedral err {worst:.1e}, "
                         f"crossing {crossing:.6f}")


def test_criterion_08_slid_worst_cases():
    expected = {0.2: (21.1, 116.2), 0.25: (16.1, 128.7), 0.3: (11.9, 140.8)}
    ok, details = True, []
    for t, ref in expected.items():
        start = time.perf_counter()
        got = slid_worst_case(MAXIMIN_A, t).interval
        took = time.perf_counter() - start
        ok &= abs(got[0] - ref[0]) <= 0.5 and abs(got[1] - ref[1]) <= 0.5 and took < 60
        details.append(f"t={t}: ({got[0]:.2f}, {got[1]:.2f}) {took:.1f}s")
    assert record(8, ok, "within 0.5 deg, <60 s: " + "; ".join(details))


def test_criterion_09_pyramid():
    field = Sphere(0.3, CENTRE)
    res = build_pyramids(field, 12)
    side = res.mesh.edge_lengths() / (res.e / 6)
    rel = float(np.abs(side - 1).max())
    overlaps = len(interior_overlaps(res.corners, res.apexes, res.e))
    rep = measure(res.mesh, field, algorithm="pyramid", e=res.e)
    radial = float(np.abs(np.linalg.norm(res.mesh.vertices - CENTRE, axis=1) - 0.3).max())
    ok = rel <= 1e-12 and overlaps == 0 and rep.hausdorff_upper <= 2 * res.e and radial <= 2 * res.e
    assert record(9, ok, f"side error {rel:.1e}, {overlaps} overlaps, Hausdorff {rep.hausdorff_upper:.4f} <= 2e={2 * res.e:.4f}")


def test_criterion_10_shape_space_search():
    start = time.perf_counter()
    best = shape_space_search("maximin")
    worst = shape_space_search("minimax")
    took = time.perf_counter() - start
    ok = best.value >= 49.55 and worst.value <= 73.25 and took < 600
    assert record(10, ok, f"maximin {best.value:.4f} >= 49.55, minimax {worst.value:.4f} <= 73.25, {took:.1f}s")


def test_criterion_11_determinism(tmp_path, minimax_a):
    outputs = {}
    for w in (1, 4, 8):
        blob = []
        for name in SURFACES:
            for a in (MAXIMIN_A, minimax_a):
                mesh, rep, _ = midnormal_run(name, 48, a, workers=w, hausdorff=False)
                blob.append(mesh_text(mesh, "obj") + report_json(rep))
        c = np.array([1.3, 0.4, 2.2])
        blob.append(mesh_text(grad_normal(Sphere(20.0, c), Box(c - 22, c + 22), 1.0, w), "ply"))
        obj, rep = tmp_path / f"{w}.obj", tmp_path / f"{w}.json"
        main(["--algorithm", "midnormal", "--surface", "genus2", "--n", "48", "--workers", str(w),
              "--out", str(obj), "--report", str(rep)])
        blob.append(obj.read_text() + rep.read_text())
        outputs[w] = blob
    theory = [repr(optimize_shape_param("maximin", "KP")) for _ in range(2)]
    ok = outputs[1] == outputs[4] == outputs[8] and theory[0] == theory[1]
    assert record(11, ok, f"{len(outputs[1])} mesh/report outputs byte-identical across 1, 4, 8 workers")
