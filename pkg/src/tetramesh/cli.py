"""Command-line front end.

Mesh a surface::

    tetramesh --algorithm midnormal --surface genus2 --n 48 --out g2.obj --report g2.json

Run the angle theory::

    tetramesh theory optimize --objective maximin --branch kp

Exit status is 0 when every quality check passes, 2 when a mesh was
written but some check failed, and 1 on any error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from . import __version__
from ._parallel import resolve_workers
from .errors import TetrameshError
from .field import ExprField, Genus2, Sphere, Torus
from .mesh import write_mesh
from .midnormal import mid_normal
from .pyramid import pyramid_mesh
from .quality import measure, report_json, write_report
from .refine import GRADNORMAL_A, grad_normal, slid_normal
from .tiling import Box, GoldbergShape

ALGORITHMS = ("midnormal", "gradnormal", "slidnormal", "pyramid")
SURFACES = ("sphere", "torus", "genus2", "expr")
MIDNORMAL_A = math.sqrt(3.0) / 4.0
GENUS2_SCALE = 0.42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class RunConfig:
    algorithm: str
    surface: str
    expr_text: str | None
    level: float
    radius: float
    major: float
    minor: float
    scale: float | None
    shape_a: float | None
    force_a: bool
    n: int
    slide_t: float
    box: Box
    out_path: str | None
    report_path: str | None
    fmt: str | None
    workers: int | None
    newton: bool
    cascade: bool
    hausdorff: bool

    @property
    def e(self) -> float:
        return float(max(self.box.extent)) / self.n


def _box(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"box must be six numbers, got {text!r}") from None
    if len(vals) != 6:
        raise argparse.ArgumentTypeError(f"box must be six numbers, got {text!r}")
    try:
        return Box(vals[:3], vals[3:])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mesh_parser():
    p = _Parser(prog="tetramesh", description="Mesh an implicit surface with guaranteed angles.")
    p.add_argument("--version", action="version", version=f"tetramesh {__version__}")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="midnormal")
    p.add_argument("--surface", choices=SURFACES, default="sphere")
    p.add_argument("--expr", dest="expr_text", help="f(x, y, z) for --surface expr")
    p.add_argument("--level", type=float, default=0.028, help="genus2 level")
    p.add_argument("--radius", type=float, default=0.3, help="sphere radius")
    p.add_argument("--major", type=float, default=0.3, help="torus major radius")
    p.add_argument("--minor", type=float, default=0.12, help="torus minor radius")
    p.add_argument("--scale", type=float, help="genus2 scale (default 0.42 of the box extent)")
    p.add_argument("--a", dest="shape_a", type=float, help="tiling shape parameter")
    p.add_argument("--force-a", action="store_true", help="let --a override the gradnormal shape")
    p.add_argument("--n", type=int, default=48, help="cells across the largest box side")
    p.add_argument("--t", dest="slide_t", type=float, default=0.25, help="slidnormal slide fraction")
    p.add_argument("--box", type=_box, default=Box.unit(), help="x0,y0,z0,x1,y1,z1")
    p.add_argument("--out", dest="out_path")
    p.add_argument("--report", dest="report_path")
    p.add_argument("--format", dest="fmt", choices=("obj", "ply"))
    p.add_argument("--workers", type=int)
    p.add_argument("--newton", action="store_true", help="iterate the gradient projection")
    p.add_argument("--no-cascade", dest="cascade", action="store_false",
                   help="collapse only vertices of valence 4 before any collapse")
    p.add_argument("--no-hausdorff", dest="hausdorff", action="store_false",
                   help="skip the Hausdorff estimate")
    return p


def parse_run_config(argv) -> RunConfig:
    ns = _mesh_parser().parse_args(argv)
    if ns.n < 1:
        raise UsageError(f"tetramesh: --n must be a positive integer, got {ns.n}")
    if ns.surface == "expr" and not ns.expr_text:
        raise UsageError("tetramesh: --surface expr needs --expr")
    if ns.shape_a is not None and not ns.shape_a > 0:
        raise UsageError(f"tetramesh: --a must be positive, got {ns.shape_a}")
    if ns.workers is not None and ns.workers < 1:
        raise UsageError(f"tetramesh: --workers must be positive, got {ns.workers}")
    if not 0.0 <= ns.slide_t <= 0.5:
        raise UsageError(f"tetramesh: --t must lie in [0, 0.5], got {ns.slide_t}")
    return RunConfig(**vars(ns))


def build_field(cfg: RunConfig):
    centre = cfg.box.center
    extent = float(max(cfg.box.extent))
    if cfg.surface == "sphere":
        return Sphere(cfg.radius, centre)
    if cfg.surface == "torus":
        return Torus(cfg.major, cfg.minor, centre)
    if cfg.surface == "genus2":
        scale = cfg.scale if cfg.scale is not None else GENUS2_SCALE * extent
        return Genus2(cfg.level, centre, scale)
    return ExprField(cfg.expr_text, cfg.box.diagonal)


def shape_param(cfg: RunConfig, warn=None) -> float:
    if cfg.algorithm == "gradnormal":
        if cfg.shape_a is not None and not cfg.force_a:
            if warn:
                warn(f"warning: gradnormal uses a = {GRADNORMAL_A:.6f}; pass --force-a to use --a {cfg.shape_a}")
            return GRADNORMAL_A
        return cfg.shape_a if cfg.shape_a is not None else GRADNORMAL_A
    return cfg.shape_a if cfg.shape_a is not None else MIDNORMAL_A


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Mesh, measure and write; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    field = build_field(cfg)
    e = cfg.e
    box = cfg.box.padded(e)
    workers = resolve_workers(cfg.workers)
    if cfg.algorithm == "pyramid":
        mesh = pyramid_mesh(field, cfg.n + 2, box)
        shape = None
    else:
        shape = GoldbergShape(shape_param(cfg, lambda m: print(m, file=stderr)), e)
        if cfg.algorithm == "midnormal":
            mesh = mid_normal(field, shape, box, workers)
        elif cfg.algorithm == "slidnormal":
            mesh = slid_normal(field, shape, box, cfg.slide_t, workers)
        else:
            mesh = grad_normal(field, box, e, workers, a=shape.a, iterate=cfg.newton, cascade=cfg.cascade)
    if mesh.n_triangles == 0:
        raise TetrameshError(f"{field.describe()} does not meet the box; the mesh is empty")
    if cfg.out_path:
        write_mesh(mesh, cfg.out_path, cfg.fmt)
    report = measure(mesh, field, shape, algorithm=cfg.algorithm, e=e, surface=field.describe(),
                     t=cfg.slide_t if cfg.algorithm == "slidnormal" else None, hausdorff=cfg.hausdorff)
    if cfg.report_path:
        write_report(report, cfg.report_path)
    failed = [k for k, v in report.pass_flags.items() if not v]
    print(f"{cfg.algorithm} {report.surface}: V={report.topology.V} F={report.topology.F} "
          f"chi={report.topology.euler_char} angles=[{report.min_angle:.4f}, {report.max_angle:.4f}] "
          f"edgeRatio={report.edge_ratio:.4f} "
          + ("pass" if not failed else "FAIL " + ",".join(failed)), file=stdout)
    return 0 if not failed else 2


# theory subcommands

def _theory_parser():
    p = _Parser(prog="tetramesh theory", description="Angle formulas and shape optimizations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("profile", help="named disk angles for one shape parameter")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--diagonal", choices=("KP", "LQ", "kp", "lq"))

    s = sub.add_parser("optimize", help="best shape parameter on one branch")
    s.add_argument("--objective", choices=("maximin", "minimax"), default="maximin")
    s.add_argument("--branch", choices=("kp", "lq", "KP", "LQ"), default="kp")

    s = sub.add_parser("shapesearch", help="search all tetrahedron shapes")
    s.add_argument("--objective", choices=("maximin", "minimax"), default="maximin")
    s.add_argument("--grid", type=int, default=12)
    s.add_argument("--starts", type=int, default=4)
    s.add_argument("--region", choices=("full", "positive"), default="full")

    s = sub.add_parser("slidbounds", help="worst angles after sliding")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--a", type=float, default=MIDNORMAL_A)

    s = sub.add_parser("curves", help="CSV of angle curves")
    s.add_argument("--kind", choices=("angles", "projection"), default="angles")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--out")
    return p


def _fmt_interval(iv):
    return f"[{iv[0]:.4f}, {iv[1]:.4f}]"


def theory_main(argv, stdout=None) -> int:
    from . import theory

    stdout = stdout or sys.stdout
    ns = _theory_parser().parse_args(argv)
    if ns.command == "profile":
        if not ns.a > 0:
            raise UsageError(f"tetramesh theory: --a must be positive, got {ns.a}")
        p = theory.angle_profile(ns.a, ns.diagonal.upper() if ns.diagonal else None)
        out = {
            "a": p.a,
            "diagonal": p.diagonal,
            "angles": p.named(),
            "interval": list(p.interval),
            "squareQuad": p.square_quad,
            "dihedral": theory.dihedral_profile(ns.a),
        }
        print(json.dumps(out, indent=2), file=stdout)
        if p.square_quad:
            print("KLPQ is a square: both diagonals give angles 45, 45, 90", file=stdout)
    elif ns.command == "optimize":
        r = theory.optimize_shape_param(ns.objective, ns.branch.upper())
        print(f"a* = {r.a:.10f} interval {_fmt_interval(r.interval)}", file=stdout)
    elif ns.command == "shapesearch":
        if ns.grid < 8 or ns.starts < 0:
            raise UsageError("tetramesh theory: --grid must be at least 8 and --starts nonnegative")
        r = theory.shape_space_search(ns.objective, ns.grid, ns.starts, ns.region)
        pt = r.point
        print(f"{ns.objective} {_fmt_interval(r.interval)} choice {r.choice} at "
              f"xC={pt.x_c:.6f} yC={pt.y_c:.6f} xD={pt.x_d:.6f} yD={pt.y_d:.6f} zD={pt.z_d:.6f}",
              file=stdout)
    elif ns.command == "slidbounds":
        if not 0.0 <= ns.t <= 0.5:
            raise UsageError(f"tetramesh theory: --t must lie in [0, 0.5], got {ns.t}")
        r = theory.slid_worst_case(ns.a, ns.t)
        print(f"t = {ns.t:g} a = {ns.a:.6f} interval {_fmt_interval(r.interval)}", file=stdout)
    else:
        if ns.samples < 2:
            raise UsageError("tetramesh theory: --samples must be at least 2")
        rows = (theory.angle_curves(samples=ns.samples) if ns.kind == "angles"
                else theory.projection_curves(samples=ns.samples))
        text = theory.curves_csv(rows)
        if ns.out:
            try:
                with open(ns.out, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
            except OSError as exc:
                raise TetrameshError(f"cannot write {ns.out}: {exc.strerror or exc}") from exc
        else:
            stdout.write(text)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if argv and argv[0] == "theory":
            return theory_main(argv[1:])
        return run(parse_run_config(argv))
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        print("run 'tetramesh --help' for usage", file=sys.stderr)
        return 1
    except (TetrameshError, ValueError) as exc:
        print(f"tetramesh: error: {exc}", file=sys.stderr)
        return 1
