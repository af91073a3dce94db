"""
Command-line drivers: build, verify, trace, reconstruct, fit-direction.

Each command reads a config file, applies flag overrides and writes its
outputs into ``--out``. verify and reconstruct exit with status 1 exactly
when their report fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from semihelix import __version__
from semihelix.config import RunConfig, parse_config, parse_grid, parse_numbers
from semihelix.construct import check_immersion_rank, verify_semihelix
from semihelix.curves import ClosedFormArc, closed_form_arc_eval, fit_circle, theta_linearity, trace_integral_curve
from semihelix.errors import FitFailure, SemiHelixError
from semihelix.export import read_csv, write_csv, write_json, write_obj
from semihelix.inverse import OrientedPointCloud, fit_direction
from semihelix.reconstruct import neighborhood_grid, reconstruct_local
from semihelix.surface import orient_normal_field

log = logging.getLogger("semihelix")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _param_names(s, spec) -> list:
    if spec is None:
        return [f"u{i + 1}" for i in range(s.k)]
    return [f"u{i + 1}" for i in range(s.k - 1)] + ["theta"]


def cmd_build(cfg: RunConfig) -> int:
    s, spec = cfg.surface(), cfg.spec()
    grid = cfg.sample_grid(s)
    nodes = grid.nodes()
    pts = s(nodes)
    out = _outdir(cfg)
    header = _param_names(s, spec) + [f"x{i + 1}" for i in range(cfg.n)]
    rows = np.concatenate([nodes.reshape(-1, s.k), pts.reshape(-1, cfg.n)], axis=1)
    write_csv(out / "build.csv", header, rows)
    if cfg.n == 3 and s.k == 2:
        nv, nf = write_obj(out / "build.obj", pts, grid.counts)
        log.info("wrote build.obj (%d vertices, %d faces)", nv, nf)
    else:
        print(f"notice: OBJ export needs a surface in R^3; n={cfg.n}, CSV only", file=sys.stderr)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    s = cfg.surface()
    grid = cfg.sample_grid(s)
    d = cfg.direction
    report = verify_semihelix(s, d, cfg.window, grid)
    rank = check_immersion_rank(s, grid)
    doc = report.as_dict()
    doc["rank_check"] = {
        "sigma_min": rank.sigma_min,
        "ratio": rank.ratio,
        "location": rank.location,
        "below_gate": rank.below_gate,
    }
    doc["passed"] = bool(report.passed and not rank.below_gate)
    write_json(_outdir(cfg) / "verify.json", doc)
    return 0 if doc["passed"] else 1


def _start(cfg: RunConfig, s) -> np.ndarray:
    if cfg.start is not None:
        u = np.asarray(cfg.start, dtype=np.float64)
        if u.shape != (s.k,):
            raise SemiHelixError(f"start needs {s.k} parameter coordinates")
        if not s.contains(u):
            raise SemiHelixError("start lies outside the parameter domain")
        return u
    rng = np.random.default_rng(cfg.seed)
    return s.lower + s.extent * rng.uniform(0.15, 0.85, size=s.k)


def cmd_trace(cfg: RunConfig) -> int:
    s, spec = cfg.surface(), cfg.spec()
    d = cfg.direction
    u0 = np.asarray(cfg.start, float) if cfg.start is not None else 0.5 * (s.lower + s.upper)
    span = cfg.span if cfg.span is not None else 0.5
    step = cfg.step if cfg.step is not None else 1e-3
    curve = trace_integral_curve(s, u0, span, step, d)
    out = _outdir(cfg)
    rows = np.column_stack([curve.t, curve.points, curve.angles])
    write_csv(out / "trace.csv", ["t"] + [f"x{i + 1}" for i in range(cfg.n)] + ["theta"], rows)

    doc = {"n_nodes": len(curve), "exit_reason": curve.exit_reason, "start": u0}
    if len(curve) >= 3:
        a, c, resid = theta_linearity(curve)
        doc.update(slope=a, intercept=c, linearity_residual=resid)
    try:
        fit = fit_circle(curve.points)
        doc["degenerate"] = False
        doc["circle"] = fit.as_dict()
    except FitFailure as exc:
        doc["degenerate"] = True
        doc["circle"] = None
        doc["error"] = str(exc)
    if spec is not None:
        ub = u0[:-1]
        arc = ClosedFormArc.from_construction(spec.base_point(ub), spec.eta(ub), d, spec.r, curve.angles[0])
        doc["closed_form_max_deviation"] = float(np.max(np.linalg.norm(closed_form_arc_eval(arc, curve.t) - curve.points, axis=1)))
        doc["expected_slope"] = 1.0 / spec.r
    write_json(out / "trace_fit.json", doc)
    return 0


def cmd_reconstruct(cfg: RunConfig) -> int:
    s = cfg.surface()
    u = _start(cfg, s)
    grid = neighborhood_grid(s, u, cfg.neighborhood)
    report = reconstruct_local(s, u, cfg.direction, grid, h=cfg.step)
    doc = report.as_dict()
    spec = cfg.spec()
    if spec is not None:
        doc["r_true"] = spec.r
    write_json(_outdir(cfg) / "reconstruct.json", doc)
    return 0 if report.passed else 1


def load_cloud(path) -> OrientedPointCloud:
    """CSV with header x1..xn,n1..nn."""
    header, data = read_csv(path)
    if len(header) % 2 or len(header) < 4:
        raise SemiHelixError("cloud CSV needs columns x1..xn,n1..nn")
    half = len(header) // 2
    return OrientedPointCloud(data[:, :half], data[:, half:])


def cmd_fit_direction(cfg: RunConfig) -> int:
    if cfg.cloud is not None:
        cloud = load_cloud(cfg.cloud)
    else:
        s = cfg.surface()
        f = orient_normal_field(s, cfg.sample_grid(s), cfg.direction)
        cloud = OrientedPointCloud(f.points.reshape(-1, cfg.n), f.normals.reshape(-1, cfg.n))
    fit = fit_direction(cloud)
    doc = fit.as_dict()
    doc["n_samples"] = len(cloud)
    write_json(_outdir(cfg) / "fit_direction.json", doc)
    return 0


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "trace": cmd_trace,
    "reconstruct": cmd_reconstruct,
    "fit-direction": cmd_fit_direction,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semihelix", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--grid", help="sample counts N[,M[,...]]")
        p.add_argument("--start", help='parameter point "u1,u2"')
        p.add_argument("--span", type=float)
        p.add_argument("--step", type=float)
        p.add_argument("--seed", type=int)
        if name == "fit-direction":
            p.add_argument("--cloud", help="CSV of points and unit normals")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        cfg = cfg.with_overrides(
            out=args.out,
            grid=parse_grid(args.grid) if args.grid else None,
            start=parse_numbers(args.start) if args.start else None,
            span=args.span,
            step=args.step,
            seed=args.seed,
            cloud=getattr(args, "cloud", None),
        )
        return COMMANDS[args.command](cfg)
    except (SemiHelixError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
