"""Command-line harness: point generation, geodesics, interpolation, tables."""

from __future__ import annotations

import argparse
import pathlib
import sys
from dataclasses import replace

import numpy as np

from . import geodesics, geometry, harness, pointsets
from .basis import BasisConfig
from .interpolant import hb_eval, interpolant_config


def _parse_pair(text):
    a, b = text.split(",")
    return np.array([float(a), float(b)])


def _chart_for(args):
    if args.surface == "torus":
        return geometry.torus(R=args.torus_R, r=args.torus_r)
    return harness.make_chart(args.surface)


def _cmd_gen_points(args):
    chart = _chart_for(args)
    if args.kind == "nodes":
        v, xyz = pointsets.nodes_on_surface(chart, args.n, skip=args.skip)
    else:
        v, xyz = pointsets.eval_points(chart, args.n, seed=args.seed)
    harness.write_points_csv(args.out, v, xyz)
    print(f"wrote {args.n} {args.kind} on {args.surface} to {args.out}")
    if args.plot:
        from . import figures

        figures.points_figure(chart, xyz, None, args.plot)
        print(f"wrote figure {args.plot}")
    return 0


def _cmd_geodesic(args):
    chart = _chart_for(args)
    settings = geodesics.BvpSettings(
        segments=args.segments, max_iters=args.max_iters, tol=args.tol
    )
    path = geodesics.geodesic_bvp(chart, args.v_from, args.v_to, settings)
    print(f"bvp distance: {path.total_length!r}")
    try:
        exact = geodesics.analytic_distance(chart, args.v_from, args.v_to)
        print(f"analytic distance: {exact!r}")
    except Exception:
        print("analytic distance: unavailable for this surface")
    if args.trace:
        xyz = chart.forward(path.points)
        with open(args.trace, "w", newline="") as fh:
            fh.write("s,v1,v2,x,y,z\n")
            for s, v, u in zip(path.arclength, path.points, xyz):
                cells = ",".join(repr(float(x)) for x in (s, *v, *u))
                fh.write(cells + "\n")
        print(f"wrote trace {args.trace}")
    return 0


def _cmd_interp(args):
    chart = _chart_for(args)
    order_k = {"T0": 0, "T1": 1, "T2": 2}[args.order]
    samples = harness.read_samples_csv(args.samples, chart, max_order=order_k)
    eval_v, _ = harness.read_points_csv(args.eval)
    nodes_v = np.stack([s.v for s in samples])
    if args.delta == "auto":
        radii = harness.adaptive_radii(chart, nodes_v, eval_v)
    else:
        radii = np.full(len(eval_v), float(args.delta))
    bcfg = BasisConfig(k=order_k, mu=args.mu)
    index = pointsets.CellIndex(chart, nodes_v, float(np.max(radii)))
    with open(args.out, "w", newline="") as fh:
        fh.write("id,v1,v2,value\n")
        for j, u in enumerate(eval_v):
            delta = float(radii[j])
            ids = pointsets.neighbors_within(index, u, delta)
            stencil = [samples[i] for i in ids]
            d = geodesics.analytic_distances(chart, u[None, :], nodes_v[ids])
            icfg = interpolant_config(replace(bcfg, delta=delta), stencil)
            value = hb_eval(stencil, icfg, u, d)
            fh.write(f"{j},{float(u[0])!r},{float(u[1])!r},{float(value)!r}\n")
    print(f"evaluated {len(eval_v)} points -> {args.out}")
    return 0


def _cmd_run_table(args):
    config = harness.ExperimentConfig.from_json(args.config)
    report = harness.run_experiment(config)
    out = pathlib.Path(config.out or "report.csv")
    harness.emit(report, "csv", out)
    harness.emit(report, "json", out.with_suffix(".json"))
    print(f"wrote {out} and {out.with_suffix('.json')}")
    for r in report.rows:
        print(f"  n={r.n:<6} {r.order}  MAE={r.mae:.3e}  RMSE={r.rmse:.3e}")
    if args.figures:
        from . import figures

        fig_path = out.with_name(out.stem + "_convergence.png")
        figures.convergence_figure(report, fig_path)
        print(f"wrote figure {fig_path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hbsurf",
        description=(
            "Hermite-Birkhoff interpolation of scattered data on parametric "
            "surfaces with geodesic cardinal basis functions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_surface(p, include_torus=False):
        choices = ["sphere", "cylinder", "cone"] + (["torus"] if include_torus else [])
        p.add_argument("--surface", required=True, choices=choices)
        if include_torus:
            p.add_argument("--torus-R", type=float, default=2.0)
            p.add_argument("--torus-r", type=float, default=1.0)

    p = sub.add_parser("gen-points", help="emit node or evaluation positions as CSV")
    add_surface(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip", type=int, default=0, help="Halton index offset")
    p.add_argument("--kind", choices=["nodes", "eval"], default="nodes")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", default=None, help="optional scatter figure path")
    p.set_defaults(func=_cmd_gen_points)

    p = sub.add_parser("geodesic", help="geodesic distance between two chart points")
    add_surface(p, include_torus=True)
    p.add_argument("--from", dest="v_from", type=_parse_pair, required=True,
                   metavar="V1,V2")
    p.add_argument("--to", dest="v_to", type=_parse_pair, required=True,
                   metavar="V1,V2")
    p.add_argument("--segments", type=int, default=64)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--trace", default=None, help="CSV path for the solved path")
    p.set_defaults(func=_cmd_geodesic)

    p = sub.add_parser("interp", help="evaluate the interpolant from sample CSV")
    add_surface(p)
    p.add_argument("--samples", required=True)
    p.add_argument("--eval", required=True)
    p.add_argument("--order", choices=["T0", "T1", "T2"], required=True)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--delta", default="auto", help='radius, or "auto"')
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_interp)

    p = sub.add_parser("run-table", help="run an experiment table from JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--figures", action="store_true",
                   help="render a convergence figure next to the output")
    p.set_defaults(func=_cmd_run_table)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
