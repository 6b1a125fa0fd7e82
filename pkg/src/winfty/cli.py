"""Command line interface.

    winfty solve  <config>             estimate the optimum, export plan.json
    winfty decide --omega W <config>   exit 0 if a plan of cost <= W exists, else 1
    winfty cells  --omega W <config>   write one PGM per nonempty cell
    winfty render <plan.json>          share panels + cells (+ map) from a plan
    winfty gadget --n N --p P --q Q    emit a gadget instance as a config file

Exit codes: 0 success (decide: feasible), 1 decide: infeasible, 2 errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .cells import CostTable, mask_name
from .config import ConfigError, load_config, load_graph_json, parse_config
from .graph import TransportGraph
from .planio import export_plan, import_plan
from .rasters import mu_point_list, render_all, write_pgm
from .reductions import build_gadget
from .solver import (bisect, decide, map_from_matching, plan_from_matching,
                     solve_exact)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="winfty",
        description="Worst-case optimal transport onto a finite target: "
                    "threshold decisions, bisection, exact optima, plans, "
                    "maps, and rasters.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="estimate the optimal threshold and export the plan")
    sp.add_argument("config", help="instance config (JSON)")
    sp.add_argument("--output", help="override the config's output directory")
    sp.set_defaults(func=cmd_solve)

    dp = sub.add_parser("decide", help="test feasibility at one threshold")
    dp.add_argument("--omega", type=float, required=True)
    dp.add_argument("config")
    dp.set_defaults(func=cmd_decide)

    cp = sub.add_parser("cells", help="write the cell partition at one threshold")
    cp.add_argument("--omega", type=float, required=True)
    cp.add_argument("config")
    cp.add_argument("--output", help="override the config's output directory")
    cp.set_defaults(func=cmd_cells)

    rp = sub.add_parser("render", help="render share panels and cells from a plan file")
    rp.add_argument("plan", help="exported plan.json")
    rp.add_argument("--config", help="config file overriding the one embedded in the plan")
    rp.add_argument("--map", choices=("integral", "fractional"), dest="map_mode",
                    help="also build a pointwise map and render it")
    rp.add_argument("--output", help="override the config's output directory")
    rp.set_defaults(func=cmd_render)

    gp = sub.add_parser("gadget", help="emit a matching gadget as a solvable config")
    gp.add_argument("--n", type=int, required=True, help="number of targets")
    gp.add_argument("--p", type=float, required=True, help="norm exponent (finite, > 1)")
    gp.add_argument("--q", type=float, required=True, help="cost power (> 0)")
    gp.add_argument("--graph", help="graph JSON {n, left, right}; default sends "
                                    "everything through the full subset")
    gp.add_argument("--out", help="write the config here instead of stdout")
    gp.add_argument("--tolerance", type=float,
                    help="solver tolerance (default: a quarter of the gap width)")
    gp.set_defaults(func=cmd_gadget)
    return ap


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    report = bisect(cfg.instance, cfg.tolerance) if cfg.mode == "bisect" \
        else solve_exact(cfg.instance)
    out_dir = _ensure_dir(args.output or cfg.output_dir)
    plan_path = os.path.join(out_dir, "plan.json")
    export_plan(report.plan, report, plan_path, config=cfg.to_json_dict())
    print(f"omega = {report.omega!r}")
    print(f"interval = [{report.lo!r}, {report.hi!r}]")
    print(f"iterations = {report.iterations}")
    print(f"cells = {len(report.plan.rows)}")
    print(f"plan -> {plan_path}")
    return 0


def cmd_decide(args) -> int:
    cfg = load_config(args.config)
    ok = decide(cfg.instance, args.omega)
    print(f"{'feasible' if ok else 'infeasible'} at omega = {args.omega!r}")
    return 0 if ok else 1


def cmd_cells(args) -> int:
    cfg = load_config(args.config)
    table = CostTable(cfg.instance.source, cfg.instance.target, cfg.instance.cost)
    decomp = table.decompose(args.omega)
    out_dir = _ensure_dir(args.output or cfg.output_dir)
    n = cfg.instance.target.n
    if cfg.instance.source.kind == "grid":
        from .rasters import render_cells

        count = 0
        for mask, img in render_cells(decomp):
            write_pgm(os.path.join(out_dir, f"cell_{mask_name(mask, n)}.pgm"), img)
            count += 1
        print(f"{count} cell images -> {out_dir}")
    else:
        cells = [{"mask": mask, "mass": str(decomp.mass(mask)),
                  "atoms": [int(k) for k in decomp.samples_in(mask)]}
                 for mask in decomp.nonempty_masks()]
        path = os.path.join(out_dir, "cells.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"omega": float(args.omega), "cells": cells}, fh, indent=2)
            fh.write("\n")
        print(f"{len(cells)} cells -> {path}")
    return 0


def cmd_render(args) -> int:
    plan_file = import_plan(args.plan)
    if args.config:
        cfg = load_config(args.config)
    elif plan_file.config is not None:
        cfg = parse_config(plan_file.config)
    else:
        raise ConfigError(
            "the plan embeds no config; pass one explicitly with --config")
    instance = cfg.instance
    table = CostTable(instance.source, instance.target, instance.cost)
    decomp = table.decompose(plan_file.omega)
    plan = plan_from_matching(decomp, plan_file.matching, instance.target)
    out_dir = _ensure_dir(args.output or cfg.output_dir)
    tmap = None
    if args.map_mode:
        tmap = map_from_matching(decomp, plan_file.matching, args.map_mode)
    if instance.source.kind == "grid":
        targets = render_all(plan, decomp, tmap)
        for rt in targets:
            write_pgm(os.path.join(out_dir, f"{rt.name}.pgm"), rt.image)
        print(f"{len(targets)} images -> {out_dir}")
    else:
        shares = {f"mu_{i + 1}": mu_point_list(plan, decomp, i)
                  for i in range(instance.target.n)}
        path = os.path.join(out_dir, "shares.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(shares, fh, indent=2)
            fh.write("\n")
        print(f"per-atom shares -> {path}")
        if tmap is not None:
            mpath = os.path.join(out_dir, "map.json")
            with open(mpath, "w", encoding="utf-8") as fh:
                json.dump({"mode": tmap.mode,
                           "assignments": list(tmap.assignments)}, fh, indent=2)
                fh.write("\n")
            print(f"map -> {mpath}")
    if tmap is not None:
        worst = max((abs(e) for e in tmap.marginal_errors), default=Fraction(0))
        print(f"map mode = {tmap.mode}, worst marginal error = {worst}")
    return 0


def cmd_gadget(args) -> int:
    if args.graph:
        graph = load_graph_json(args.graph)
        if graph.n_targets != args.n:
            raise ConfigError(
                f"--n {args.n} disagrees with the graph's {graph.n_targets} targets")
    else:
        full = (1 << args.n) - 1
        uniform = [Fraction(1, args.n)] * args.n
        graph = TransportGraph(args.n, {full: Fraction(1)}, uniform)
    gadget = build_gadget(graph, args.p, args.q)
    tolerance = args.tolerance if args.tolerance else gadget.epsilon / 4
    src = gadget.instance.source
    tgt = gadget.instance.target
    config = {
        "source": {"type": "atomic",
                   "atoms": [{"point": list(p), "weight": str(w)}
                             for p, w in zip(src.points, src.weights)]},
        "targets": [{"point": list(p), "weight": str(w)}
                    for p, w in zip(tgt.points, tgt.weights)],
        "cost": {"p": args.p if not float(args.p).is_integer() else int(args.p),
                 "q": args.q if not float(args.q).is_integer() else int(args.q)},
        "tolerance": tolerance,
        "mode": "exact",
        "output": "out",
    }
    text = json.dumps(config, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"gadget config -> {args.out} (gap = ({gadget.lambda_interval[0]!r}, 1))",
              file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
