"""orthoexplore command line.

Output directories default to ``$ORTHOEXPLORE_OUT`` (or ``./runs``) plus the
scenario name.  Every artifact carries the seed in its header.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from .explorer.bounds import LOG_BASE, competitive_bound
from .explorer.engine import Explorer, explore
from .explorer.worlds import GeometricWorld
from .geometry.polygon import PolygonError, load_polygon
from .oracle import OracleLimitError, optimal_exploration_cost
from .render import LAYERS, RenderSpec, render_svg
from .sim import (
    ScenarioError,
    Scenario,
    batch,
    batch_table,
    build_world,
    fmt_num,
    load_scenario,
    run_scenario,
    write_artifacts,
)

DEFAULT_SEED = 0
OUT_ENV = "ORTHOEXPLORE_OUT"


class CliError(Exception):
    pass


def _out_root(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUT_ENV, "runs"))


def _apply_flags(s: Scenario, a) -> Scenario:
    changes = {}
    for name in ("p", "alpha", "seed", "mode", "resolution"):
        v = getattr(a, name, None)
        if v is not None:
            changes[name] = v
    if getattr(a, "start", None):
        changes["start"] = tuple(Fraction(v) for v in a.start)
    s = dataclasses.replace(s, **changes)
    s.validate()
    return s


def _scenario(path: str, a) -> Scenario:
    s = load_scenario(path)
    if a.seed is None:
        a.seed = s.seed if s.seed is not None else DEFAULT_SEED
    return _apply_flags(s, a)


def cmd_explore(a) -> int:
    s = _scenario(a.scenario, a)
    rec = run_scenario(s)
    out = Path(a.out) if a.out else _out_root(None) / s.name
    files = write_artifacts(rec, out)
    r = rec.result
    print(
        f"{s.name}: makespan={fmt_num(r.makespan)} c_tree={fmt_num(r.c_tree)} "
        f"d_max={fmt_num(r.d_max)} bound={fmt_num(r.tree_bound())} -> {out} ({len(files)} files)"
    )
    return 0


def cmd_batch(a) -> int:
    scenarios = []
    for path in a.scenarios:
        s = load_scenario(path)
        b = argparse.Namespace(**vars(a))
        if b.seed is None:
            b.seed = s.seed
        scenarios.append(_apply_flags(s, b))
    rows = batch(scenarios, a.reps)
    text = batch_table(rows)
    out = _out_root(a.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "batch.csv").write_text(text, encoding="utf-8")
    if a.artifacts:
        for s, seed, rec, _ in rows:
            if rec is not None:
                write_artifacts(rec, out / f"{s.name}-seed{seed}")
    sys.stdout.write(text)
    failed = sum(1 for r in rows if r[2] is None)
    if failed:
        print(f"{failed} of {len(rows)} runs failed", file=sys.stderr)
    return 0


def cmd_bound(a) -> int:
    if a.pmin < 1 or a.pmax < a.pmin:
        raise CliError("need 1 <= --pmin <= --pmax")
    w = csv.writer(sys.stdout, lineterminator="\n")
    sys.stdout.write(f"# log base {LOG_BASE}, alpha={fmt_num(a.alpha)}\n")
    w.writerow(["p", "bound"])
    for p in range(a.pmin, a.pmax + 1):
        w.writerow([p, f"{competitive_bound(p, alpha=a.alpha):.10f}"])
    return 0


def compare_rows(directory: Path, ps, k: int):
    """(instance, p, makespan, lower, upper, ratio, bound, status) per instance and p."""
    rows = []
    for path in sorted(directory.glob("*.poly")):
        try:
            P, start = load_polygon(path)
        except PolygonError as exc:
            print(f"skipping {path}: {exc}", file=sys.stderr)
            continue
        if start is None:
            print(f"skipping {path}: no '# start:' line", file=sys.stderr)
            continue
        for p in ps:
            try:
                br = optimal_exploration_cost(P, p, k, start)
            except OracleLimitError as exc:
                print(f"skipping {path.name} p={p}: {exc}", file=sys.stderr)
                continue
            res = explore(GeometricWorld(P, start), p)
            bound = competitive_bound(p)
            if br.lower == 0:
                ratio = 1.0 if res.makespan == 0 else math.inf
            else:
                ratio = float(res.makespan / br.lower)
            status = "pass" if ratio <= bound else "fail"
            rows.append((path.stem, p, res.makespan, br.lower, br.upper, ratio, bound, status))
    return rows


def cmd_compare(a) -> int:
    d = Path(a.instances)
    if not d.is_dir():
        raise FileNotFoundError(f"instance directory not found: {d}")
    rows = compare_rows(d, a.p, a.k)
    w = csv.writer(sys.stdout, lineterminator="\n")
    sys.stdout.write(f"# seed={a.seed} k={a.k}\n")
    w.writerow(["instance", "p", "makespan", "opt_lower", "opt_upper", "ratio", "bound", "status"])
    for row in rows:
        w.writerow([fmt_num(v) if not isinstance(v, float) else f"{v:.6f}" for v in row])
    return 0


def cmd_render(a) -> int:
    s = _scenario(a.scenario, a)
    world = build_world(s)
    result = Explorer(world, s.p).run()
    spec = RenderSpec(tuple(a.layers), a.output, a.scale)
    text = render_svg(world, result, spec, f"seed={s.seed} scenario={s.name}")
    out = Path(a.output) if a.output else _out_root(None) / f"{s.name}.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(out)
    return 0


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=int, help="robot count (overrides the file)")
    p.add_argument("--alpha", type=float, help="budget factor for informative paths")
    p.add_argument("--mode", choices=("geometric", "grid"))
    p.add_argument("--start", nargs=2, metavar=("A", "B"), help="x y, or row col in grid mode")
    p.add_argument("--resolution", type=float, help="grid cell size in metres")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default: file value, else {DEFAULT_SEED})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orthoexplore", description="Multi-robot exploration of orthogonal worlds.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("explore", help="run one scenario and write its artifacts")
    p.add_argument("scenario")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<scenario> or runs/<scenario>)")
    _scenario_flags(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("batch", help="run scenarios over consecutive seeds")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--artifacts", action="store_true", help="also write per-run artifacts")
    _scenario_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("bound", help="competitive-ratio table")
    p.add_argument("--pmin", type=int, default=1)
    p.add_argument("--pmax", type=int, default=16)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("compare", help="engine makespan against the offline optimum")
    p.add_argument("instances", help="directory of .poly files with '# start:' lines")
    p.add_argument("--p", type=int, nargs="+", default=[1, 2])
    p.add_argument("--k", type=int, default=9, help="crossing samples per extension")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="run a scenario and write an SVG overview")
    p.add_argument("scenario")
    p.add_argument("-o", "--output")
    p.add_argument("--layers", nargs="+", default=["polygon", "grid", "tree", "trajectories"], choices=LAYERS)
    p.add_argument("--scale", type=float, default=40.0)
    _scenario_flags(p)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, PolygonError, CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
