"""Scenario files, single runs, batches and run artifacts.

A scenario is an INI file::

    [scenario]
    world = l6.poly          ; polygon file, PGM map, or builtin:<name>
    mode = geometric         ; or grid
    p = 2
    start = 1 3              ; x y (geometric) or row col (grid)
    alpha = 1
    seed = 0
    resolution = 0.25        ; grid mode only

    [sensor]
    max_range = 5.0

    [thresholds]
    min_frontier_size = 3

Relative world paths are resolved against the scenario file's directory.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import instances
from .explorer.bounds import competitive_bound
from .explorer.engine import ExplorationResult, Explorer
from .explorer.worlds import GeometricWorld, GridParams, GridWorld
from .geometry.polygon import PolygonError, load_polygon, point
from .occupancy import (
    SensorSpec,
    belief_csv,
    belief_image,
    frontier_mask,
    pgm_bytes,
    rasterize_polygon,
    read_pgm,
    truth_from_pgm,
)
from .render import RenderSpec, render_svg

log = logging.getLogger(__name__)

MODES = ("geometric", "grid")
SENSOR_KEYS = {f.name for f in dataclasses.fields(SensorSpec)}
THRESHOLD_KEYS = {"min_frontier_size", "goal_offset", "dedupe_radius", "stale_radius", "scan_interval", "l_max"}
BUILTINS = ("unit-square", "l6", "nested-staircase", "two-room", "pinwheel", "corridor", "half-room")


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    world: str
    mode: str = "geometric"
    p: int = 1
    start: tuple | None = None
    alpha: float = 1.0
    seed: int = 0
    resolution: float = 0.25
    sensor: dict[str, float] = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)
    base: Path = Path(".")
    name: str = "scenario"

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.p < 1:
            raise ScenarioError("p must be at least 1")
        if self.alpha < 1:
            raise ScenarioError("alpha must be at least 1")
        if self.mode == "geometric" and self.alpha != 1:
            raise ScenarioError("alpha only applies in grid mode")
        if self.resolution <= 0:
            raise ScenarioError("resolution must be positive")
        unknown = set(self.sensor) - SENSOR_KEYS
        if unknown:
            raise ScenarioError(f"unknown sensor field(s): {', '.join(sorted(unknown))}")
        unknown = set(self.thresholds) - THRESHOLD_KEYS
        if unknown:
            raise ScenarioError(f"unknown threshold field(s): {', '.join(sorted(unknown))}")

    def echo(self) -> dict[str, Any]:
        out = {
            "world": self.world,
            "mode": self.mode,
            "p": self.p,
            "start": " ".join(str(v) for v in self.start) if self.start is not None else "",
            "alpha": self.alpha,
            "seed": self.seed,
        }
        if self.mode == "grid":
            out["resolution"] = self.resolution
        out.update({f"sensor.{k}": v for k, v in sorted(self.sensor.items())})
        out.update({f"thresholds.{k}": v for k, v in sorted(self.thresholds.items())})
        return out


def _number(v: str):
    try:
        return int(v)
    except ValueError:
        return float(v)


def parse_scenario(text: str, source: str = "<scenario>", base: Path | None = None) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}".splitlines()[0]) from None
    if not cp.has_section("scenario"):
        raise ScenarioError(f"{source}: missing [scenario] section")
    sc = cp["scenario"]
    if "world" not in sc:
        raise ScenarioError(f"{source}: [scenario] needs a world entry")
    try:
        s = Scenario(
            world=sc["world"].strip(),
            mode=sc.get("mode", "geometric").strip(),
            p=sc.getint("p", 1),
            start=tuple(Fraction(v) for v in sc["start"].split()) if sc.get("start", "").strip() else None,
            alpha=sc.getfloat("alpha", 1.0),
            seed=sc.getint("seed", 0),
            resolution=sc.getfloat("resolution", 0.25),
            sensor={k: _number(v) for k, v in cp["sensor"].items()} if cp.has_section("sensor") else {},
            thresholds={k: _number(v) for k, v in cp["thresholds"].items()} if cp.has_section("thresholds") else {},
            base=base or Path("."),
            name=Path(source).stem,
        )
    except ValueError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    if s.start is not None and len(s.start) != 2:
        raise ScenarioError(f"{source}: start needs two numbers")
    s.validate()
    return s


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text, str(path), path.parent)


# ---------------------------------------------------------------- worlds


def _builtin_polygon(name: str):
    if name == "unit-square":
        P = instances.unit_square()
        return P, point(Fraction(1, 2), Fraction(1, 2))
    if name == "l6":
        return instances.l6(), point(1, 3)
    if name == "nested-staircase":
        return instances.nested_staircase()
    if name == "two-room":
        return instances.two_room()
    if name == "pinwheel":
        return instances.pinwheel()
    if name == "corridor":
        return instances.pinwheel(4)
    raise ScenarioError(f"unknown builtin world {name!r} (known: {', '.join(BUILTINS)})")


def _world_path(s: Scenario) -> Path:
    p = Path(s.world)
    return p if p.is_absolute() else s.base / p


def build_world(s: Scenario):
    """Instantiate the world object a scenario describes."""
    s.validate()
    spec = SensorSpec(**s.sensor) if s.sensor else SensorSpec()
    prior = None
    if s.world.startswith("builtin:"):
        name = s.world.split(":", 1)[1]
        if name == "half-room":
            if s.mode != "grid":
                raise ScenarioError("builtin:half-room is a grid world")
            truth, prior, cell = instances.half_known_room()
            origin = prior.origin
            resolution = prior.resolution
            return _grid_world(s, truth, cell, spec, resolution, origin, prior)
        P, start = _builtin_polygon(name)
    else:
        path = _world_path(s)
        if not path.exists():
            raise FileNotFoundError(f"world file not found: {path}")
        if path.suffix.lower() == ".pgm":
            if s.mode != "grid":
                raise ScenarioError(f"{path}: a PGM map needs mode = grid")
            truth = truth_from_pgm(read_pgm(path))
            if s.start is None:
                raise ScenarioError("grid worlds from PGM need a start cell")
            cell = (int(s.start[0]), int(s.start[1]))
            return _grid_world(s, truth, cell, spec, s.resolution, (0.0, 0.0), None)
        try:
            P, start = load_polygon(path)
        except PolygonError as exc:
            raise ScenarioError(str(exc)) from None
    if s.mode == "geometric":
        start = point(*s.start) if s.start is not None else start
        if start is None:
            raise ScenarioError("no start location given")
        if not P.contains(start):
            raise ScenarioError(f"start ({start[0]}, {start[1]}) lies outside the polygon")
        return GeometricWorld(P, start)
    truth, origin = rasterize_polygon(P, s.resolution)
    if s.start is not None:
        cell = (int(s.start[0]), int(s.start[1]))
    elif start is not None:
        cell = (
            int(math.floor((float(start[1]) - origin[1]) / s.resolution)),
            int(math.floor((float(start[0]) - origin[0]) / s.resolution)),
        )
    else:
        raise ScenarioError("no start location given")
    return _grid_world(s, truth, cell, spec, s.resolution, origin, None)


def _grid_world(s: Scenario, truth, cell, spec, resolution, origin, prior):
    h, w = truth.shape
    if not (0 <= cell[0] < h and 0 <= cell[1] < w) or truth[cell]:
        raise ScenarioError(f"start cell {cell} is not free space")
    th = dict(s.thresholds)
    l_max = float(th.pop("l_max", prior.l_max if prior is not None else 5.0))
    params = GridParams(alpha=s.alpha, **{k: int(v) for k, v in th.items()})
    return GridWorld(truth, cell, spec, resolution, origin, params, s.seed, l_max, prior)


# ---------------------------------------------------------------- runs


@dataclass
class RunRecord:
    scenario: Scenario
    world: Any
    result: ExplorationResult
    entropy: list[tuple[Fraction, float]]
    runtime: float  # wall-clock seconds; never written to artifacts

    @property
    def makespan(self) -> Fraction:
        return self.result.makespan

    @property
    def total_distance(self) -> Fraction:
        return sum(self.result.distances.values(), Fraction(0))

    @property
    def final_entropy(self) -> float | None:
        return self.entropy[-1][1] if self.entropy else None

    def metrics(self) -> dict[str, Any]:
        r = self.result
        out = dict(self.scenario.echo())
        out.update(
            makespan=r.makespan,
            total_distance=self.total_distance,
            c_tree=r.c_tree,
            d_max=r.d_max,
            tree_bound=r.tree_bound(),
            competitive_bound=competitive_bound(r.p, alpha=self.scenario.alpha),
            nodes=len(r.tree),
            visits=len(r.visits),
        )
        if self.world.mode == "geometric":
            out["boundary_seen"] = self.world.coverage()
        else:
            out["final_entropy"] = self.final_entropy
            out["scans"] = self.world.scans
            out["unknown_cells"] = int(self.world.grid.unknown.sum())
            out["frontier_cells"] = int(frontier_mask(self.world.grid).sum())
        for rid in sorted(r.distances):
            out[f"distance.robot{rid}"] = r.distances[rid]
        return out


def run_scenario(s: Scenario) -> RunRecord:
    world = build_world(s)
    t0 = time.perf_counter()
    result = Explorer(world, s.p).run()
    runtime = time.perf_counter() - t0
    bound = result.tree_bound()
    if result.makespan > bound:
        log.warning("makespan %s exceeds the tree bound %s", fmt_num(result.makespan), fmt_num(bound))
    entropy = list(world.entropy) if world.mode == "grid" else []
    return RunRecord(s, world, result, entropy, runtime)


def batch(scenarios: list[Scenario], repetitions: int = 1) -> list[tuple[Scenario, int, RunRecord | None, str]]:
    """One run per (scenario, seed); seeds count up from each scenario's own seed.

    A failing scenario is reported in its rows and the batch moves on.
    """
    rows = []
    for s in scenarios:
        for k in range(repetitions):
            sk = dataclasses.replace(s, seed=s.seed + k)
            try:
                rows.append((sk, sk.seed, run_scenario(sk), ""))
            except (ScenarioError, FileNotFoundError, ValueError, RuntimeError) as exc:
                log.warning("scenario %s seed %d failed: %s", s.name, sk.seed, exc)
                rows.append((sk, sk.seed, None, str(exc)))
    return rows


# ---------------------------------------------------------------- artifacts


def fmt_num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{float(v):.10g}"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def _csv_text(header: str, cols: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([fmt_num(v) for v in row])
    return buf.getvalue()


def artifact_texts(rec: RunRecord, render: RenderSpec | None = None) -> dict[str, str | bytes]:
    """File name -> content for every artifact of a run."""
    s = rec.scenario
    head = f"seed={s.seed} scenario={s.name} mode={s.mode} p={s.p} alpha={fmt_num(s.alpha)}"
    world = rec.world
    m = rec.metrics()
    files: dict[str, str | bytes] = {}
    files["metrics.csv"] = _csv_text(head, ["metric", "value"], m.items())
    traj = []
    for rid in sorted(rec.result.trajectories):
        for t, q in rec.result.trajectories[rid]:
            x, y = world.xy(q)
            traj.append((rid, t, x, y))
    files["trajectories.csv"] = _csv_text(head, ["robot", "t", "x", "y"], traj)
    files["entropy.csv"] = _csv_text(head, ["t", "bits"], rec.entropy)
    files["tree.dot"] = f"// {head}\n" + rec.result.tree.to_dot(world.fmt)
    files["events.log"] = f"# {head}\n" + "".join(e + "\n" for e in rec.result.events)
    spec = render or RenderSpec(("polygon", "grid", "tree", "trajectories", "extensions"))
    files["overview.svg"] = render_svg(world, rec.result, spec, head)
    if world.mode == "grid":
        files["map.pgm"] = pgm_bytes(belief_image(world.grid), comment=head)
        files["belief.csv"] = belief_csv(world.grid, head)
    return files


def write_artifacts(rec: RunRecord, out_dir: str | Path, render: RenderSpec | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in artifact_texts(rec, render).items():
        path = out / name
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, encoding="utf-8")
        written.append(path)
    return written


BATCH_COLUMNS = [
    "scenario", "seed", "mode", "p", "alpha", "status", "makespan", "total_distance",
    "c_tree", "d_max", "tree_bound", "final_entropy", "error",
]


def batch_table(rows) -> str:
    out = []
    for s, seed, rec, err in rows:
        if rec is None:
            out.append((s.name, seed, s.mode, s.p, s.alpha, "error", None, None, None, None, None, None, err))
            continue
        r = rec.result
        out.append(
            (s.name, seed, s.mode, s.p, s.alpha, "ok", r.makespan, rec.total_distance,
             r.c_tree, r.d_max, r.tree_bound(), rec.final_entropy, "")
        )
    seeds = sorted({seed for _, seed, _, _ in rows})
    return _csv_text(f"seed={','.join(map(str, seeds))} batch", BATCH_COLUMNS, out)
