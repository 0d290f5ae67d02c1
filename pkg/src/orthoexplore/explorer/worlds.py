"""World adapters: what the explorer can sense and how it moves.

A world exposes positions, shortest routes between them, and a ``sense``
call that proposes new tree nodes.  :class:`GeometricWorld` works on an
exact polygon with an unlimited omnidirectional sensor;
:class:`GridWorld` works on an occupancy grid built from simulated scans.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from ..geometry.extensions import (
    ClockwiseKey,
    blocking_vertices,
    boundary_chain,
    clockwise_origin,
    foreign_cells,
)
from ..geometry.paths import GeodesicGrid, point_along, simplify_path
from ..geometry.polygon import OrthoPolygon, Point, l1
from ..geometry.visibility import seen_boundary_intervals, visibility_polygon
from ..infogain import informative_goto, waypoint_indices
from .tree import NodeState
from ..occupancy import (
    OccupancyGrid,
    SensorSpec,
    clockwise_angle,
    free_distances,
    free_path,
    frontier_mask,
    integrate_scan,
    map_entropy,
    simulate_scan,
    synthesize_goals,
)

log = logging.getLogger(__name__)


@dataclass
class Route:
    points: list
    cum: list[Fraction]
    poses: tuple[int, ...] = ()  # indices of planned sensing poses

    @property
    def total(self) -> Fraction:
        return self.cum[-1]


@dataclass
class Candidate:
    position: Any
    kind: str
    key: Any
    order: Any
    region: Any = None
    payload: Any = None


class IntervalSet:
    """Union of closed intervals on a circle of the given circumference."""

    def __init__(self, circumference: Fraction):
        self.c = circumference
        self.items: list[tuple[Fraction, Fraction]] = []

    def add(self, a: Fraction, b: Fraction) -> None:
        self.items.append((a, b))
        self.items.sort()
        merged: list[list[Fraction]] = []
        for lo, hi in self.items:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        self.items = [tuple(m) for m in merged]

    def covers(self, start: Fraction, length: Fraction) -> bool:
        start %= self.c
        end = start + length
        if end <= self.c:
            return self._covers_linear(start, end)
        return self._covers_linear(start, self.c) and self._covers_linear(Fraction(0), end - self.c)

    def _covers_linear(self, a, b) -> bool:
        return any(lo <= a and b <= hi for lo, hi in self.items)

    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.items), Fraction(0))


class GeometricWorld:
    mode = "geometric"

    def __init__(self, P: OrthoPolygon, start: Point):
        if not P.contains(start):
            raise ValueError(f"start ({start[0]},{start[1]}) lies outside the polygon")
        self.P = P
        self.start = start
        root_bvs = blocking_vertices(P, start)
        self.cw = ClockwiseKey(P, clockwise_origin(P, start, [boundary_chain(P, bv) for bv in root_bvs]))
        self.seen = IntervalSet(P.perimeter)
        self.viewpoints: list[Point] = []

    def fmt(self, q) -> str:
        return f"({_num(q[0])},{_num(q[1])})"

    def xy(self, q) -> tuple[float, float]:
        return float(q[0]), float(q[1])

    def distance(self, a: Point, b: Point) -> Fraction:
        return GeodesicGrid(self.P, (a, b)).distance(a, b)

    def route(self, a: Point, b: Point) -> Route | None:
        pts = GeodesicGrid(self.P, (a, b)).path(a, b)
        cum = [Fraction(0)]
        for u, v in zip(pts, pts[1:]):
            cum.append(cum[-1] + l1(u, v))
        return Route(pts, cum)

    def stops(self, route: Route) -> list[int]:
        return [len(route.points) - 1]

    def cut(self, route: Route, elapsed: Fraction) -> tuple[Route, Fraction]:
        """Route prefix ending where the cluster is after ``elapsed``."""
        q = point_along(route.points, elapsed)
        pts = [p for p, c in zip(route.points, route.cum) if c < elapsed] + [q]
        pts = simplify_path(pts)
        cum = [Fraction(0)]
        for u, v in zip(pts, pts[1:]):
            cum.append(cum[-1] + l1(u, v))
        return Route(pts, cum), cum[-1]

    def arrive(self, pos: Point, t) -> None:
        pass

    def observe(self, pos: Point) -> None:
        vp = visibility_polygon(self.P, pos)
        offs = self.P._edge_offsets
        for ei, s0, s1 in seen_boundary_intervals(self.P, vp):
            self.seen.add(offs[ei] + s0, offs[ei] + s1)
        self.viewpoints.append(pos)

    def sense(self, pos: Point, tree) -> list[Candidate]:
        self.observe(pos)
        out = []
        for bv in blocking_vertices(self.P, pos):
            if bv.key in tree.keys:
                continue
            start, length = boundary_chain(self.P, bv)
            if self.seen.covers(start, length):
                continue
            out.append(
                Candidate(bv.extension_goal, "extension-goal", bv.key, self.cw(bv), foreign_cells(self.P, bv, pos), bv)
            )
        out.sort(key=lambda c: (c.order, c.key))
        return out

    def child_order(self, parent_pos, cand: Candidate):
        return cand.order

    def is_stale(self, node) -> bool:
        return False

    def extra_root_goals(self, pos, tree) -> list[Candidate]:
        return []

    def coverage(self) -> float:
        return float(self.seen.measure() / self.P.perimeter)


def _num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{float(v):.6g}"


@dataclass
class GridParams:
    min_frontier_size: int = 3
    goal_offset: int = 2
    dedupe_radius: int = 2
    stale_radius: int = 3
    scan_interval: int | None = None  # cells; default half the sensor range
    alpha: float = 1.0
    corridor_spacing: int = 2
    corridor_width: int = 2
    corridor_waypoints: int = 6
    planner_depth: int | None = None


class GridWorld:
    mode = "grid"

    def __init__(
        self,
        truth: np.ndarray,
        start: tuple[int, int],
        spec: SensorSpec,
        resolution: float = 0.05,
        origin=(0.0, 0.0),
        params: GridParams | None = None,
        seed: int = 0,
        l_max: float = 5.0,
        belief: OccupancyGrid | None = None,
    ):
        self.truth = np.asarray(truth, dtype=bool)
        if self.truth[start]:
            raise ValueError(f"start cell {start} is an obstacle")
        self.start = tuple(start)
        self.spec = spec
        self.res = Fraction(repr(resolution)) if isinstance(resolution, float) else Fraction(resolution)
        self.params = params or GridParams()
        if belief is None:
            belief = OccupancyGrid.like(self.truth, float(self.res), origin, l_max)
        elif belief.logodds.shape != self.truth.shape:
            raise ValueError("prior belief and truth grids differ in shape")
        self.grid = belief.copy()
        self.rng = np.random.default_rng(seed)
        self.entropy: list[tuple[Fraction, float]] = []
        self.scans = 0
        self._last_scan: tuple | None = None
        self._frontier_version = -1
        interval = self.params.scan_interval
        if interval is None:
            interval = max(1, int(spec.max_range / 2 / float(self.res)))
        self.interval = interval

    def fmt(self, q) -> str:
        return f"({q[0]},{q[1]})"

    def xy(self, q) -> tuple[float, float]:
        return self.grid.cell_center(q)

    def arrive(self, pos, t) -> None:
        if self._last_scan == (pos, t):
            return
        self._last_scan = (pos, t)
        scan = simulate_scan(self.truth, pos, self.spec, self.rng, float(self.res))
        integrate_scan(self.grid, scan, self.spec)
        self.scans += 1
        self.entropy.append((Fraction(t), map_entropy(self.grid)))

    def distance(self, a, b) -> Fraction | None:
        d = free_distances(self.grid, b)[a]
        return None if d < 0 else int(d) * self.res

    def route(self, a, b) -> Route | None:
        if self.params.alpha > 1:
            try:
                cells, plan = informative_goto(
                    self.grid, a, b, self.params.alpha, self.spec,
                    self.params.corridor_spacing, self.params.corridor_width,
                    self.params.planner_depth, self.params.corridor_waypoints,
                )
            except ValueError:
                return None
            return Route(cells, [i * self.res for i in range(len(cells))], tuple(waypoint_indices(cells, plan)))
        cells = free_path(self.grid, a, b)
        if cells is None:
            return None
        return Route(cells, [i * self.res for i in range(len(cells))])

    def stops(self, route: Route) -> list[int]:
        last = len(route.points) - 1
        out = set(range(self.interval, last, self.interval)) | {i for i in route.poses if 0 < i < last}
        return sorted(out) + [last]

    def cut(self, route: Route, elapsed: Fraction) -> tuple[Route, Fraction]:
        # finish the cell being entered
        i = min(math.ceil(elapsed / self.res), len(route.points) - 1)
        return Route(route.points[: i + 1], route.cum[: i + 1]), route.cum[i]

    def sense(self, pos, tree) -> list[Candidate]:
        p = self.params
        goals = synthesize_goals(self.grid, pos, p.min_frontier_size, p.goal_offset, p.dedupe_radius)
        out = []
        for g in goals:
            if g.cell in tree.keys:
                continue
            if any(
                n.state is not NodeState.EXPLORED and _cheb(g.cell, n.position) <= p.dedupe_radius for n in tree.nodes
            ):
                continue
            if self._stale_cell(g.cell):
                continue
            out.append(Candidate(g.cell, g.kind, g.cell, clockwise_angle(pos, g.cell), None, g))
        return out

    def child_order(self, parent_pos, cand: Candidate):
        return clockwise_angle(parent_pos, cand.position)

    def _stale_cell(self, cell) -> bool:
        # unknown cells with no free neighbour (inside thick walls) never count
        if self._frontier_version != self.scans:
            self._frontier = frontier_mask(self.grid)
            self._frontier_version = self.scans
        r = self.params.stale_radius
        r0, c0 = cell
        win = self._frontier[max(r0 - r, 0) : r0 + r + 1, max(c0 - r, 0) : c0 + r + 1]
        return not win.any()

    def is_stale(self, node) -> bool:
        return node.kind != "root" and self._stale_cell(node.position)

    def extra_root_goals(self, pos, tree) -> list[Candidate]:
        return self.sense(pos, tree)


def _cheb(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))
