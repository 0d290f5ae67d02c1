"""Budgeted informative paths over an occupancy grid.

The reward of a set of poses is a coverage-style surrogate for mutual
information: along each beam a cell contributes its binary entropy times
the probability that the beam reaches it, and a cell seen from several
poses or beams counts once, at its best value.  That makes the set reward
monotone and submodular, which is what the recursive greedy planner needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .occupancy import (
    OccupancyGrid,
    SensorSpec,
    beam_angles,
    binary_entropy,
    free_distances,
    free_path,
    ray_table,
)

Cell = tuple[int, int]


class InfeasibleBudgetError(ValueError):
    pass


class DisconnectedError(ValueError):
    pass


class RewardModel:
    """Surrogate mutual information of pose sets on a fixed belief snapshot."""

    def __init__(self, prob: np.ndarray | OccupancyGrid, spec: SensorSpec, resolution: float | None = None, l_max: float = 5.0):
        if isinstance(prob, OccupancyGrid):
            resolution = prob.resolution if resolution is None else resolution
            l_max = prob.l_max
            prob = prob.prob
        self.prob = np.asarray(prob, dtype=float)
        self.spec = spec
        self.resolution = 0.05 if resolution is None else resolution
        p = self.prob.copy()
        with np.errstate(divide="ignore"):
            lo = np.log(p / (1 - p))
        certain = np.abs(lo) >= l_max / 2
        # saturated cells are treated as fully known
        p[certain] = np.round(p[certain])
        self.p = p
        self.H = binary_entropy(p)
        self._cache: dict[Cell, tuple[np.ndarray, np.ndarray]] = {}

    def contributions(self, pose: Cell) -> tuple[np.ndarray, np.ndarray]:
        """(flat cell indices, values) that a scan from ``pose`` would contribute."""
        if pose in self._cache:
            return self._cache[pose]
        h, w = self.p.shape
        r0, c0 = pose
        if not (0 <= r0 < h and 0 <= c0 < w) or self.p[pose] >= 0.5:
            raise ValueError(f"pose {pose} is not a known free cell")
        t = ray_table(beam_angles(self.spec), round(self.spec.max_range / self.resolution, 9))
        rr, cc = r0 + t.dr, c0 + t.dc
        m = t.dr.shape[1]
        valid = (np.arange(m)[None, :] < t.length[:, None]) & (np.arange(m)[None, :] > 0)
        inb = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        p = np.ones(rr.shape)
        p[inb] = self.p[rr[inb], cc[inb]]
        Hc = np.zeros(rr.shape)
        Hc[inb] = self.H[rr[inb], cc[inb]]
        p = np.where(valid, p, 0.0)
        keep = np.cumprod(1.0 - p, axis=1)
        reach = np.concatenate([np.ones((len(p), 1)), keep[:, :-1]], axis=1)
        val = np.where(valid & inb, Hc * reach, 0.0)
        flat = (rr * w + cc)[valid & inb]
        vals = val[valid & inb]
        order = np.lexsort((-vals, flat))
        flat, vals = flat[order], vals[order]
        first = np.ones(len(flat), dtype=bool)
        first[1:] = flat[1:] != flat[:-1]
        res = (flat[first], vals[first])
        self._cache[pose] = res
        return res

    def reward(self, poses) -> float:
        best: dict[int, float] = {}
        for q in poses:
            idx, vals = self.contributions(tuple(q))
            for i, v in zip(idx.tolist(), vals.tolist()):
                if v > best.get(i, 0.0):
                    best[i] = v
        return float(sum(best.values()))


def pose_mutual_information(grid, poses, spec: SensorSpec) -> float:
    return RewardModel(grid, spec).reward(poses)


class SetReward:
    """Bitmask-indexed reward over a fixed vertex list, memoised."""

    def __init__(self, model: RewardModel, cells: list[Cell]):
        idx = [model.contributions(c) for c in cells]
        support = np.unique(np.concatenate([i for i, _ in idx])) if idx else np.array([], dtype=np.int64)
        pos = {v: k for k, v in enumerate(support.tolist())}
        self.table = np.zeros((len(cells), len(support)))
        for row, (i, v) in enumerate(idx):
            self.table[row, [pos[x] for x in i.tolist()]] = v
        self._memo: dict[int, float] = {0: 0.0}

    def __call__(self, mask: int) -> float:
        r = self._memo.get(mask)
        if r is None:
            rows = [k for k in range(self.table.shape[0]) if mask >> k & 1]
            r = float(self.table[rows].max(axis=0).sum()) if self.table.shape[1] else 0.0
            self._memo[mask] = r
        return r


@dataclass
class CorridorGraph:
    cells: list[Cell]
    axis: list[int]  # position along the shortest path, used by the forward-only rule
    lattice: list[tuple[int, int]]
    edges: dict[int, dict[int, int]]  # adjacency with grid geodesic lengths in cells
    s: int
    t: int
    dist: list[list[float]] = field(default_factory=list, repr=False)
    nxt: list[list[int]] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._all_pairs()

    @property
    def n(self) -> int:
        return len(self.cells)

    def _all_pairs(self):
        n = self.n
        INF = math.inf
        d = [[INF] * n for _ in range(n)]
        nxt = [[-1] * n for _ in range(n)]
        for u in range(n):
            d[u][u] = 0
            nxt[u][u] = u
            for v, w in self.edges[u].items():
                if w < d[u][v]:
                    d[u][v] = w
                    nxt[u][v] = v
        for k in range(n):
            dk = d[k]
            for i in range(n):
                dik = d[i][k]
                if dik == INF:
                    continue
                di = d[i]
                for j in range(n):
                    if dik + dk[j] < di[j]:
                        di[j] = dik + dk[j]
                        nxt[i][j] = nxt[i][k]
        self.dist, self.nxt = d, nxt

    def shortest(self, u: int, v: int) -> list[int]:
        if self.nxt[u][v] < 0:
            raise DisconnectedError(f"corridor vertices {u} and {v} are disconnected")
        out = [u]
        while u != v:
            u = self.nxt[u][v]
            out.append(u)
        return out

    def walk_cost(self, walk: list[int]) -> int:
        return sum(self.edges[a][b] for a, b in zip(walk, walk[1:]))

    @property
    def edge_gcd(self) -> int:
        g = 0
        for u in self.edges:
            for w in self.edges[u].values():
                g = gcd(g, int(w))
        return max(g, 1)


def build_corridor_graph(
    grid: OccupancyGrid, s: Cell, t: Cell, spacing: int = 2, width: int = 2, max_waypoints: int | None = None
) -> CorridorGraph:
    """Lattice of poses on and beside the shortest free path from s to t."""
    path = free_path(grid, s, t)
    if path is None:
        raise DisconnectedError(f"{s} and {t} are not connected through known free space")
    if max_waypoints and len(path) > spacing * (max_waypoints - 1) + 1:
        spacing = math.ceil((len(path) - 1) / (max_waypoints - 1))
    idx = list(range(0, len(path), spacing))
    if idx[-1] != len(path) - 1:
        idx.append(len(path) - 1)
    reach = free_distances(grid, s)
    cells: list[Cell] = []
    axis, lattice = [], []
    where: dict[tuple[int, int], int] = {}
    seen: set[Cell] = set()
    offsets = [m for j in range(1, width + 1) for m in (j, -j)]
    # path poses first so a flank never claims a cell the path needs
    slots = [(k, i, 0) for k, i in enumerate(idx)] + [(k, i, m) for k, i in enumerate(idx) for m in offsets]
    for k, i, m in slots:
        a = path[idx[max(k - 1, 0)]]
        b = path[idx[min(k + 1, len(idx) - 1)]]
        dr, dc = b[0] - a[0], b[1] - a[1]
        # perpendicular to the dominant travel axis
        perp = (0, 1) if abs(dr) >= abs(dc) else (1, 0)
        q = (path[i][0] + m * spacing * perp[0], path[i][1] + m * spacing * perp[1])
        if m and (not grid.in_bounds(q) or reach[q] < 0):
            continue
        if q in seen:
            continue
        seen.add(q)
        where[(k, m)] = len(cells)
        cells.append(q)
        axis.append(k)
        lattice.append((k, m))
    edges: dict[int, dict[int, int]] = {u: {} for u in range(len(cells))}
    dcache = {}
    for (k, m), u in where.items():
        for dk in (-1, 0, 1):
            for dm in (-1, 0, 1):
                v = where.get((k + dk, m + dm))
                if v is None or v == u:
                    continue
                if u not in dcache:
                    dcache[u] = free_distances(grid, cells[u])
                w = int(dcache[u][cells[v]])
                if w > 0:
                    edges[u][v] = w
    return CorridorGraph(cells, axis, lattice, edges, where[(0, 0)], where[(len(idx) - 1, 0)])


@dataclass
class BudgetedPath:
    vertices: list[int]
    cost: float
    reward: float
    cells: list[Cell] = field(default_factory=list)

    @property
    def hops(self) -> int:
        return len(self.vertices) - 1


@dataclass
class PlannerStats:
    candidates: int = 0
    calls: int = 0
    best_by_depth: dict[int, float] = field(default_factory=dict)

    def trace_rows(self):
        for d in sorted(self.best_by_depth):
            yield d, self.best_by_depth[d]


def _bit(vs) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def _rg(G: CorridorGraph, f: SetReward, s, t, B, X, depth, step, forward, stats, memo):
    key = (s, t, B, X, depth)
    if key in memo:
        return memo[key]
    stats.calls += 1
    if G.dist[s][t] > B:
        memo[key] = None
        return None
    best = G.shortest(s, t)
    base = f(X)
    best_gain = f(X | _bit(best)) - base
    if depth > 0:
        lo, hi = (G.axis[s], G.axis[t]) if G.axis[s] <= G.axis[t] else (G.axis[t], G.axis[s])
        for v in range(G.n):
            if forward and not lo <= G.axis[v] <= hi:
                continue
            b1 = Fraction(0)
            while b1 <= B:
                if G.dist[s][v] <= b1 and G.dist[v][t] <= B - b1:
                    stats.candidates += 1
                    p1 = _rg(G, f, s, v, b1, X, depth - 1, step, forward, stats, memo)
                    if p1 is not None:
                        X1 = X | _bit(p1)
                        p2 = _rg(G, f, v, t, B - b1, X1, depth - 1, step, forward, stats, memo)
                        if p2 is not None:
                            walk = p1 + p2[1:]
                            gain = f(X | _bit(walk)) - base
                            if gain > best_gain + 1e-12:
                                best, best_gain = walk, gain
                b1 += step
    stats.best_by_depth[depth] = max(stats.best_by_depth.get(depth, 0.0), best_gain)
    memo[key] = best
    return best


def _run(G, model_or_reward, s, t, B, X, depth, forward, split_step, stats):
    f = model_or_reward if isinstance(model_or_reward, SetReward) else SetReward(model_or_reward, G.cells)
    B = Fraction(B)
    if G.dist[s][t] > B:
        raise InfeasibleBudgetError(f"budget {B} is below the shortest distance {G.dist[s][t]}")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    step = Fraction(split_step) if split_step else Fraction(G.edge_gcd)
    stats = stats if stats is not None else PlannerStats()
    Xm = _bit(X)
    walk = _rg(G, f, s, t, B, Xm, depth, step, forward, stats, {})
    cost = G.walk_cost(walk)
    assert cost <= B
    return BudgetedPath(walk, cost, f(Xm | _bit(walk)) - f(Xm), [G.cells[v] for v in walk])


def recursive_greedy(G, reward, s, t, B, X=(), depth=None, split_step=None, stats=None) -> BudgetedPath:
    """Recursive greedy submodular orienteering.

    At each level every middle vertex v and budget split (B1, B - B1) is
    tried: the first half is planned from s to v, the second from v to t
    given what the first half already collects.  ``reward`` is a
    :class:`RewardModel` or a prepared :class:`SetReward`.
    """
    if depth is None:
        depth = default_depth(G)
    return _run(G, reward, s, t, B, X, depth, False, split_step, stats)


def forward_only_recursive_greedy(G, reward, s, t, B, X=(), depth=None, split_step=None, stats=None) -> BudgetedPath:
    """As :func:`recursive_greedy`, but middle vertices must lie between s and t
    along the corridor axis, so the walk never heads back toward s."""
    if depth is None:
        depth = default_depth(G)
    return _run(G, reward, s, t, B, X, depth, True, split_step, stats)


def default_depth(G: CorridorGraph) -> int:
    hops = len(G.shortest(G.s, G.t)) - 1
    return max(1, math.ceil(math.log2(max(hops, 1))))


def informative_goto(
    grid: OccupancyGrid,
    s: Cell,
    t: Cell,
    alpha: float,
    spec: SensorSpec,
    spacing: int = 2,
    width: int = 2,
    depth: int | None = None,
    max_waypoints: int = 6,
    splits: int = 6,
    stats: PlannerStats | None = None,
) -> tuple[list[Cell], BudgetedPath]:
    """Detour-with-budget path from s to t; returns the cell walk and the corridor plan.

    The budget is alpha times the free-space shortest distance, so the cell
    walk is never longer than that.  Plans for alpha/2, alpha/4, ... are also
    computed and the best reward kept, so raising alpha never lowers it.
    """
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    direct = free_path(grid, s, t)
    if direct is None:
        raise DisconnectedError(f"{s} and {t} are not connected through known free space")
    d = len(direct) - 1
    if alpha == 1 or d == 0:
        return direct, BudgetedPath([0], d, 0.0, direct)
    G = build_corridor_graph(grid, s, t, spacing, width, max_waypoints)
    if depth is None:
        depth = min(default_depth(G), 2)
    model = RewardModel(grid, spec)
    B = Fraction(alpha).limit_denominator(1000) * d
    # coarse budget splits are not monotone in B, so also try halved budgets
    plan = None
    b = B
    while b >= d:
        step = max(Fraction(G.edge_gcd), Fraction(math.ceil(b / splits)))
        cand = forward_only_recursive_greedy(G, model, G.s, G.t, b, (), depth, step, stats)
        if plan is None or (cand.reward, -cand.cost) > (plan.reward, -plan.cost):
            plan = cand
        if b == d:
            break
        b = max(b / 2, Fraction(d))
    cells = [s]
    for u, v in zip(plan.vertices, plan.vertices[1:]):
        leg = free_path(grid, G.cells[u], G.cells[v])
        cells.extend(leg[1:])
    assert len(cells) - 1 <= B
    return cells, plan


def waypoint_indices(cells: list[Cell], plan: BudgetedPath) -> list[int]:
    """Positions in the cell walk where the planned poses are reached."""
    out, j = [], 0
    for c in plan.cells:
        while j < len(cells) and cells[j] != c:
            j += 1
        if j < len(cells):
            out.append(j)
    return out
