"""Brute-force ground truth for small instances."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .geometry.extensions import essential_extensions
from .geometry.paths import GeodesicGrid
from .geometry.polygon import OrthoPolygon, Point
from .infogain import BudgetedPath, CorridorGraph, RewardModel, SetReward
from .occupancy import SensorSpec, beam_angles, ray_table


class OracleLimitError(ValueError):
    pass


# ---------------------------------------------------------------- visibility


@dataclass
class SampledVisibility:
    points: np.ndarray  # (n, 2) float coordinates of samples strictly inside P
    exact: list[Point]
    visible: np.ndarray  # bool


def _quadrant_table(P: OrthoPolygon) -> dict[Point, dict[tuple[int, int], bool]]:
    gx = min((b - a for a, b in zip(P.xs, P.xs[1:])), default=Fraction(1))
    gy = min((b - a for a, b in zip(P.ys, P.ys[1:])), default=Fraction(1))
    delta = min(gx, gy) / 4
    out = {}
    for v in P.vertices:
        out[v] = {
            (sx, sy): P.contains((v[0] + sx * delta, v[1] + sy * delta), closed=False)
            for sx in (-1, 1)
            for sy in (-1, 1)
        }
    return out


def _closure_dir(q: dict, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Whether a short step in direction (sx, sy) from a vertex stays in the closure."""
    out = np.zeros(sx.shape, dtype=bool)
    for (qx, qy), inside in q.items():
        if not inside:
            continue
        out |= ((sx == qx) | (sx == 0)) & ((sy == qy) | (sy == 0))
    return out


def sampled_visibility(P: OrthoPolygon, x: Point, pitch) -> SampledVisibility:
    """Visibility of pitch-spaced cell-centre samples, decided by exact segment tests.

    A sample is visible when the segment from x never enters the exterior:
    it must not cross an edge transversally, must not pass through a vertex
    into an exterior quadrant, and must not leave x outward.  All arithmetic
    is on scaled integers.
    """
    pitch = Fraction(pitch)
    if pitch <= 0:
        raise ValueError("pitch must be positive")
    x0, y0, x1, y1 = P.bbox
    nx = int(math.ceil((x1 - x0) / pitch))
    ny = int(math.ceil((y1 - y0) / pitch))
    half = pitch / 2
    S = 1
    for v in list(P.vertices) + [x, (half, x0), (y0, half)]:
        S = lcm(S, v[0].denominator, v[1].denominator)
    big = max(abs(c) for v in P.vertices for c in v) * S + pitch * S * 2
    if big >= 2**30:
        raise OracleLimitError("coordinates too large for exact integer sampling")
    ii, jj = np.meshgrid(np.arange(nx, dtype=np.int64), np.arange(ny, dtype=np.int64), indexing="xy")
    qx = int(x0 * S) + (2 * ii.ravel() + 1) * int(half * S)
    qy = int(y0 * S) + (2 * jj.ravel() + 1) * int(half * S)
    V = [(int(v[0] * S), int(v[1] * S)) for v in P.vertices]
    E = [(V[i], V[(i + 1) % len(V)]) for i in range(len(V))]

    inside = np.zeros(qx.shape, dtype=bool)
    onb = np.zeros(qx.shape, dtype=bool)
    for (ax, ay), (bx, by) in E:
        if ax == bx:
            lo, hi = min(ay, by), max(ay, by)
            inside ^= (ax > qx) & (lo <= qy) & (qy < hi)
            onb |= (qx == ax) & (lo <= qy) & (qy <= hi)
        else:
            lo, hi = min(ax, bx), max(ax, bx)
            onb |= (qy == ay) & (lo <= qx) & (qx <= hi)
    keep = inside & ~onb
    qx, qy = qx[keep], qy[keep]

    X, Y = int(x[0] * S), int(x[1] * S)
    dx, dy = qx - X, qy - Y
    sx, sy = np.sign(dx), np.sign(dy)
    vis = np.ones(qx.shape, dtype=bool)

    for (ax, ay), (bx, by) in E:
        if ax == bx:
            lo, hi = min(ay, by), max(ay, by)
            strad = (X - ax) * (qx - ax) < 0
            n1 = (Y - lo) * dx + (ax - X) * dy
            n2 = (hi - Y) * dx - (ax - X) * dy
            vis &= ~(strad & (np.sign(n1) == sx) & (np.sign(n2) == sx) & (n1 != 0) & (n2 != 0))
        else:
            lo, hi = min(ax, bx), max(ax, bx)
            strad = (Y - ay) * (qy - ay) < 0
            n1 = (X - lo) * dy + (ay - Y) * dx
            n2 = (hi - X) * dy - (ay - Y) * dx
            vis &= ~(strad & (np.sign(n1) == sy) & (np.sign(n2) == sy) & (n1 != 0) & (n2 != 0))

    table = _quadrant_table(P)
    for v, (vx, vy) in zip(P.vertices, V):
        wx, wy = vx - X, vy - Y
        if wx == 0 and wy == 0:
            continue
        col = dx * wy - dy * wx == 0
        dot = dx * wx + dy * wy
        through = col & (dot > 0) & (dot < dx * dx + dy * dy)
        if not through.any():
            continue
        ok = _closure_dir(table[v], sx, sy) & _closure_dir(table[v], -sx, -sy)
        vis &= ~(through & ~ok)

    if x in table:
        vis &= _closure_dir(table[x], sx, sy)
    else:
        for i, (u, w) in enumerate(P.edges):
            if P.on_boundary(x) and i in P.edges_at(x):
                n = P.inward_normal(i)
                vis &= dx * n[0] + dy * n[1] >= 0
    pts = np.column_stack([qx / S, qy / S]).astype(float)
    exact = [(Fraction(int(a), S), Fraction(int(b), S)) for a, b in zip(qx, qy)]
    return SampledVisibility(pts, exact, vis)


# ---------------------------------------------------------------- exploration optimum


@dataclass(frozen=True)
class OptBracket:
    lower: Fraction
    upper: Fraction
    notes: str = ""
    sampled: Fraction | None = None  # best tour using only the k uniform samples

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def _segment_samples(seg, k: int) -> list[Point]:
    (a, b) = seg
    if k < 2:
        return [a, b]
    return [(a[0] + (b[0] - a[0]) * i / (k - 1), a[1] + (b[1] - a[1]) * i / (k - 1)) for i in range(k)]


def _segment_grid_points(seg, xs, ys) -> list[Point]:
    (a, b) = seg
    if a[1] == b[1]:
        lo, hi = sorted((a[0], b[0]))
        return [(v, a[1]) for v in sorted(set(xs)) if lo <= v <= hi]
    lo, hi = sorted((a[1], b[1]))
    return [(a[0], v) for v in sorted(set(ys)) if lo <= v <= hi]


def _best_tours(grid: GeodesicGrid, s: Point, cands: list[list[Point]]) -> dict[int, Fraction]:
    """Cheapest round trip from s touching every extension in each subset (Held-Karp)."""
    m = len(cands)
    ds = grid.distances_from(s)
    dd = {}
    for group in cands:
        for c in group:
            if c not in dd:
                dd[c] = grid.distances_from(c)
    INF = None
    # dp[(mask, j, ci)] = cheapest path from s touching mask, ending at candidate ci of extension j
    dp: dict[tuple[int, int, int], Fraction] = {}
    for j in range(m):
        for ci, c in enumerate(cands[j]):
            dp[(1 << j, j, ci)] = ds[c]
    for mask in range(1, 1 << m):
        for j in range(m):
            if not mask >> j & 1:
                continue
            for ci, c in enumerate(cands[j]):
                cur = dp.get((mask, j, ci), INF)
                if cur is None:
                    continue
                for k in range(m):
                    if mask >> k & 1:
                        continue
                    nm = mask | 1 << k
                    row = dd[c]
                    for ck, c2 in enumerate(cands[k]):
                        v = cur + row[c2]
                        key = (nm, k, ck)
                        old = dp.get(key)
                        if old is None or v < old:
                            dp[key] = v
    best = {0: Fraction(0)}
    for (mask, j, ci), v in dp.items():
        total = v + ds[cands[j][ci]]
        if mask not in best or total < best[mask]:
            best[mask] = total
    return best


def _makespan(best: dict[int, Fraction], m: int, p: int) -> Fraction:
    full = (1 << m) - 1
    if p == 1 or m == 0:
        return best[full]
    out = best[full]
    for mask in range(full + 1):
        out = min(out, max(best[mask], best[full ^ mask]))
    return out


def optimal_exploration_cost(P: OrthoPolygon, p: int, k: int = 5, start: Point | None = None, max_extensions: int = 8) -> OptBracket:
    """Bracket on the optimal offline makespan of p robots from ``start``.

    Every robot makes a round trip; together the trips must touch every
    essential extension.  ``lower`` searches crossing points on the grid of
    vertex and start coordinates, where some optimal tour always touches:
    the tour cost is piecewise linear in each touch position with breaks only
    at those coordinates.  ``sampled`` restricts touches to k evenly spaced
    samples per extension.  Both searches only use real crossing points, so
    each is achievable and ``upper`` is the better of the two.
    """
    if p < 1 or p > 2:
        raise OracleLimitError("the exploration oracle handles p in {1, 2}")
    if start is None:
        raise ValueError("start is required")
    ext = essential_extensions(P, start)
    if len(ext) > max_extensions:
        raise OracleLimitError(f"{len(ext)} essential extensions exceed the limit of {max_extensions}")
    if not ext:
        return OptBracket(Fraction(0), Fraction(0), "start sees everything", Fraction(0))
    xs = list(P.xs) + [start[0]]
    ys = list(P.ys) + [start[1]]
    low_c = [_segment_grid_points(e.segment, xs, ys) for e in ext]
    up_c = [_segment_samples(e.segment, k) for e in ext]
    extra = {start} | {c for g in low_c + up_c for c in g}
    grid = GeodesicGrid(P, sorted(extra))
    m = len(ext)
    lower = _makespan(_best_tours(grid, start, low_c), m, p)
    sampled = _makespan(_best_tours(grid, start, up_c), m, p)
    return OptBracket(lower, min(sampled, lower), f"{m} extensions, k={k}", sampled)


# ---------------------------------------------------------------- orienteering


def brute_force_orienteering(G: CorridorGraph, reward, s: int, t: int, B, max_vertices: int = 12) -> BudgetedPath:
    """Exact best walk from s to t of cost at most B.

    Searches states (vertex, visited set) by cost, so revisits are allowed
    without any cap and every visited set is reached at its cheapest cost.
    """
    if G.n > max_vertices:
        raise OracleLimitError(f"graph has {G.n} vertices; the limit is {max_vertices}")
    f = reward if isinstance(reward, SetReward) else SetReward(reward, G.cells)
    B = Fraction(B)
    start = (s, 1 << s)
    dist = {start: Fraction(0)}
    prev = {}
    tie = itertools.count()
    heap = [(Fraction(0), next(tie), start)]
    while heap:
        d, _, st = heapq.heappop(heap)
        if d > dist[st]:
            continue
        v, mask = st
        for u, w in G.edges[v].items():
            nd = d + w
            if nd > B:
                continue
            ns = (u, mask | 1 << u)
            if ns not in dist or nd < dist[ns]:
                dist[ns] = nd
                prev[ns] = st
                heapq.heappush(heap, (nd, next(tie), ns))
    best = None
    for (v, mask), d in dist.items():
        if v != t:
            continue
        walk = _walk(prev, (v, mask))
        key = (-round(f(mask), 12), d, len(walk))
        if best is None or key < best[0]:
            best = (key, walk, d, f(mask))
    if best is None:
        raise ValueError(f"budget {B} is below the shortest distance")
    _, walk, d, r = best
    return BudgetedPath(walk, d, r, [G.cells[v] for v in walk])


def _walk(prev, st):
    out = [st[0]]
    while st in prev:
        st = prev[st]
        out.append(st[0])
    return out[::-1]


# ---------------------------------------------------------------- exact mutual information


def exact_mi_small(prob: np.ndarray, poses, spec: SensorSpec, resolution: float = 1.0, l_max: float = 5.0, max_cells: int = 12) -> float:
    """Exact mutual information between the map and noise-free first-hit scans.

    With a perfect sensor the scan outcome is a function of the map, so the
    mutual information equals the entropy of the joint first-hit outcome.
    Every occupancy assignment of the uncertain cells the beams can touch is
    enumerated.
    """
    model = RewardModel(prob, spec, resolution, l_max)
    p = model.p
    h, w = p.shape
    t = ray_table(beam_angles(spec), round(spec.max_range / resolution, 9))
    beams = []
    for r0, c0 in poses:
        for i in range(len(t.length)):
            cells = []
            for j in range(1, t.length[i]):
                r, c = r0 + t.dr[i, j], c0 + t.dc[i, j]
                cells.append((int(r), int(c)) if 0 <= r < h and 0 <= c < w else None)
            beams.append(cells)
    unknown = sorted({c for b in beams for c in b if c is not None and 0 < p[c] < 1})
    if len(unknown) > max_cells:
        raise OracleLimitError(f"{len(unknown)} uncertain cells exceed the limit of {max_cells}")
    dist: dict[tuple, float] = {}
    for bits in itertools.product((0, 1), repeat=len(unknown)):
        occ = dict(zip(unknown, bits))
        pr = 1.0
        for c, b in occ.items():
            pr *= p[c] if b else 1 - p[c]
        if pr == 0:
            continue
        outcome = []
        for cells in beams:
            hit = len(cells)
            for j, c in enumerate(cells):
                if c is None or occ.get(c, p[c] >= 0.5):
                    hit = j
                    break
            outcome.append(hit)
        key = tuple(outcome)
        dist[key] = dist.get(key, 0.0) + pr
    probs = np.array(list(dist.values()))
    probs = probs[probs > 0]
    return float(-(probs * np.log2(probs)).sum())
