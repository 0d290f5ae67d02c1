"""Shortest rectilinear paths inside an orthogonal polygon.

An L1-shortest path between two points of an orthogonal polygon can always
be drawn on the grid spanned by the vertex coordinates and the endpoint
coordinates, so Dijkstra on that grid is exact.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from itertools import count
from typing import Iterable, Sequence

from .polygon import OrthoPolygon, Point, l1
from .visibility import OutsidePolygonError

Path = list[Point]


class GeodesicGrid:
    def __init__(self, P: OrthoPolygon, extra: Iterable[Point] = ()):
        extra = list(extra)
        for q in extra:
            if not P.contains(q):
                raise OutsidePolygonError(f"point ({q[0]},{q[1]}) lies outside the polygon")
        self.P = P
        self.xs = sorted(set(P.xs) | {q[0] for q in extra})
        self.ys = sorted(set(P.ys) | {q[1] for q in extra})
        self._xi = {v: i for i, v in enumerate(self.xs)}
        self._yi = {v: i for i, v in enumerate(self.ys)}
        nx, ny = len(self.xs), len(self.ys)
        self.inside = [[P.contains((self.xs[i], self.ys[j])) for j in range(ny)] for i in range(nx)]
        self.adj: dict[tuple[int, int], list[tuple[tuple[int, int], Fraction]]] = {}
        for i in range(nx):
            for j in range(ny):
                if not self.inside[i][j]:
                    continue
                nbrs = self.adj.setdefault((i, j), [])
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    k, m = i + di, j + dj
                    if not (0 <= k < nx and 0 <= m < ny) or not self.inside[k][m]:
                        continue
                    mid = ((self.xs[i] + self.xs[k]) / 2, (self.ys[j] + self.ys[m]) / 2)
                    if P.contains(mid):
                        w = abs(self.xs[k] - self.xs[i]) + abs(self.ys[m] - self.ys[j])
                        nbrs.append(((k, m), w))
        self._cache: dict[tuple[int, int], tuple[dict, dict]] = {}

    def node(self, q: Point) -> tuple[int, int]:
        try:
            n = (self._xi[q[0]], self._yi[q[1]])
        except KeyError:
            raise KeyError(f"({q[0]},{q[1]}) is not a grid point; pass it as an extra point") from None
        if n not in self.adj:
            raise OutsidePolygonError(f"point ({q[0]},{q[1]}) lies outside the polygon")
        return n

    def point(self, n: tuple[int, int]) -> Point:
        return (self.xs[n[0]], self.ys[n[1]])

    def _run(self, src: tuple[int, int]):
        if src in self._cache:
            return self._cache[src]
        dist = {src: Fraction(0)}
        prev: dict = {}
        tie = count()
        heap = [(Fraction(0), next(tie), src)]
        while heap:
            d, _, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in self.adj[u]:
                nd = d + w
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, next(tie), v))
        self._cache[src] = (dist, prev)
        return dist, prev

    def distances_from(self, a: Point) -> dict[Point, Fraction]:
        dist, _ = self._run(self.node(a))
        return {self.point(n): d for n, d in dist.items()}

    def distance(self, a: Point, b: Point) -> Fraction:
        dist, _ = self._run(self.node(a))
        return dist[self.node(b)]

    def path(self, a: Point, b: Point) -> Path:
        src, dst = self.node(a), self.node(b)
        _, prev = self._run(src)
        nodes = [dst]
        while nodes[-1] != src:
            nodes.append(prev[nodes[-1]])
        nodes.reverse()
        return simplify_path([self.point(n) for n in nodes])


def simplify_path(pts: Sequence[Point]) -> Path:
    """Drop repeated and collinear interior points."""
    out: list[Point] = []
    for p in pts:
        if out and out[-1] == p:
            continue
        if len(out) >= 2:
            a, b = out[-2], out[-1]
            if (a[0] == b[0] == p[0]) or (a[1] == b[1] == p[1]):
                out[-1] = p
                continue
        out.append(p)
    return out


def path_length(path: Sequence[Point]) -> Fraction:
    return sum((l1(a, b) for a, b in zip(path, path[1:])), Fraction(0))


def rectilinear_goto(P: OrthoPolygon, a: Point, b: Point) -> Path:
    """Shortest axis-parallel path from a to b inside P."""
    return GeodesicGrid(P, (a, b)).path(a, b)


def geodesic_distance(P: OrthoPolygon, a: Point, b: Point) -> Fraction:
    return GeodesicGrid(P, (a, b)).distance(a, b)


def point_along(path: Sequence[Point], s: Fraction) -> Point:
    """Point at arclength s along a rectilinear path (clamped to its ends)."""
    if s <= 0:
        return path[0]
    for a, b in zip(path, path[1:]):
        seg = l1(a, b)
        if s <= seg:
            if seg == 0:
                return b
            t = s / seg
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        s -= seg
    return path[-1]


def truncate_path(path: Sequence[Point], s: Fraction) -> Path:
    """Prefix of the path of arclength s."""
    out = [path[0]]
    for a, b in zip(path, path[1:]):
        seg = l1(a, b)
        if s <= seg:
            out.append(point_along([a, b], s))
            return simplify_path(out)
        out.append(b)
        s -= seg
    return simplify_path(out)
