"""Exact visibility inside an orthogonal polygon.

Visibility is closed: a segment that grazes a reflex vertex or runs along
an edge still counts as unobstructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

import numpy as np

from .polygon import OrthoPolygon, Point, PolygonError, cross, on_segment


class OutsidePolygonError(PolygonError):
    pass


def _segment_params(P: OrthoPolygon, a: Point, q: Point) -> list[Fraction]:
    """Parameters t in [0, 1] where segment a + t(q - a) meets an edge or vertex."""
    dx, dy = q[0] - a[0], q[1] - a[1]
    ts = {Fraction(0), Fraction(1)}
    for u, v in P.edges:
        if u[0] == v[0]:
            if dx == 0:
                if a[0] == u[0]:
                    # collinear overlap: the edge endpoints bound the pieces
                    for w in (u, v):
                        if dy != 0:
                            ts.add((w[1] - a[1]) / dy)
                continue
            t = (u[0] - a[0]) / dx
            y = a[1] + t * dy
            if min(u[1], v[1]) <= y <= max(u[1], v[1]):
                ts.add(t)
        else:
            if dy == 0:
                if a[1] == u[1]:
                    for w in (u, v):
                        if dx != 0:
                            ts.add((w[0] - a[0]) / dx)
                continue
            t = (u[1] - a[1]) / dy
            x = a[0] + t * dx
            if min(u[0], v[0]) <= x <= max(u[0], v[0]):
                ts.add(t)
    return sorted(t for t in ts if 0 <= t <= 1)


def sees(P: OrthoPolygon, a: Point, q: Point) -> bool:
    """True when the closed segment aq lies in the closure of P."""
    if not P.contains(a) or not P.contains(q):
        return False
    if a == q:
        return True
    ts = _segment_params(P, a, q)
    dx, dy = q[0] - a[0], q[1] - a[1]
    for t0, t1 in zip(ts, ts[1:]):
        tm = (t0 + t1) / 2
        if not P.contains((a[0] + tm * dx, a[1] + tm * dy)):
            return False
    return True


def _half(d: Point) -> int:
    return 0 if d[1] > 0 or (d[1] == 0 and d[0] > 0) else 1


def _angle_cmp(d1: Point, d2: Point) -> int:
    h1, h2 = _half(d1), _half(d2)
    if h1 != h2:
        return h1 - h2
    c = d1[0] * d2[1] - d1[1] * d2[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


def _ray_line_hit(x: Point, d: Point, edge) -> Point:
    """Intersection of the ray x + t d with the supporting line of an axis edge."""
    u, v = edge
    if u[0] == v[0]:
        t = (u[0] - x[0]) / d[0]
    else:
        t = (u[1] - x[1]) / d[1]
    return (x[0] + t * d[0], x[1] + t * d[1])


def first_hit(P: OrthoPolygon, x: Point, d: Point) -> tuple[Fraction, int] | None:
    """Smallest t > 0 where ray x + t d meets an edge not parallel to d, with that edge."""
    best = None
    for i, (u, v) in enumerate(P.edges):
        if u[0] == v[0]:
            if d[0] == 0:
                continue
            t = (u[0] - x[0]) / d[0]
            if t <= 0:
                continue
            y = x[1] + t * d[1]
            if not min(u[1], v[1]) <= y <= max(u[1], v[1]):
                continue
        else:
            if d[1] == 0:
                continue
            t = (u[1] - x[1]) / d[1]
            if t <= 0:
                continue
            xx = x[0] + t * d[0]
            if not min(u[0], v[0]) <= xx <= max(u[0], v[0]):
                continue
        if best is None or t < best[0]:
            best = (t, i)
    return best


@dataclass(frozen=True)
class Piece:
    a: Point
    b: Point
    tag: str  # "boundary" or "window"


@dataclass
class VisibilityPolygon:
    """Star-shaped region seen from ``viewpoint``.

    Stored as a fan of triangles (viewpoint, A, B), one per angular wedge
    between consecutive polygon-vertex directions, plus the tagged outline.
    """

    viewpoint: Point
    triangles: list[tuple[Point, Point, Point]]
    triangle_edges: list[int]
    vertices: list[Point]
    pieces: list[Piece] = field(default_factory=list)

    @property
    def windows(self) -> list[Piece]:
        return [p for p in self.pieces if p.tag == "window"]

    @property
    def boundary_pieces(self) -> list[Piece]:
        return [p for p in self.pieces if p.tag == "boundary"]

    @property
    def area(self) -> Fraction:
        return sum((cross(*t) / 2 for t in self.triangles), Fraction(0))

    def contains(self, q: Point) -> bool:
        if q == self.viewpoint:
            return True
        return any(
            cross(t[0], t[1], q) >= 0 and cross(t[1], t[2], q) >= 0 and cross(t[2], t[0], q) >= 0
            for t in self.triangles
        )

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`contains` for an (n, 2) float array.

        Points whose float orientation tests are too close to zero are
        re-decided exactly, so the result matches :meth:`contains`.
        """
        pts = np.asarray(pts, dtype=float)
        inside = np.zeros(len(pts), dtype=bool)
        unsure = np.zeros(len(pts), dtype=bool)
        px, py = pts[:, 0], pts[:, 1]
        for tri in self.triangles:
            (ax, ay), (bx, by), (cx, cy) = ((float(p[0]), float(p[1])) for p in tri)
            scale = max(abs(ax), abs(ay), abs(bx), abs(by), abs(cx), abs(cy), 1.0)
            tol = 1e-9 * scale * scale
            c1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            c2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
            c3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
            inside |= (c1 > tol) & (c2 > tol) & (c3 > tol)
            unsure |= (c1 > -tol) & (c2 > -tol) & (c3 > -tol) & ~((c1 > tol) & (c2 > tol) & (c3 > tol))
        for i in np.flatnonzero(unsure & ~inside):
            inside[i] = self.contains((Fraction(pts[i, 0]), Fraction(pts[i, 1])))
        return inside


def visibility_polygon(P: OrthoPolygon, x: Point) -> VisibilityPolygon:
    if not P.contains(x):
        raise OutsidePolygonError(f"viewpoint ({x[0]},{x[1]}) lies outside the polygon")
    dirs = sorted({(v[0] - x[0], v[1] - x[1]) for v in P.vertices if v != x}, key=cmp_to_key(_angle_cmp))
    # collapse parallel directions to one representative
    uniq: list[Point] = []
    for d in dirs:
        if uniq and _angle_cmp(uniq[-1], d) == 0:
            continue
        uniq.append(d)
    m = len(uniq)
    triangles, tri_edges = [], []
    chain: list[Point] = []
    for i in range(m):
        d0, d1 = uniq[i], uniq[(i + 1) % m]
        c = d0[0] * d1[1] - d0[1] * d1[0]
        n0 = abs(d0[0]) + abs(d0[1])
        n1 = abs(d1[0]) + abs(d1[1])
        s = (d0[0] / n0 + d1[0] / n1, d0[1] / n0 + d1[1] / n1)
        if m == 1 or (c == 0 and s == (0, 0)):
            mid = (-d0[1], d0[0])
        elif c > 0:
            mid = s
        else:
            mid = (-s[0], -s[1])
        hit = first_hit(P, x, mid)
        inward = hit is not None and P.contains(
            (x[0] + hit[0] * mid[0] / 2, x[1] + hit[0] * mid[1] / 2), closed=False
        )
        if not inward:
            chain.append(x)
            continue
        edge = P.edges[hit[1]]
        A = _ray_line_hit(x, d0, edge)
        B = _ray_line_hit(x, d1, edge)
        triangles.append((x, A, B))
        tri_edges.append(hit[1])
        chain.extend((A, B))
    verts = _clean_loop(chain)
    pieces = []
    for k in range(len(verts)):
        a, b = verts[k], verts[(k + 1) % len(verts)]
        # split at polygon vertices so each piece is wholly boundary or wholly chord
        cuts = sorted(
            {a, b} | {v for v in P.vertices if on_segment(v, a, b)},
            key=lambda p: abs(p[0] - a[0]) + abs(p[1] - a[1]),
        )
        for u, w in zip(cuts, cuts[1:]):
            mid = ((u[0] + w[0]) / 2, (u[1] + w[1]) / 2)
            pieces.append(Piece(u, w, "boundary" if P.on_boundary(mid) else "window"))
    return VisibilityPolygon(x, triangles, tri_edges, verts, pieces)


def _clean_loop(pts: list[Point]) -> list[Point]:
    out: list[Point] = []
    for p in pts:
        if not out or out[-1] != p:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) > 3:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
            if cross(a, b, c) == 0 and (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) >= 0:
                del out[i]
                changed = True
                break
    return out


def seen_boundary_intervals(P: OrthoPolygon, vp: VisibilityPolygon) -> list[tuple[int, Fraction, Fraction]]:
    """Boundary pieces of ``vp`` as (edge index, start offset, end offset) along that edge."""
    out = []
    for piece in vp.boundary_pieces:
        for i, (u, v) in enumerate(P.edges):
            if on_segment(piece.a, u, v) and on_segment(piece.b, u, v):
                s0 = abs(piece.a[0] - u[0]) + abs(piece.a[1] - u[1])
                s1 = abs(piece.b[0] - u[0]) + abs(piece.b[1] - u[1])
                out.append((i, min(s0, s1), max(s0, s1)))
                break
    return out
