"""Exact orthogonal polygons.

Coordinates are :class:`fractions.Fraction` throughout so that every
geometric predicate (collinearity, containment, intersection) is exact.
Floats only appear when rendering.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Point = tuple[Fraction, Fraction]
Segment = tuple[Point, Point]


class PolygonError(ValueError):
    """Raised for input that is not a simple orthogonal polygon."""


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # repr keeps the shortest decimal that round-trips, e.g. 0.1 -> 1/10
        return Fraction(repr(value))
    return Fraction(value)


def point(x, y) -> Point:
    return (to_fraction(x), to_fraction(y))


def cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def l1(a: Point, b: Point) -> Fraction:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def on_segment(q: Point, a: Point, b: Point) -> bool:
    """Closed test for q on the axis-aligned segment ab."""
    if a[0] == b[0]:
        return q[0] == a[0] and min(a[1], b[1]) <= q[1] <= max(a[1], b[1])
    if a[1] == b[1]:
        return q[1] == a[1] and min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
    if cross(a, b, q) != 0:
        return False
    return min(a[0], b[0]) <= q[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= q[1] <= max(a[1], b[1])


def _axis_segments_touch(p: Segment, q: Segment) -> bool:
    (a, b), (c, d) = p, q
    ax0, ax1 = sorted((a[0], b[0]))
    ay0, ay1 = sorted((a[1], b[1]))
    cx0, cx1 = sorted((c[0], d[0]))
    cy0, cy1 = sorted((c[1], d[1]))
    return ax0 <= cx1 and cx0 <= ax1 and ay0 <= cy1 and cy0 <= ay1


@dataclass(frozen=True)
class OrthoPolygon:
    """Simple orthogonal polygon, counterclockwise, no redundant vertices.

    Build instances with :func:`validate_polygon`; the constructor trusts
    its input.
    """

    vertices: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def edges(self) -> tuple[Segment, ...]:
        v = self.vertices
        return tuple((v[i], v[(i + 1) % len(v)]) for i in range(len(v)))

    @cached_property
    def area(self) -> Fraction:
        v = self.vertices
        s = sum(v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1] for i in range(len(v)))
        return Fraction(s, 2)

    @cached_property
    def perimeter(self) -> Fraction:
        return sum((l1(a, b) for a, b in self.edges), Fraction(0))

    @cached_property
    def xs(self) -> tuple[Fraction, ...]:
        return tuple(sorted({p[0] for p in self.vertices}))

    @cached_property
    def ys(self) -> tuple[Fraction, ...]:
        return tuple(sorted({p[1] for p in self.vertices}))

    @property
    def bbox(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self.xs[0], self.ys[0], self.xs[-1], self.ys[-1]

    @cached_property
    def shortest_edge(self) -> Fraction:
        return min(l1(a, b) for a, b in self.edges)

    @cached_property
    def _edge_offsets(self) -> tuple[Fraction, ...]:
        out, acc = [], Fraction(0)
        for a, b in self.edges:
            out.append(acc)
            acc += l1(a, b)
        return tuple(out)

    def is_reflex(self, i: int) -> bool:
        v = self.vertices
        n = len(v)
        return cross(v[i - 1], v[i], v[(i + 1) % n]) < 0

    @cached_property
    def reflex_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.vertices)) if self.is_reflex(i))

    def inward_normal(self, edge_index: int) -> tuple[int, int]:
        """Unit normal of an edge pointing into the polygon (left of travel)."""
        a, b = self.edges[edge_index]
        dx = (b[0] > a[0]) - (b[0] < a[0])
        dy = (b[1] > a[1]) - (b[1] < a[1])
        return (-dy, dx)

    def edges_at(self, q: Point) -> list[int]:
        return [i for i, (a, b) in enumerate(self.edges) if on_segment(q, a, b)]

    def on_boundary(self, q: Point) -> bool:
        return any(on_segment(q, a, b) for a, b in self.edges)

    def contains(self, q: Point, closed: bool = True) -> bool:
        if self.on_boundary(q):
            return closed
        # crossing number against the rightward ray; only vertical edges can cross it
        inside = False
        qx, qy = q
        for a, b in self.edges:
            if a[0] != b[0] or a[0] <= qx:
                continue
            lo, hi = (a[1], b[1]) if a[1] < b[1] else (b[1], a[1])
            if lo <= qy < hi:
                inside = not inside
        return inside

    def boundary_param(self, q: Point) -> Fraction:
        """Counterclockwise arclength of boundary point q from vertex 0."""
        for i, (a, b) in enumerate(self.edges):
            if on_segment(q, a, b):
                return self._edge_offsets[i] + l1(a, q)
        raise PolygonError(f"point {q} is not on the boundary")

    def point_at_param(self, s: Fraction) -> Point:
        s = s % self.perimeter
        for i, (a, b) in enumerate(self.edges):
            length = l1(a, b)
            off = self._edge_offsets[i]
            if off <= s <= off + length:
                t = s - off
                return (a[0] + t * _sgn(b[0] - a[0]), a[1] + t * _sgn(b[1] - a[1]))
        raise AssertionError("unreachable")

    @cached_property
    def interior_cells(self) -> tuple[tuple[int, int], ...]:
        """Indices (ix, iy) of cells of the vertex-coordinate grid lying inside."""
        xs, ys = self.xs, self.ys
        out = []
        for iy in range(len(ys) - 1):
            cy = (ys[iy] + ys[iy + 1]) / 2
            for ix in range(len(xs) - 1):
                if self.contains(((xs[ix] + xs[ix + 1]) / 2, cy), closed=False):
                    out.append((ix, iy))
        return tuple(out)

    def cell_area(self, cell: tuple[int, int]) -> Fraction:
        ix, iy = cell
        return (self.xs[ix + 1] - self.xs[ix]) * (self.ys[iy + 1] - self.ys[iy])

    def scaled(self, factor) -> OrthoPolygon:
        f = to_fraction(factor)
        return OrthoPolygon(tuple((x * f, y * f) for x, y in self.vertices))

    def translated(self, dx, dy) -> OrthoPolygon:
        dx, dy = to_fraction(dx), to_fraction(dy)
        return OrthoPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))


def _sgn(v) -> int:
    return (v > 0) - (v < 0)


def validate_polygon(vertices: Iterable) -> OrthoPolygon:
    """Normalize a vertex sequence into a counterclockwise :class:`OrthoPolygon`.

    Clockwise input is reversed and collinear vertices are dropped; slanted
    edges, self-intersections and degenerate spikes raise :class:`PolygonError`.
    """
    pts = [point(*p) for p in vertices]
    if len(pts) < 4:
        raise PolygonError(f"need at least 4 vertices, got {len(pts)}")
    dedup: list[Point] = []
    for p in pts:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    while len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    n = len(dedup)
    for i in range(n):
        a, b = dedup[i], dedup[(i + 1) % n]
        if a[0] != b[0] and a[1] != b[1]:
            raise PolygonError(f"non-axis-aligned edge {_fmt(a)} -> {_fmt(b)}")

    changed = True
    while changed and len(dedup) >= 3:
        changed = False
        n = len(dedup)
        for i in range(n):
            a, b, c = dedup[i - 1], dedup[i], dedup[(i + 1) % n]
            if cross(a, b, c) == 0:
                if (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) < 0:
                    raise PolygonError(f"degenerate spike at {_fmt(b)} (self-intersection)")
                del dedup[i]
                changed = True
                break
    if len(dedup) < 4:
        raise PolygonError("polygon collapses to fewer than 4 vertices")

    poly = OrthoPolygon(tuple(dedup))
    if poly.area == 0:
        raise PolygonError("zero-area polygon")
    if poly.area < 0:
        dedup.reverse()
        poly = OrthoPolygon(tuple(dedup))

    edges = poly.edges
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _axis_segments_touch(edges[i], edges[j]):
                raise PolygonError(
                    f"self-intersection between edges {_fmt(edges[i][0])}-{_fmt(edges[i][1])} "
                    f"and {_fmt(edges[j][0])}-{_fmt(edges[j][1])}"
                )

    start = min(range(len(dedup)), key=lambda k: (dedup[k][1], dedup[k][0]))
    return OrthoPolygon(tuple(dedup[start:] + dedup[:start]))


def _fmt(p: Point) -> str:
    return f"({p[0]},{p[1]})"


def _outline(cells: set[tuple[int, int]]) -> list[tuple[int, int]]:
    if not cells:
        raise PolygonError("empty cell set")
    directed: dict[tuple[int, int], tuple[int, int]] = {}
    for i, j in cells:
        for a, b, nb in (
            ((i, j), (i + 1, j), (i, j - 1)),
            ((i + 1, j), (i + 1, j + 1), (i + 1, j)),
            ((i + 1, j + 1), (i, j + 1), (i, j + 1)),
            ((i, j + 1), (i, j), (i - 1, j)),
        ):
            if nb in cells:
                continue
            if a in directed:
                raise PolygonError("cells touch at a corner; outline is not simple")
            directed[a] = b
    start = min(directed, key=lambda p: (p[1], p[0]))
    loop = [start]
    cur = directed[start]
    while cur != start:
        loop.append(cur)
        cur = directed[cur]
    if len(loop) != len(directed):
        raise PolygonError("cell set has holes or several components")
    return loop


def polygon_from_cells(cells: Iterable[tuple[int, int]], scale=1) -> OrthoPolygon:
    """Trace the outline of a simply connected set of unit cells.

    Cells touching only at a corner, or sets with holes, are rejected.
    """
    f = to_fraction(scale)
    return validate_polygon([(x * f, y * f) for x, y in _outline(set(cells))])


def polygon_from_grid_cells(cells: Iterable[tuple[int, int]], xs: Sequence[Fraction], ys: Sequence[Fraction]) -> OrthoPolygon:
    """Outline of cells of a non-uniform grid whose lines sit at ``xs`` and ``ys``."""
    return validate_polygon([(xs[i], ys[j]) for i, j in _outline(set(cells))])


def parse_polygon_text(text: str, source: str = "<text>") -> tuple[OrthoPolygon, Point | None]:
    """Parse the plain-text polygon format.

    One ``x y`` pair per line (integers, decimals or ``p/q`` rationals);
    ``#`` starts a comment.  A comment of the form ``# start: x y`` names the
    robots' common start location.
    """
    verts = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("#")
        comment = comment.strip()
        if comment.lower().startswith("start:"):
            parts = comment[6:].split()
            if len(parts) != 2:
                raise PolygonError(f"{source}:{lineno}: malformed start directive")
            start = point(Fraction(parts[0]), Fraction(parts[1]))
        line = line.strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise PolygonError(f"{source}:{lineno}: expected 'x y', got {line!r}")
        try:
            verts.append((Fraction(parts[0]), Fraction(parts[1])))
        except (ValueError, ZeroDivisionError) as exc:
            raise PolygonError(f"{source}:{lineno}: bad coordinate ({exc})") from None
    poly = validate_polygon(verts)
    if start is not None and not poly.contains(start):
        raise PolygonError(f"{source}: start {_fmt(start)} lies outside the polygon")
    return poly, start


def load_polygon(path: str | os.PathLike) -> tuple[OrthoPolygon, Point | None]:
    with open(path, encoding="utf-8") as fh:
        return parse_polygon_text(fh.read(), source=str(path))


def format_polygon(poly: OrthoPolygon, start: Point | None = None, header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    if start is not None:
        lines.append(f"# start: {start[0]} {start[1]}")
    lines.extend(f"{x} {y}" for x, y in poly.vertices)
    return "\n".join(lines) + "\n"
