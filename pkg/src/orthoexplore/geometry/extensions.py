"""Blocking vertices, extensions, foreign polygons and domination.

Foreign polygons are represented by the cells of the polygon's own
vertex-coordinate grid that they cover.  Every extension runs along one of
those grid lines, so each cell falls wholly on one side and containment,
intersection and area become exact set operations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .polygon import OrthoPolygon, Point, PolygonError, l1, polygon_from_grid_cells
from .visibility import first_hit, sees

Cell = tuple[int, int]


class DegenerateExtensionError(PolygonError):
    pass


@dataclass(frozen=True)
class BlockingVertex:
    vertex_index: int
    b: Point
    visible_side: tuple[Point, Point]
    hidden_side: tuple[Point, Point]
    hidden_edge: int
    extension: tuple[Point, Point]
    extension_goal: Point

    @property
    def key(self) -> tuple[int, int]:
        return (self.vertex_index, self.hidden_edge)

    @property
    def hidden_midpoint(self) -> Point:
        (a, b) = self.hidden_side
        return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)

    @property
    def extension_length(self) -> Fraction:
        return l1(*self.extension)


@dataclass(frozen=True)
class SubPolygonSplit:
    home: OrthoPolygon
    foreign: OrthoPolygon
    foreign_cells: frozenset


def _extension_from(P: OrthoPolygon, vi: int, ei: int) -> tuple[Point, Point]:
    """Segment continuing edge ``ei`` past its endpoint ``vi`` to the boundary."""
    u, v = P.edges[ei]
    b = P.vertices[vi]
    a = u if v == b else v
    d = (_sgn(b[0] - a[0]), _sgn(b[1] - a[1]))
    hit = first_hit(P, b, d)
    if hit is None:
        raise DegenerateExtensionError(f"extension from ({b[0]},{b[1]}) never meets the boundary")
    t = hit[0]
    e = (b[0] + t * d[0], b[1] + t * d[1])
    if e == b:
        raise DegenerateExtensionError(f"zero-length extension at ({b[0]},{b[1]})")
    return b, e


def _sgn(v) -> int:
    return (v > 0) - (v < 0)


def _incident_edges(P: OrthoPolygon, vi: int) -> tuple[int, int]:
    n = len(P.vertices)
    return ((vi - 1) % n, vi)


def _hidden_edge(P: OrthoPolygon, vi: int, x: Point) -> int | None:
    """Index of the incident edge whose interior side faces away from x, if exactly one."""
    b = P.vertices[vi]
    hidden = []
    for ei in _incident_edges(P, vi):
        n = P.inward_normal(ei)
        if (x[0] - b[0]) * n[0] + (x[1] - b[1]) * n[1] < 0:
            hidden.append(ei)
    return hidden[0] if len(hidden) == 1 else None


def extension_goal(extension: tuple[Point, Point], x: Point) -> Point:
    """Foot of the perpendicular from x onto the extension, clamped to the segment."""
    b, e = extension
    length = l1(b, e)
    u = ((e[0] - b[0]) / length, (e[1] - b[1]) / length)
    tau = (x[0] - b[0]) * u[0] + (x[1] - b[1]) * u[1]
    tau = min(max(tau, Fraction(0)), length)
    return (b[0] + tau * u[0], b[1] + tau * u[1])


def blocking_vertices(P: OrthoPolygon, x: Point) -> list[BlockingVertex]:
    out = []
    for vi in P.reflex_indices:
        ei = _hidden_edge(P, vi, x)
        if ei is None:
            continue
        b = P.vertices[vi]
        if not sees(P, x, b):
            continue
        e_prev, e_next = _incident_edges(P, vi)
        vis = e_next if ei == e_prev else e_prev
        ext = _extension_from(P, vi, ei)
        out.append(BlockingVertex(vi, b, P.edges[vis], P.edges[ei], ei, ext, extension_goal(ext, x)))
    return out


class CellGrid:
    """Interior cells of P's vertex-coordinate grid with exact adjacency."""

    def __init__(self, P: OrthoPolygon):
        self.P = P
        self.xs, self.ys = P.xs, P.ys
        self.cells = frozenset(P.interior_cells)
        self._xi = {v: i for i, v in enumerate(self.xs)}
        self._yi = {v: i for i, v in enumerate(self.ys)}

    def area(self, cells) -> Fraction:
        return sum((self.P.cell_area(c) for c in cells), Fraction(0))

    def split(self, chord: tuple[Point, Point]) -> tuple[frozenset, frozenset]:
        """The two components of P's cells after cutting along an axis-parallel chord."""
        (b, e) = chord
        cut = set()
        if b[1] == e[1]:
            j = self._yi[b[1]]
            lo, hi = sorted((b[0], e[0]))
            for i in range(len(self.xs) - 1):
                if lo <= self.xs[i] and self.xs[i + 1] <= hi:
                    cut.add(frozenset({(i, j - 1), (i, j)}))
        else:
            i = self._xi[b[0]]
            lo, hi = sorted((b[1], e[1]))
            for j in range(len(self.ys) - 1):
                if lo <= self.ys[j] and self.ys[j + 1] <= hi:
                    cut.add(frozenset({(i - 1, j), (i, j)}))
        remaining = set(self.cells)
        comps = []
        while remaining:
            seed = min(remaining)
            comp = {seed}
            queue = deque([seed])
            remaining.discard(seed)
            while queue:
                c = queue.popleft()
                for nb in ((c[0] + 1, c[1]), (c[0] - 1, c[1]), (c[0], c[1] + 1), (c[0], c[1] - 1)):
                    if nb in remaining and frozenset({c, nb}) not in cut:
                        remaining.discard(nb)
                        comp.add(nb)
                        queue.append(nb)
            comps.append(frozenset(comp))
        if len(comps) != 2:
            raise DegenerateExtensionError(f"chord does not split the polygon in two ({len(comps)} parts)")
        return comps[0], comps[1]

    def covers(self, cells, q: Point) -> bool:
        """Closed containment of q in the union of ``cells``."""
        for i, j in cells:
            if self.xs[i] <= q[0] <= self.xs[i + 1] and self.ys[j] <= q[1] <= self.ys[j + 1]:
                return True
        return False

    def polygon(self, cells) -> OrthoPolygon:
        return polygon_from_grid_cells(cells, self.xs, self.ys)


_GRIDS: dict[OrthoPolygon, CellGrid] = {}


def cell_grid(P: OrthoPolygon) -> CellGrid:
    g = _GRIDS.get(P)
    if g is None:
        if len(_GRIDS) > 256:
            _GRIDS.clear()
        g = _GRIDS[P] = CellGrid(P)
    return g


def foreign_cells(P: OrthoPolygon, bv: BlockingVertex, x: Point) -> frozenset:
    grid = cell_grid(P)
    if bv.extension_length == 0:
        raise DegenerateExtensionError(f"zero-length extension at ({bv.b[0]},{bv.b[1]})")
    c1, c2 = grid.split(bv.extension)
    in1, in2 = grid.covers(c1, x), grid.covers(c2, x)
    if in1 == in2:
        raise DegenerateExtensionError("viewpoint lies on the extension")
    foreign = c2 if in1 else c1
    if not grid.covers(foreign, bv.hidden_midpoint):
        raise DegenerateExtensionError("hidden side is not in the foreign polygon")
    return foreign


def foreign_polygon(P: OrthoPolygon, bv: BlockingVertex, x: Point) -> SubPolygonSplit:
    grid = cell_grid(P)
    fc = foreign_cells(P, bv, x)
    return SubPolygonSplit(grid.polygon(grid.cells - fc), grid.polygon(fc), fc)


def dominates(P: OrthoPolygon, a: BlockingVertex, b: BlockingVertex, x: Point) -> bool:
    """True when FP(b) is contained in FP(a)."""
    return foreign_cells(P, b, x) <= foreign_cells(P, a, x)


def boundary_chain(P: OrthoPolygon, bv: BlockingVertex) -> tuple[Fraction, Fraction]:
    """Counterclockwise parameter interval (start, length) of P's boundary inside FP(bv).

    The chain runs between the two extension endpoints on the side holding
    the hidden edge.
    """
    b, e = bv.extension
    pb, pe = P.boundary_param(b), P.boundary_param(e)
    per = P.perimeter
    ph = P.boundary_param(bv.hidden_midpoint)
    # ccw arc from e to b or from b to e, whichever passes the hidden midpoint
    if (ph - pe) % per < (pb - pe) % per:
        return pe, (pb - pe) % per
    return pb, (pe - pb) % per


class ClockwiseKey:
    """Clockwise boundary position measured from a fixed origin point."""

    def __init__(self, P: OrthoPolygon, origin_param: Fraction):
        self.P = P
        self.origin = origin_param % P.perimeter

    def __call__(self, bv: BlockingVertex) -> Fraction:
        return self.of_point(bv.hidden_midpoint)

    def of_point(self, q: Point) -> Fraction:
        return (self.origin - self.P.boundary_param(q)) % self.P.perimeter


def boundary_below(P: OrthoPolygon, x: Point) -> Point:
    """First boundary point straight below x (x itself if it is on a horizontal edge)."""
    for ei in P.edges_at(x):
        u, v = P.edges[ei]
        if u[1] == v[1]:
            return x
    hit = first_hit(P, x, (Fraction(0), Fraction(-1)))
    if hit is None:
        return x
    return (x[0], x[1] - hit[0])


def clockwise_origin(P: OrthoPolygon, root: Point, chains=()) -> Fraction:
    """Origin for the clockwise order: the point below the root, pushed clockwise
    past any of the given foreign boundary chains it falls inside."""
    per = P.perimeter
    q = boundary_below(P, root)
    origin = P.boundary_param(q) if P.on_boundary(q) else Fraction(0)
    chains = list(chains)
    for _ in range(len(chains) + 1):
        moved = False
        for start, length in chains:
            off = (origin - start) % per
            if 0 < off < length:
                # inside the chain; its clockwise end is its ccw start
                origin = start
                moved = True
        if not moved:
            break
    return origin


def minimal_foreign(P: OrthoPolygon, bvs, x: Point) -> list[BlockingVertex]:
    """Members whose foreign polygon strictly contains no other member's."""
    fcs = [foreign_cells(P, bv, x) for bv in bvs]
    keep = []
    for i, bv in enumerate(bvs):
        if not any(fcs[j] < fcs[i] for j in range(len(bvs)) if j != i):
            keep.append(bv)
    return keep


def critical_extensions(P: OrthoPolygon, x: Point, key=None) -> list[BlockingVertex]:
    """Blocking vertices at x whose foreign polygon contains no other one's.

    Crossing the innermost extension of a nested family necessarily crosses
    the ones enclosing it, so these are the extensions a tour must reach.
    """
    bvs = blocking_vertices(P, x)
    if key is None:
        key = ClockwiseKey(P, clockwise_origin(P, x, [boundary_chain(P, bv) for bv in bvs]))
    return sorted(minimal_foreign(P, bvs, x), key=key)


@dataclass(frozen=True)
class Extension:
    """A reflex vertex paired with one incident edge, independent of any viewpoint."""

    vertex_index: int
    edge_index: int
    segment: tuple[Point, Point]
    cells: frozenset
    hidden: tuple[Point, Point]

    @property
    def hidden_midpoint(self) -> Point:
        (a, b) = self.hidden
        return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)


def essential_extensions(P: OrthoPolygon, s: Point) -> list[Extension]:
    """Extensions that any tour from s must cross, reduced to the innermost ones.

    An extension is necessary when s lies strictly on the outer side of its
    edge and the edge lies beyond the extension; among nested necessary
    extensions only the innermost are kept.
    """
    grid = cell_grid(P)
    found = []
    for vi in P.reflex_indices:
        b = P.vertices[vi]
        for ei in _incident_edges(P, vi):
            n = P.inward_normal(ei)
            if (s[0] - b[0]) * n[0] + (s[1] - b[1]) * n[1] >= 0:
                continue
            seg = _extension_from(P, vi, ei)
            c1, c2 = grid.split(seg)
            in1, in2 = grid.covers(c1, s), grid.covers(c2, s)
            if in1 == in2:
                continue
            far = c2 if in1 else c1
            u, v = P.edges[ei]
            mid = ((u[0] + v[0]) / 2, (u[1] + v[1]) / 2)
            if not grid.covers(far, mid):
                continue
            found.append(Extension(vi, ei, seg, far, P.edges[ei]))
    keep = [e for e in found if not any(o.cells < e.cells for o in found if o is not e)]
    # equal regions from the same cut count once
    uniq: dict[frozenset, Extension] = {}
    for e in keep:
        uniq.setdefault(e.cells, e)
    return list(uniq.values())
