"""Named worlds and random instance generators used by tests, demos and the CLI."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from .geometry.extensions import essential_extensions
from .geometry.polygon import OrthoPolygon, Point, point, polygon_from_cells, validate_polygon
from .occupancy import OccupancyGrid, rasterize_polygon

HALF = Fraction(1, 2)


def unit_square() -> OrthoPolygon:
    return validate_polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def l6() -> OrthoPolygon:
    """L-shaped hexagon with its reflex corner at (2,2)."""
    return validate_polygon([(0, 0), (4, 0), (4, 2), (2, 2), (2, 4), (0, 4)])


def nested_staircase() -> tuple[OrthoPolygon, Point]:
    """Two reflex corners whose foreign regions nest when seen from the top-left."""
    P = validate_polygon([(0, 0), (6, 0), (6, 2), (4, 2), (4, 4), (2, 4), (2, 6), (0, 6)])
    return P, point(1, 5)


def two_room() -> tuple[OrthoPolygon, Point]:
    """A hall with two rooms rising from it; both are hidden from the hall centre."""
    P = validate_polygon([(0, 0), (8, 0), (8, 7), (6, 7), (6, 4), (2, 4), (2, 7), (0, 7)])
    return P, point(4, 2)


def _rot(cell, k):
    x, y = cell
    for _ in range(k):
        x, y = 5 - y, x
    return x, y


PINWHEEL_HUB = [(2, 2), (3, 2), (2, 3), (3, 3)]
PINWHEEL_ARM = [(4, 2), (5, 2), (5, 1), (5, 0)]


def pinwheel_cells() -> set[tuple[int, int]]:
    """Unit cells of a 2x2 hub with four bent arms."""
    cells = set(PINWHEEL_HUB)
    for k in range(4):
        cells |= {_rot(c, k) for c in PINWHEEL_ARM}
    return cells


def pinwheel(scale=1) -> tuple[OrthoPolygon, Point]:
    """Four-branch cross whose arms bend out of sight of the hub centre."""
    P = polygon_from_cells(pinwheel_cells(), scale)
    return P, point(3 * Fraction(scale), 3 * Fraction(scale))


def skyline(widths, heights) -> OrthoPolygon:
    """x-monotone polygon: flat floor, column j spans widths[j] with top at heights[j]."""
    x = 0
    top = []
    for w, h in zip(widths, heights):
        top.append((x, h))
        x += w
        top.append((x, h))
    verts = [(0, 0), (x, 0)] + top[::-1]
    return validate_polygon(verts)


def random_staircase(rng: random.Random, max_vertices: int = 12, max_critical: int = 4, max_coord: int = 6):
    """Random skyline polygon with a start at a cell centre.

    Columns are 1-3 wide and 1-``max_coord`` tall with neighbouring heights
    distinct, so every column boundary is a step.  Draws repeat until the
    polygon has at most ``max_critical`` essential extensions from the start.
    """
    max_cols = (max_vertices - 2) // 2
    while True:
        n = rng.randint(2, max_cols)
        widths = [rng.randint(1, 3) for _ in range(n)]
        heights = [rng.randint(1, max_coord)]
        while len(heights) < n:
            h = rng.randint(1, max_coord)
            if h != heights[-1]:
                heights.append(h)
        P = skyline(widths, heights)
        j = rng.randrange(n)
        cx = sum(widths[:j]) + rng.randrange(widths[j])
        cy = rng.randrange(heights[j])
        start = (Fraction(cx) + HALF, Fraction(cy) + HALF)
        if len(P) <= max_vertices and len(essential_extensions(P, start)) <= max_critical:
            return P, start


def staircase_suite(n: int, seed: int = 0, **kw) -> list[tuple[OrthoPolygon, Point]]:
    rng = random.Random(seed)
    return [random_staircase(rng, **kw) for _ in range(n)]


# grid fixtures


def corridor_world(resolution: float = 0.25, scale: int = 4):
    """Rasterized pinwheel: a hub with four bent corridors (truth grid, start cell)."""
    P, s = pinwheel(scale)
    truth, origin = rasterize_polygon(P, resolution)
    return truth, _cell_of(s, origin, resolution), origin


def l6_world(resolution: float = 0.25, start=(1, 3)):
    truth, origin = rasterize_polygon(l6(), resolution)
    return truth, _cell_of(point(*start), origin, resolution), origin


def _cell_of(q, origin, resolution) -> tuple[int, int]:
    c = int((float(q[0]) - origin[0]) / resolution)
    r = int((float(q[1]) - origin[1]) / resolution)
    return r, c


PILLARS = [(6, 15), (7, 15), (16, 17), (16, 18), (11, 6), (12, 6)]  # on a 24-cell room


def half_known_room(size: int = 40, known_cols: int | None = None):
    """Walled room with a few pillars; the left part of the belief is already mapped.

    Returns (truth, belief, start cell).  The belief is exact (saturated) on
    the known columns and unknown elsewhere.
    """
    known_cols = size // 2 if known_cols is None else known_cols
    truth = np.zeros((size, size), dtype=bool)
    truth[0, :] = truth[-1, :] = truth[:, 0] = truth[:, -1] = True
    k = size / 24
    for r, c in PILLARS:
        truth[int(r * k) : int((r + 1) * k), int(c * k) : int((c + 1) * k)] = True
    belief = OccupancyGrid.like(truth, 0.25)
    belief.logodds[:, :known_cols] = np.where(truth[:, :known_cols], belief.l_max, -belief.l_max)
    return truth, belief, (size // 2, 2)


def pocket_corridor(seed: int, height: int = 9, width: int = 13, unknown_rate: float = 0.35):
    """Known walled strip with random unknown pockets and a clear middle row.

    Returns (belief, s, t) with s and t at the ends of the middle row.  Used
    for small planner fixtures the brute-force oracle can handle.
    """
    rng = np.random.default_rng(seed)
    L = np.full((height, width), -5.0)
    L[0, :] = L[-1, :] = L[:, 0] = L[:, -1] = 5.0
    L[1:-1, 1:-1][rng.random((height - 2, width - 2)) < unknown_rate] = 0.0
    mid = height // 2
    L[mid, 1:-1] = -5.0
    g = OccupancyGrid(width, height, 0.25, (0.0, 0.0), 5.0, L)
    return g, (mid, 1), (mid, width - 2)
