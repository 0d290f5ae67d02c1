"""Occupancy-grid mapping, frontiers and grid blocking vertices.

Grid arrays are indexed ``[row, col]`` with row 0 at the bottom, so a cell
``(r, c)`` has world centre ``origin + ((c + 0.5) * res, (r + 0.5) * res)``.
Log-odds 0 means never observed; negative is free, positive is occupied.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import ndimage

log = logging.getLogger(__name__)

Cell = tuple[int, int]
N4 = ((0, 1), (1, 0), (0, -1), (-1, 0))


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))


@dataclass(frozen=True)
class SensorSpec:
    max_range: float = 5.0
    fov: float = 360.0
    angular_resolution: float = 0.395
    p_hit: float = 0.7
    p_miss: float = 0.4
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not 0.5 < self.p_hit < 1:
            raise ValueError(f"p_hit must lie in (0.5, 1), got {self.p_hit}")
        if not 0 < self.p_miss < 0.5:
            raise ValueError(f"p_miss must lie in (0, 0.5), got {self.p_miss}")
        if self.angular_resolution <= 0:
            raise ValueError("angular_resolution must be positive")
        if self.max_range <= 0 or not 0 < self.fov <= 360:
            raise ValueError("max_range must be positive and fov in (0, 360]")

    @property
    def n_beams(self) -> int:
        return int(math.floor(self.fov / self.angular_resolution + 1e-9)) + 1

    @classmethod
    def preset_180(cls, **kw) -> SensorSpec:
        return cls(fov=180.0, **kw)


@dataclass
class OccupancyGrid:
    width: int
    height: int
    resolution: float = 0.05
    origin: tuple[float, float] = (0.0, 0.0)
    l_max: float = 5.0
    logodds: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.logodds is None:
            self.logodds = np.zeros((self.height, self.width))
        if self.logodds.shape != (self.height, self.width):
            raise ValueError("logodds shape does not match width/height")

    @classmethod
    def like(cls, truth: np.ndarray, resolution: float = 0.05, origin=(0.0, 0.0), l_max: float = 5.0):
        h, w = truth.shape
        return cls(w, h, resolution, tuple(origin), l_max)

    def copy(self) -> OccupancyGrid:
        return OccupancyGrid(self.width, self.height, self.resolution, self.origin, self.l_max, self.logodds.copy())

    @property
    def prob(self) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.logodds))

    @property
    def free(self) -> np.ndarray:
        return self.logodds < 0

    @property
    def occupied(self) -> np.ndarray:
        return self.logodds > 0

    @property
    def unknown(self) -> np.ndarray:
        return self.logodds == 0

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        r, c = cell
        return (self.origin[0] + (c + 0.5) * self.resolution, self.origin[1] + (r + 0.5) * self.resolution)

    def world_to_cell(self, x: float, y: float) -> Cell:
        return (int(math.floor((y - self.origin[1]) / self.resolution)), int(math.floor((x - self.origin[0]) / self.resolution)))


# ---------------------------------------------------------------- ray casting


@dataclass(frozen=True)
class RayTable:
    """Cell offsets traversed by each beam, padded to a common length."""

    angles: np.ndarray  # radians
    dr: np.ndarray  # (n_beams, m) int
    dc: np.ndarray
    length: np.ndarray  # valid entries per beam
    dist: np.ndarray  # centre distance of each traversed cell, in cells
    enter: np.ndarray  # ray parameter where the beam enters the cell, in cells


def _supercover(theta: float, reach: float) -> list[tuple[int, int, float]]:
    """Cells (dr, dc, t_enter) crossed by a ray from the centre of cell (0, 0).

    When the ray passes exactly through a cell corner both side cells are
    included, so no touched cell is skipped.
    """
    dx, dy = math.cos(theta), math.sin(theta)
    if abs(dx) < 1e-15:
        dx = 0.0
    if abs(dy) < 1e-15:
        dy = 0.0
    sx = (dx > 0) - (dx < 0)
    sy = (dy > 0) - (dy < 0)
    tdx = 1.0 / abs(dx) if dx else math.inf
    tdy = 1.0 / abs(dy) if dy else math.inf
    tx, ty = 0.5 * tdx, 0.5 * tdy
    cx = cy = 0
    out = [(0, 0, 0.0)]
    while True:
        t = min(tx, ty)
        if t > reach:
            break
        if abs(tx - ty) <= 1e-12 * max(1.0, t):
            out.append((cy, cx + sx, t))
            out.append((cy + sy, cx, t))
            cx += sx
            cy += sy
            tx += tdx
            ty += tdy
        elif tx < ty:
            cx += sx
            tx += tdx
        else:
            cy += sy
            ty += tdy
        out.append((cy, cx, t))
    return out


@lru_cache(maxsize=32)
def ray_table(angles: tuple[float, ...], reach: float) -> RayTable:
    rays = [_supercover(a, reach) for a in angles]
    m = max(len(r) for r in rays)
    n = len(rays)
    dr = np.zeros((n, m), dtype=np.int64)
    dc = np.zeros((n, m), dtype=np.int64)
    enter = np.full((n, m), np.inf)
    length = np.array([len(r) for r in rays], dtype=np.int64)
    for i, r in enumerate(rays):
        arr = np.array(r)
        dr[i, : len(r)] = arr[:, 0]
        dc[i, : len(r)] = arr[:, 1]
        enter[i, : len(r)] = arr[:, 2]
    dist = np.hypot(dr, dc)
    return RayTable(np.array(angles), dr, dc, length, dist, enter)


def beam_angles(spec: SensorSpec, heading: float = 0.0) -> tuple[float, ...]:
    start = heading - spec.fov / 2.0
    return tuple(math.radians(start + k * spec.angular_resolution) for k in range(spec.n_beams))


@dataclass(frozen=True)
class Beam:
    angle: float  # degrees
    range: float  # metres
    hit: bool
    end_cell: Cell


@dataclass
class Scan:
    pose: Cell
    heading: float
    table: RayTable
    ranges: np.ndarray  # metres
    hits: np.ndarray  # bool
    end_index: np.ndarray  # index into the table row of the end cell
    resolution: float

    @property
    def beams(self) -> list[Beam]:
        r0, c0 = self.pose
        out = []
        for i in range(len(self.ranges)):
            k = self.end_index[i]
            cell = (int(r0 + self.table.dr[i, k]), int(c0 + self.table.dc[i, k]))
            out.append(Beam(math.degrees(self.table.angles[i]), float(self.ranges[i]), bool(self.hits[i]), cell))
        return out


def _gather(truth: np.ndarray, rr: np.ndarray, cc: np.ndarray) -> np.ndarray:
    """Truth lookup where cells outside the map count as occupied."""
    h, w = truth.shape
    inb = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    out = np.ones(rr.shape, dtype=bool)
    out[inb] = truth[rr[inb], cc[inb]]
    return out


def simulate_scan(
    truth: np.ndarray,
    pose: Cell,
    spec: SensorSpec,
    rng: np.random.Generator | None = None,
    resolution: float = 0.05,
    heading: float = 0.0,
) -> Scan:
    """First-hit range scan of a boolean obstacle grid from a cell centre."""
    r0, c0 = pose
    if _gather(truth, np.array([r0]), np.array([c0]))[0]:
        raise ValueError(f"pose {pose} is inside an obstacle")
    reach = spec.max_range / resolution
    table = ray_table(beam_angles(spec, heading), round(reach, 9))
    rr, cc = r0 + table.dr, c0 + table.dc
    m = table.dr.shape[1]
    valid = np.arange(m)[None, :] < table.length[:, None]
    occ = _gather(truth, rr, cc) & valid
    hits = occ.any(axis=1)
    first = np.where(hits, occ.argmax(axis=1), table.length - 1)
    rows = np.arange(len(first))
    ranges = np.where(hits, np.minimum(table.dist[rows, first], reach), reach) * resolution
    end = first.copy()
    if spec.noise_sigma > 0:
        if rng is None:
            raise ValueError("noise_sigma > 0 needs an rng")
        ranges = np.clip(ranges + rng.normal(0.0, spec.noise_sigma, size=ranges.shape), 0.0, spec.max_range)
        # end cell is the last traversed cell the noisy range reaches
        reachable = (table.enter <= (ranges / resolution)[:, None]) & valid
        reachable &= np.arange(m)[None, :] <= first[:, None]
        end = np.maximum(reachable.sum(axis=1) - 1, 0)
    return Scan((r0, c0), heading, table, ranges, hits, end, resolution)


def integrate_scan(grid: OccupancyGrid, scan: Scan, spec: SensorSpec) -> OccupancyGrid:
    """Log-odds update in place; every cell changes at most once per scan and a hit wins over a miss."""
    t = scan.table
    r0, c0 = scan.pose
    rr, cc = r0 + t.dr, c0 + t.dc
    m = t.dr.shape[1]
    idx = np.arange(m)[None, :]
    inb = (rr >= 0) & (rr < grid.height) & (cc >= 0) & (cc < grid.width)
    miss = (idx < scan.end_index[:, None]) | ((idx == scan.end_index[:, None]) & ~scan.hits[:, None])
    miss &= idx < t.length[:, None]
    hit = (idx == scan.end_index[:, None]) & scan.hits[:, None]
    flat = rr * grid.width + cc
    hit_cells = np.unique(flat[hit & inb])
    miss_cells = np.setdiff1d(np.unique(flat[miss & inb]), hit_cells)
    L = grid.logodds.reshape(-1)
    L[miss_cells] += logit(spec.p_miss)
    L[hit_cells] += logit(spec.p_hit)
    np.clip(L, -grid.l_max, grid.l_max, out=L)
    return grid


# ---------------------------------------------------------------- frontiers


def frontier_mask(grid: OccupancyGrid) -> np.ndarray:
    unk = grid.unknown
    near = np.zeros_like(unk)
    near[1:, :] |= unk[:-1, :]
    near[:-1, :] |= unk[1:, :]
    near[:, 1:] |= unk[:, :-1]
    near[:, :-1] |= unk[:, 1:]
    return grid.free & near


def corner_frontier_mask(grid: OccupancyGrid) -> np.ndarray:
    """Free cells with an unknown cell among their eight neighbours.

    Beams grazing a corner reveal the first diagonal cell past it, so the
    shadow edge often starts one cell diagonally from the corner.
    """
    near = ndimage.binary_dilation(grid.unknown, structure=np.ones((3, 3), dtype=bool))
    return grid.free & near


@dataclass(frozen=True)
class GridBlockingVertex:
    cell: Cell
    frontier_neighbor: Cell
    direction: tuple[int, int]  # along the extension, into known free space
    goal: Cell | None


def detect_grid_blocking_vertices(grid: OccupancyGrid, goal_offset: int = 2) -> list[GridBlockingVertex]:
    """Occupied cells whose four neighbours are one each of: occupied, unknown,
    frontier free and non-frontier free, with the two free neighbours at a right angle.

    Frontier status of the free neighbours is judged on their eight neighbours.
    """
    front = corner_frontier_mask(grid)
    occ, unk = grid.occupied, grid.unknown
    out = []
    for r, c in zip(*np.nonzero(occ)):
        kinds = {}
        for dr, dc in N4:
            q = (r + dr, c + dc)
            if not grid.in_bounds(q):
                kinds.setdefault("occupied", []).append((dr, dc))
            elif occ[q]:
                kinds.setdefault("occupied", []).append((dr, dc))
            elif unk[q]:
                kinds.setdefault("unknown", []).append((dr, dc))
            elif front[q]:
                kinds.setdefault("frontier", []).append((dr, dc))
            else:
                kinds.setdefault("free", []).append((dr, dc))
        if sorted(kinds) != ["free", "frontier", "occupied", "unknown"]:
            continue
        if any(len(v) != 1 for v in kinds.values()):
            continue
        f, n = kinds["frontier"][0], kinds["free"][0]
        if f[0] * n[0] + f[1] * n[1] != 0:
            continue
        fcell = (int(r + f[0]), int(c + f[1]))
        goal = _offset_goal(grid, fcell, n, goal_offset)
        out.append(GridBlockingVertex((int(r), int(c)), fcell, n, goal))
    return out


def _offset_goal(grid: OccupancyGrid, start: Cell, d: tuple[int, int], offset: int) -> Cell | None:
    for k in range(offset, -1, -1):
        q = (start[0] + k * d[0], start[1] + k * d[1])
        if grid.in_bounds(q) and grid.free[q]:
            return q
    return None


@dataclass(frozen=True)
class Frontier:
    cells: tuple[Cell, ...]
    goal: Cell
    kind: str = "sensing-range"

    @property
    def size(self) -> int:
        return len(self.cells)


def _angular_order(cells, pose: Cell | None) -> list[Cell]:
    if pose is None:
        return sorted(cells)
    return sorted(cells, key=lambda q: (clockwise_angle(pose, q), q))


def clockwise_angle(pose: Cell, q: Cell) -> float:
    """Clockwise angle of q around pose, measured from east, in [0, 2*pi)."""
    a = math.atan2(q[0] - pose[0], q[1] - pose[1])
    return (-a) % (2 * math.pi)


def classify_frontiers(
    grid: OccupancyGrid,
    min_frontier_size: int = 3,
    blocking: list[GridBlockingVertex] | None = None,
    pose: Cell | None = None,
) -> tuple[list[Frontier], list[tuple[Frontier, str]]]:
    """Kept frontier clusters plus discarded ones with the reason."""
    front = frontier_mask(grid)
    labels, n = ndimage.label(front, structure=np.ones((3, 3), dtype=int))
    bv_cells = {bv.cell for bv in (blocking or [])}
    kept, dropped = [], []
    for k in range(1, n + 1):
        cells = [(int(r), int(c)) for r, c in zip(*np.nonzero(labels == k))]
        ordered = _angular_order(cells, pose)
        fr = Frontier(tuple(ordered), ordered[(len(ordered) - 1) // 2])
        if len(cells) < min_frontier_size:
            dropped.append((fr, "small"))
        elif any((r + dr, c + dc) in bv_cells for r, c in cells for dr, dc in N4):
            dropped.append((Frontier(fr.cells, fr.goal, "blocking-vertex-adjacent"), "blocking-vertex"))
        else:
            kept.append(fr)
    return kept, dropped


def extract_frontiers(grid, min_frontier_size=3, blocking=None, pose=None) -> list[Frontier]:
    return classify_frontiers(grid, min_frontier_size, blocking, pose)[0]


def free_distances(grid: OccupancyGrid, start: Cell) -> np.ndarray:
    """4-connected BFS step counts through known-free cells (-1 where unreachable)."""
    free = grid.free
    dist = np.full(free.shape, -1, dtype=np.int64)
    if not grid.in_bounds(start) or not free[start]:
        return dist
    dist[start] = 0
    q = deque([start])
    h, w = free.shape
    while q:
        r, c = q.popleft()
        d = dist[r, c] + 1
        for dr, dc in N4:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and free[rr, cc] and dist[rr, cc] < 0:
                dist[rr, cc] = d
                q.append((rr, cc))
    return dist


def free_path(grid: OccupancyGrid, a: Cell, b: Cell) -> list[Cell] | None:
    """Shortest 4-connected path through known-free cells, deterministic neighbour order."""
    dist = free_distances(grid, b)
    if dist[a] < 0:
        return None
    path = [a]
    cur = a
    while cur != b:
        for dr, dc in N4:
            q = (cur[0] + dr, cur[1] + dc)
            if grid.in_bounds(q) and dist[q] == dist[cur] - 1:
                cur = q
                break
        path.append(cur)
    return path


@dataclass(frozen=True)
class GridGoal:
    cell: Cell
    kind: str  # "extension-goal" or "frontier-goal"
    source: Cell


def synthesize_goals(
    grid: OccupancyGrid,
    pose: Cell,
    min_frontier_size: int = 3,
    goal_offset: int = 2,
    dedupe_radius: int = 0,
) -> list[GridGoal]:
    """Blocking-vertex and frontier goals, reachable from pose, clockwise around it."""
    bvs = detect_grid_blocking_vertices(grid, goal_offset)
    fronts = extract_frontiers(grid, min_frontier_size, bvs, pose)
    cand = [GridGoal(bv.goal, "extension-goal", bv.cell) for bv in bvs if bv.goal is not None]
    cand += [GridGoal(f.goal, "frontier-goal", f.goal) for f in fronts]
    reach = free_distances(grid, pose)
    out: list[GridGoal] = []
    for g in cand:
        if reach[g.cell] < 0:
            log.warning("goal %s unreachable through known free space; dropped", g.cell)
            continue
        if any(max(abs(g.cell[0] - o.cell[0]), abs(g.cell[1] - o.cell[1])) <= dedupe_radius for o in out):
            continue
        out.append(g)
    out.sort(key=lambda g: (clockwise_angle(pose, g.cell), g.cell))
    return out


def binary_entropy(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    return np.nan_to_num(h, nan=0.0)


def map_entropy(grid: OccupancyGrid) -> float:
    return float(binary_entropy(grid.prob).sum())


# ---------------------------------------------------------------- file formats


def _pgm_tokens(data: bytes):
    """Header tokens of a PGM file, skipping comments; returns (tokens, offset after header)."""
    tokens, i = [], 0
    while len(tokens) < 4:
        while data[i : i + 1].isspace():
            i += 1
        if data[i : i + 1] == b"#":
            while data[i : i + 1] not in (b"\n", b""):
                i += 1
            continue
        j = i
        while not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j].decode("ascii"))
        i = j
    return tokens, i + 1


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a P2 or P5 PGM into a uint8 array with row 0 at the bottom."""
    data = Path(path).read_bytes()
    try:
        (magic, w, h, maxval), off = _pgm_tokens(data)
        w, h, maxval = int(w), int(h), int(maxval)
    except (ValueError, IndexError):
        raise ValueError(f"{path}: not a PGM file") from None
    if magic == "P5":
        img = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=off).reshape(h, w)
    elif magic == "P2":
        body = b" ".join(line.split(b"#")[0] for line in data[off:].splitlines())
        img = np.array(body.split()[: w * h], dtype=np.int64).reshape(h, w)
    else:
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    if maxval != 255:
        img = np.round(img * (255.0 / maxval))
    return np.flipud(img.astype(np.uint8))


def pgm_bytes(img: np.ndarray, binary: bool = True, comment: str | None = None) -> bytes:
    img = np.flipud(np.asarray(img, dtype=np.uint8))
    h, w = img.shape
    lines = ["P5" if binary else "P2"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{w} {h}")
    lines.append("255")
    header = ("\n".join(lines) + "\n").encode("ascii")
    if binary:
        return header + img.tobytes()
    return header + "\n".join(" ".join(str(v) for v in row) for row in img).encode("ascii") + b"\n"


def write_pgm(path: str | Path, img: np.ndarray, binary: bool = True, comment: str | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img, binary, comment))


def truth_from_pgm(img: np.ndarray) -> np.ndarray:
    """Obstacle mask: dark pixels and unknown grey both count as blocked."""
    return img <= 128


def belief_image(grid: OccupancyGrid) -> np.ndarray:
    img = np.full(grid.logodds.shape, 128, dtype=np.uint8)
    img[grid.occupied] = 0
    img[grid.free] = 255
    return img


def truth_image(truth: np.ndarray) -> np.ndarray:
    return np.where(truth, 0, 255).astype(np.uint8)


def belief_csv(grid: OccupancyGrid, header: str | None = None) -> str:
    p = grid.prob
    lines = [f"# {header}"] if header else []
    lines.append("row,col,p")
    lines.extend(f"{r},{c},{p[r, c]:.6f}" for r in range(grid.height) for c in range(grid.width))
    return "\n".join(lines) + "\n"


def write_belief_csv(path: str | Path, grid: OccupancyGrid, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(belief_csv(grid, header))


def rasterize_polygon(P, resolution: float, margin: int = 1) -> tuple[np.ndarray, tuple[float, float]]:
    """Obstacle mask of an orthogonal polygon: a cell is free when its centre is strictly inside.

    Returns the mask and the world origin of cell (0, 0).
    """
    from fractions import Fraction

    res = Fraction(repr(resolution)) if isinstance(resolution, float) else Fraction(resolution)
    x0, y0, x1, y1 = P.bbox
    w = int(math.ceil((x1 - x0) / res)) + 2 * margin
    h = int(math.ceil((y1 - y0) / res)) + 2 * margin
    ox, oy = x0 - margin * res, y0 - margin * res
    truth = np.ones((h, w), dtype=bool)
    for r in range(h):
        cy = oy + (r + Fraction(1, 2)) * res
        for c in range(w):
            cx = ox + (c + Fraction(1, 2)) * res
            if P.contains((cx, cy), closed=False):
                truth[r, c] = False
    return truth, (float(ox), float(oy))
