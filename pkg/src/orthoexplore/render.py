"""Deterministic SVG overviews of a finished run."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .explorer.tree import NodeState
from .geometry.extensions import essential_extensions
from .occupancy import frontier_mask

LAYERS = ("polygon", "grid", "tree", "trajectories", "frontiers", "extensions")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
STATE_FILL = {
    NodeState.UNEXPLORED: "#ffffff",
    NodeState.UNDER_EXPLORATION: "#ffd700",
    NodeState.EXPLORED: "#444444",
}


@dataclass(frozen=True)
class RenderSpec:
    layers: tuple[str, ...] = ("polygon", "grid", "tree", "trajectories")
    path: str | None = None
    scale: float = 40.0

    def __post_init__(self):
        if not self.layers:
            raise ValueError("at least one layer is required")
        bad = [x for x in self.layers if x not in LAYERS]
        if bad:
            raise ValueError(f"unknown layer(s): {', '.join(bad)}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


class _Canvas:
    def __init__(self, bbox, scale, pad=10.0):
        self.x0, self.y0, self.x1, self.y1 = (float(v) for v in bbox)
        self.s = scale
        self.pad = pad
        self.items: list[str] = []

    def pt(self, x, y) -> tuple[str, str]:
        return _f(self.pad + (float(x) - self.x0) * self.s), _f(self.pad + (self.y1 - float(y)) * self.s)

    @property
    def size(self):
        return 2 * self.pad + (self.x1 - self.x0) * self.s, 2 * self.pad + (self.y1 - self.y0) * self.s

    def svg(self, title: str) -> str:
        w, h = self.size
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w)}" height="{_f(h)}" '
            f'viewBox="0 0 {_f(w)} {_f(h)}">'
        )
        return "\n".join([head, f"<!-- {title} -->", '<rect width="100%" height="100%" fill="#fafafa"/>', *self.items, "</svg>"]) + "\n"


def _bbox(world):
    if world.mode == "geometric":
        return world.P.bbox
    g = world.grid
    return (g.origin[0], g.origin[1], g.origin[0] + g.width * g.resolution, g.origin[1] + g.height * g.resolution)


def _grid_rows(cv: _Canvas, grid, mask: np.ndarray, fill: str) -> None:
    """Run-length encoded rectangles for the cells set in ``mask``."""
    res = grid.resolution
    for r in range(grid.height):
        row = mask[r]
        c = 0
        while c < grid.width:
            if not row[c]:
                c += 1
                continue
            c1 = c
            while c1 < grid.width and row[c1]:
                c1 += 1
            x = grid.origin[0] + c * res
            y = grid.origin[1] + (r + 1) * res
            px, py = cv.pt(x, y)
            cv.items.append(
                f'<rect x="{px}" y="{py}" width="{_f((c1 - c) * res * cv.s)}" height="{_f(res * cv.s)}" fill="{fill}"/>'
            )
            c = c1


def render_svg(world, result, spec: RenderSpec, title: str = "") -> str:
    cv = _Canvas(_bbox(world), spec.scale)
    layers = set(spec.layers)
    if "grid" in layers and world.mode == "grid":
        g = world.grid
        _grid_rows(cv, g, g.unknown, "#bbbbbb")
        _grid_rows(cv, g, g.occupied, "#222222")
    if "polygon" in layers and world.mode == "geometric":
        pts = " ".join(",".join(cv.pt(x, y)) for x, y in world.P.vertices)
        cv.items.append(f'<polygon points="{pts}" fill="#ffffff" stroke="#000000" stroke-width="2"/>')
    if "extensions" in layers and world.mode == "geometric":
        for e in essential_extensions(world.P, world.start):
            (ax, ay), (bx, by) = (cv.pt(*q) for q in e.segment)
            cv.items.append(f'<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="#888888" stroke-dasharray="4 3"/>')
    if "frontiers" in layers and world.mode == "grid":
        _grid_rows(cv, world.grid, frontier_mask(world.grid), "#e41a1c")
    if "trajectories" in layers:
        for r in sorted(result.trajectories):
            pts = " ".join(",".join(cv.pt(*world.xy(q))) for _, q in result.trajectories[r])
            color = PALETTE[r % len(PALETTE)]
            cv.items.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2" stroke-opacity="0.8"/>')
    if "tree" in layers:
        tree = result.tree
        for n in tree.nodes[1:]:
            (ax, ay), (bx, by) = cv.pt(*world.xy(tree[n.parent].position)), cv.pt(*world.xy(n.position))
            cv.items.append(f'<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="#555555" stroke-width="1"/>')
        for n in tree.nodes:
            x, y = cv.pt(*world.xy(n.position))
            rad = 6 if n.kind == "root" else 4
            cv.items.append(
                f'<circle cx="{x}" cy="{y}" r="{rad}" fill="{STATE_FILL[n.state]}" stroke="#000000"><title>{n.id} {n.kind}</title></circle>'
            )
    return cv.svg(title)


def write_svg(world, result, spec: RenderSpec, title: str = "") -> str:
    text = render_svg(world, result, spec, title)
    if spec.path:
        with open(spec.path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
