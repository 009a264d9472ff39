"""SVG drawing of a scenario with UAV trajectories, stations and the ROI hull."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

from .energy_sim import Solution
from .enhancements.hull import roi_hull
from .scenario import Scenario

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class RenderSpec:
    width_px: int = 800
    height_px: int = 800
    show_hull: bool = True
    show_stations: bool = True
    # UAV u is drawn in palette[u % len(palette)]
    palette: tuple[str, ...] = PALETTE

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("image dimensions must be positive")
        if not self.palette:
            raise ValueError("palette must not be empty")

    def color(self, uav: int) -> str:
        return self.palette[uav % len(self.palette)]


def render_svg(scenario: Scenario, solution: Solution | None = None, spec: RenderSpec | None = None) -> str:
    spec = spec or RenderSpec()
    grid = scenario.grid
    sx = spec.width_px / grid.width_m
    sy = spec.height_px / grid.height_m

    def px(x: float, y: float) -> str:
        return f"{x * sx:.2f},{y * sy:.2f}"

    cw, ch = grid.cell_size_m * sx, grid.cell_size_m * sy
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<!-- Frame: field meters mapped linearly to pixels; origin at the top-left corner,",
        "     x grows with the column index, y grows downward with the row index. -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width_px}" height="{spec.height_px}" '
        f'viewBox="0 0 {spec.width_px} {spec.height_px}">',
        f'<rect x="0" y="0" width="{spec.width_px}" height="{spec.height_px}" fill="white" stroke="black"/>',
        '<g id="grid" stroke="#dddddd" stroke-width="0.5">',
    ]
    for c in range(1, grid.cols):
        out.append(f'<line x1="{c * cw:.2f}" y1="0" x2="{c * cw:.2f}" y2="{spec.height_px}"/>')
    for r in range(1, grid.rows):
        out.append(f'<line x1="0" y1="{r * ch:.2f}" x2="{spec.width_px}" y2="{r * ch:.2f}"/>')
    out.append("</g>")

    if spec.show_hull:
        hull = roi_hull(scenario)
        pts = " ".join(px(x, y) for x, y in hull.vertices)
        out.append(f'<polygon id="hull" points="{pts}" fill="none" stroke="#888888" stroke-dasharray="6,4"/>')

    out.append('<g id="rois" fill="#ffd54f" stroke="#333333">')
    for roi in scenario.rois:
        r, c = roi
        out.append(f'<rect x="{c * cw:.2f}" y="{r * ch:.2f}" width="{cw:.2f}" height="{ch:.2f}"/>')
    out.append("</g>")

    if solution is not None:
        out.append('<g id="paths" fill="none" stroke-width="2">')
        for u, path in enumerate(solution.paths):
            pts = " ".join(px(*grid.center(w.cell)) for w in path)
            out.append(f'<polyline class="uav" data-uav="{u}" points="{pts}" stroke={quoteattr(spec.color(u))}/>')
        out.append("</g>")
        if spec.show_stations:
            out.append('<g id="stations" fill="black">')
            for s in solution.sorted_stations():
                x, y = grid.center(s)
                out.append(f'<circle cx="{x * sx:.2f}" cy="{y * sy:.2f}" r="{min(cw, ch) / 4:.2f}"/>')
            out.append("</g>")

    x, y = grid.center(scenario.start)
    out.append(f'<circle id="start" cx="{x * sx:.2f}" cy="{y * sy:.2f}" r="{min(cw, ch) / 3:.2f}" '
               'fill="none" stroke="black" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
