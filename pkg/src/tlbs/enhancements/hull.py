"""Convex hull of ROI centers, used to shrink the charging-cell search space."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..scenario import CellIndex, Grid, Scenario

Point = tuple[float, float]


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def monotone_chain(points: Iterable[Sequence[float]]) -> list[Point]:
    """Andrew's monotone chain; strictly convex vertices, positive orientation.

    Degenerate inputs return one vertex (all points equal) or the two segment
    endpoints (all points collinear).
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if not pts:
        raise ValueError("convex hull of an empty point set")
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def contains(vertices: Sequence[Point], xy: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Vectorised inside-or-on test for an (n, 2) array against a hull."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    v = np.asarray(vertices, dtype=float)
    if len(v) == 1:
        return np.hypot(xy[:, 0] - v[0, 0], xy[:, 1] - v[0, 1]) <= tol
    if len(v) == 2:
        a, b = v
        ab = b - a
        t = np.clip(((xy - a) @ ab) / (ab @ ab), 0.0, 1.0)
        proj = a + t[:, None] * ab
        return np.hypot(*(xy - proj).T) <= tol
    inside = np.ones(len(xy), dtype=bool)
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        edge = b - a
        scale = np.hypot(*edge)
        cross = edge[0] * (xy[:, 1] - a[1]) - edge[1] * (xy[:, 0] - a[0])
        inside &= cross >= -tol * scale
    return inside


@dataclass(frozen=True)
class HullFilter:
    vertices: tuple[Point, ...]
    members: frozenset[CellIndex]
    member_index: np.ndarray  # sorted row-major flat indices of members

    def __contains__(self, cell) -> bool:
        return CellIndex(*cell) in self.members

    @property
    def size(self) -> int:
        return len(self.members)


def convex_hull(points: Iterable[Sequence[float]], grid: Grid | None = None) -> HullFilter:
    """Hull of 2D points plus, given a grid, the cells whose centers lie inside or on it."""
    verts = tuple(monotone_chain(points))
    if grid is None:
        return HullFilter(verts, frozenset(), np.empty(0, dtype=np.intp))
    mask = contains(verts, grid.centers)
    idx = np.flatnonzero(mask)
    return HullFilter(verts, frozenset(grid.cell(i) for i in idx), idx)


def roi_hull(scenario: Scenario) -> HullFilter:
    grid = scenario.grid
    return convex_hull([grid.center(r) for r in scenario.rois], grid)
