"""Exact ground truth: brute-force TSP over ROIs plus greedy station placement.

Exact only for single-UAV instances and for semi-random instances whose
regions decompose into independent single-UAV problems.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .energy_sim import Kind, Waypoint
from .scenario import CellIndex, Grid, Scenario

DEFAULT_CAP = 12


class OracleRefusal(ValueError):
    """Instance is outside what the exact oracle can solve."""


@dataclass(frozen=True)
class OracleSolution:
    visit_order: tuple[CellIndex, ...]
    station_points: tuple[tuple[float, float], ...]
    path_len_m: float
    nc: int

    def to_dict(self) -> dict:
        return {
            "visit_order": [[r, c] for r, c in self.visit_order],
            "station_points": [[x, y] for x, y in self.station_points],
            "path_len_m": self.path_len_m,
            "nc": self.nc,
        }


@dataclass(frozen=True)
class OracleResult:
    regions: tuple[OracleSolution, ...]

    @property
    def max_path_len_m(self) -> float:
        return max(r.path_len_m for r in self.regions)

    @property
    def nc(self) -> int:
        return sum(r.nc for r in self.regions)

    def to_dict(self, grid: Grid) -> dict:
        points = [p for r in self.regions for p in r.station_points]
        cells = sorted({grid.cell_at(x, y) for x, y in points})
        return {
            "paths": [[Waypoint(c, Kind.START if k == 0 else Kind.ROI_VISIT).to_dict()
                       for k, c in enumerate(r.visit_order)] for r in self.regions],
            "stations": [[r, c] for r, c in cells],
            "station_points": [[x, y] for x, y in points],
            "max_path_len_m": self.max_path_len_m,
            "nc": self.nc,
            "regions": [r.to_dict() for r in self.regions],
        }


def _perm_block(k: int) -> np.ndarray:
    """All permutations of range(k) in lexicographic order, one per row."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(list(itertools.permutations(range(k))), dtype=np.intp)


def tsp_brute_force(rois: Sequence[Sequence[int]], start: Sequence[int], grid: Grid,
                    cap: int = DEFAULT_CAP, closed: bool = False) -> tuple[list[CellIndex], float]:
    """Shortest path from `start` through every ROI, by full enumeration.

    The start cell is fixed first (and last when `closed`); `start` need not be a
    ROI itself. Ties go to the lexicographically smallest order over the sorted
    ROI cells. Enumeration runs one first-ROI prefix at a time over a shared
    permutation block, so memory stays at (n-2)! rows.
    """
    start = grid.check(start)
    others = sorted({grid.check(r) for r in rois} - {start})
    if len(others) + 1 > cap:
        raise OracleRefusal(f"{len(others) + 1} cells exceeds the brute-force cap of {cap}")
    if not others:
        return [start], 0.0
    pts = np.array([grid.center(start)] + [grid.center(c) for c in others])
    D = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    k = len(others)
    block = _perm_block(k - 1)
    best_len, best_order = math.inf, None
    for first in range(1, k + 1):
        rest = np.array([i for i in range(1, k + 1) if i != first], dtype=np.intp)
        perms = rest[block] if k > 1 else np.zeros((1, 0), dtype=np.intp)
        lengths = np.full(len(perms), D[0, first])
        prev = np.full(len(perms), first)
        for t in range(perms.shape[1]):
            lengths += D[prev, perms[:, t]]
            prev = perms[:, t]
        if closed:
            lengths += D[prev, 0]
        i = int(np.argmin(lengths))
        if lengths[i] < best_len:
            best_len = float(lengths[i])
            best_order = [first] + perms[i].tolist()
    return [start] + [others[i - 1] for i in best_order], best_len


def polyline_points(grid: Grid, order: Sequence[Sequence[int]]) -> list[tuple[float, float]]:
    return [grid.center(c) for c in order]


def place_on_polyline(points: Sequence[tuple[float, float]], range_m: float
                      ) -> tuple[list[tuple[float, float]], float]:
    """Greedy farthest-point stations along a polyline flown from a full battery.

    Single pass over the segments: a station lands wherever the arc length since
    the last swap reaches range_m, unless the path ends first.
    """
    if range_m <= 0:
        raise ValueError("range_m must be positive")
    stations: list[tuple[float, float]] = []
    walked = 0.0
    next_stop = range_m
    for (ax, ay), (bx, by) in zip(points, points[1:]):
        seg = math.hypot(bx - ax, by - ay)
        end = walked + seg
        while next_stop < end:
            f = (next_stop - walked) / seg
            stations.append((ax + (bx - ax) * f, ay + (by - ay) * f))
            next_stop += range_m
        walked = end
    # a station exactly at the end of the path is never needed
    return stations, walked


def greedy_station_placement(order: Sequence[Sequence[int]], grid: Grid, range_m: float) -> OracleSolution:
    pts = polyline_points(grid, order)
    stations, length = place_on_polyline(pts, range_m)
    return OracleSolution(tuple(CellIndex(*c) for c in order), tuple(stations), length, len(stations))


def oracle_solve(scenario: Scenario, cap: int = DEFAULT_CAP, closed: bool | None = None) -> OracleResult:
    """Exact solution per independent region; every region's path starts at the shared start."""
    closed = scenario.return_to_start if closed is None else closed
    if scenario.num_uavs == 1:
        groups = [list(scenario.rois)]
    else:
        groups = scenario.regions()
        if scenario.layout is None or len(groups) != scenario.num_uavs or not all(groups):
            raise OracleRefusal("multi-UAV instance does not decompose into one region per UAV")
    range_m = scenario.uav.range_m
    regions = []
    for group in groups:
        order, _ = tsp_brute_force(group, scenario.start, scenario.grid, cap=cap, closed=closed)
        if closed and len(order) > 1:
            order = order + [scenario.start]
        regions.append(greedy_station_placement(order, scenario.grid, range_m))
    return OracleResult(tuple(regions))
