"""Candidate cells for a battery-swap stop on the way to a pending ROI."""
from __future__ import annotations

import bisect

import numpy as np

from .scenario import Scenario

# Energy kept in hand on every leg so the validator's strict 0 < E bound holds under float error.
EPS = 1e-6


def reachable(D: np.ndarray, current: int, residual: float, fly_cost: float,
              space: np.ndarray) -> np.ndarray:
    """Cells of `space` reachable from `current` on the residual energy."""
    return space[fly_cost * D[current, space] <= residual - EPS]


def detour_candidates(D: np.ndarray, current: int, target: int, residual: float, fly_cost: float,
                      space: np.ndarray, slack_m: float) -> np.ndarray:
    """Reachable cells that get strictly closer to `target` with a bounded detour.

    The detour of a stop `a` is d(cur, a) + d(a, target) - d(cur, target).
    """
    d_cur = D[current, space]
    d_tgt = D[target, space]
    direct = D[current, target]
    mask = (fly_cost * d_cur <= residual - EPS) & (d_tgt < direct - EPS) & (d_cur + d_tgt <= direct + slack_m)
    return space[mask]


def progress_candidates(D: np.ndarray, current: int, target: int, residual: float, fly_cost: float,
                        space: np.ndarray) -> np.ndarray:
    """Reachable cells strictly closer to `target` than `current`, any detour."""
    d_cur = D[current, space]
    mask = (fly_cost * d_cur <= residual - EPS) & (D[target, space] < D[current, target] - EPS)
    return space[mask]


class StopFinder:
    """Deterministic stop choice toward a target, with per-(cell, target) caching.

    Stops prefer an already-known station on a short detour; otherwise the
    reachable cell nearest the target, which is the farthest point along the
    leg snapped to the grid.
    """

    def __init__(self, scenario: Scenario, slack_m: float | None = None):
        grid = scenario.grid
        self.D = grid.distances
        self.Dl = self.D.tolist()
        self.fly_cost = scenario.uav.fly_cost_per_m
        self.e_max = scenario.uav.e_max
        self.slack = grid.cell_size_m / 2 if slack_m is None else slack_m
        self._all = np.arange(grid.num_cells)
        self._toward: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def _ranked(self, pos: int, target: int) -> tuple[list[int], list[float]]:
        """Progress cells toward `target` sorted by remaining distance, with the
        negated running minimum of their flight cost for bisection."""
        key = (pos, target)
        hit = self._toward.get(key)
        if hit is None:
            D = self.D
            cells = self._all[D[target] < D[pos, target] - EPS]
            cells = cells[np.lexsort((cells, D[target, cells]))]
            cost = D[pos, cells] * self.fly_cost
            hit = self._toward[key] = (cells.tolist(), (-np.minimum.accumulate(cost)).tolist())
        return hit

    def next_stop(self, pos: int, target: int, energy: float, known=()) -> int | None:
        """Where to swap next on the way from `pos` to `target`; None if nowhere is reachable."""
        Dl, fc = self.Dl, self.fly_cost
        direct = Dl[pos][target]
        row_p, row_t = Dl[pos], Dl[target]
        best = None
        for s in known:
            dp, dt = row_p[s], row_t[s]
            if fc * dp <= energy - EPS and dt < direct - EPS and dp + dt <= direct + self.slack:
                if best is None or (dt, s) < best:
                    best = (dt, s)
        if best is not None:
            return best[1]
        cells, neg_min = self._ranked(pos, target)
        k = bisect.bisect_left(neg_min, EPS - energy)
        return cells[k] if k < len(cells) else None
