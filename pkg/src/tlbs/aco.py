"""Ant-colony solver for joint UAV trajectory and battery-swap station placement."""
from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import charging
from .energy_sim import Kind, Solution, Waypoint
from .enhancements.hull import HullFilter, roi_hull
from .enhancements.two_opt import two_opt
from .scenario import CellIndex, Grid, Scenario, dist


class InfeasibleError(RuntimeError):
    pass


RANKINGS = ("weighted", "length", "normalized")


@dataclass
class SolverParams:
    alpha: float = 2.0
    beta: float = 2.0
    rho: float = 0.3
    tau0: float = 1.0
    q1: float = 1.0
    q2: float = 1.0
    max_iterations: int = 30000
    seed: int = 0
    # Energy held back before committing to a ROI leg; None -> one cell diagonal of flight.
    e_threshold: float | None = 0.0
    use_hull_reduction: bool = True
    use_two_opt: bool = True
    # Probability of taking the highest-scoring move instead of sampling, per mode.
    exploit_prob: float = 0.0
    charge_exploit_prob: float = 1.0
    station_reuse_bonus: float = 1.5
    # None -> half a cell
    detour_slack_m: float | None = None
    # Best-so-far order: "weighted" = smaller maxL/Q1 + NC/Q2, "length" = (max L, NC) lexicographic,
    # "normalized" = smaller maxL/L0 + NC/max(NC0, 1) against the first iteration's solution.
    ranking: str = "weighted"

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.tau0 <= 0:
            raise ValueError("tau0 must be positive")
        if self.q1 < 0 or self.q2 < 0:
            raise ValueError("q1 and q2 must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (0.0 <= self.exploit_prob <= 1.0 and 0.0 <= self.charge_exploit_prob <= 1.0):
            raise ValueError("exploit probabilities must lie in [0, 1]")
        if self.ranking not in RANKINGS:
            raise ValueError(f"unknown ranking {self.ranking!r}")
        if self.e_threshold is not None and self.e_threshold < 0:
            raise ValueError("e_threshold must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> SolverParams:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown solver parameters: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> SolverParams:
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".toml":
            try:
                import tomllib
            except ImportError:  # Python < 3.11
                import tomli as tomllib
            return cls.from_dict(tomllib.loads(text))
        return cls.from_dict(json.loads(text))

    def replace(self, **changes) -> SolverParams:
        return SolverParams(**{**asdict(self), **changes})


def _flat(grid: Grid, c) -> int:
    if isinstance(c, (int, np.integer)):
        return int(c)
    return grid.index(c)


class PheromoneMatrix:
    """Symmetric trail intensities over cell pairs, reading tau0 where untouched.

    Offsets from tau0 are stored per row with a shared decay factor, so evaporating
    every stored edge costs O(1) instead of a full sweep.
    """

    def __init__(self, grid: Grid, tau0: float = 1.0):
        self.grid = grid
        self.tau0 = float(tau0)
        self._n = grid.num_cells
        self._rows: dict[int, np.ndarray] = {}
        self._scale = 1.0

    def _offset(self, i: int, j: int) -> float:
        row = self._rows.get(i)
        return 0.0 if row is None else self._scale * row[j]

    def _store(self, i: int, j: int, offset: float) -> None:
        for a, b in ((i, j), (j, i)):
            row = self._rows.get(a)
            if row is None:
                row = self._rows[a] = np.zeros(self._n)
            row[b] = offset / self._scale

    def get(self, a, b) -> float:
        i, j = _flat(self.grid, a), _flat(self.grid, b)
        return self.tau0 + self._offset(i, j)

    def row(self, a: int, cols: np.ndarray) -> np.ndarray:
        """Trail values from cell `a` to each cell in `cols`."""
        row = self._rows.get(a)
        if row is None:
            return np.full(len(cols), self.tau0)
        return self.tau0 + self._scale * row[cols]

    def values(self, a: int, cols: Sequence[int]) -> list[float]:
        row = self._rows.get(a)
        if row is None:
            return [self.tau0] * len(cols)
        t0, g = self.tau0, self._scale
        return [t0 + g * v for v in row[cols].tolist()]

    def set(self, a, b, value: float) -> None:
        if value < 0:
            raise ValueError("pheromone must be non-negative")
        i, j = _flat(self.grid, a), _flat(self.grid, b)
        self._store(i, j, value - self.tau0)

    def scale_all(self, factor: float) -> None:
        """Multiply every trail and tau0 by a common factor."""
        self.tau0 *= factor
        self._scale *= factor

    def evaporate(self, rho: float, exclude: Iterable[tuple[int, int]] = ()) -> None:
        """tau <- (1 - rho) tau + rho tau0 on every edge not in `exclude`."""
        kept = [(i, j, self._offset(i, j)) for i, j in exclude]
        self._scale *= 1.0 - rho
        if self._scale < 1e-150:
            for row in self._rows.values():
                row *= self._scale
            self._scale = 1.0
        for i, j, off in kept:
            self._store(i, j, off)

    def reinforce(self, rho: float, edges: Iterable[tuple[int, int]], deposit: float) -> None:
        """tau <- (1 - rho) tau + rho * deposit on every edge in `edges`."""
        for i, j in edges:
            off = self._offset(i, j)
            self._store(i, j, (1.0 - rho) * off + rho * (deposit - self.tau0))

    def stored(self) -> dict[tuple[int, int], float]:
        out = {}
        for i, row in self._rows.items():
            for j in np.flatnonzero(row):
                if i < j:
                    out[(i, int(j))] = self.tau0 + self._scale * row[j]
        return out


def deposit_amount(q1: float, q2: float, max_len_m: float, nc: int) -> float:
    """Q1 / max L + Q2 / NC, with the station term dropped when NC = 0."""
    if max_len_m <= 0:
        raise ValueError("max_len_m must be positive")
    return q1 / max_len_m + (q2 / nc if nc > 0 else 0.0)


def weighted_cost(q1: float, q2: float, max_len_m: float, nc: int) -> float:
    """maxL/Q1 + NC/Q2: each objective measured in units of its reinforcement constant.

    A zero constant makes its objective dominate: Q2 = 0 (tuning saw no
    stations) ranks any station above any length, Q1 = 0 the reverse.
    """
    if q2 == 0:
        return nc * 1e12 + (max_len_m / q1 if q1 > 0 else max_len_m)
    if q1 == 0:
        return max_len_m * 1e12 + nc / q2
    return max_len_m / q1 + nc / q2


def evaporate(tau: PheromoneMatrix, used_edges: Iterable, rho: float) -> None:
    g = tau.grid
    tau.evaporate(rho, [(_flat(g, a), _flat(g, b)) for a, b in used_edges])


def reinforce(tau: PheromoneMatrix, used_edges: Iterable, rho: float, q1: float, q2: float,
              max_len_m: float, nc: int) -> None:
    g = tau.grid
    tau.reinforce(rho, [(_flat(g, a), _flat(g, b)) for a, b in used_edges],
                  deposit_amount(q1, q2, max_len_m, nc))


def used_edges(grid: Grid, solution: Solution) -> set[tuple[int, int]]:
    """Unordered flat-index pairs flown by any UAV, zero-length hops excluded."""
    edges = set()
    for path in solution.paths:
        for a, b in zip(path, path[1:]):
            i, j = grid.index(a.cell), grid.index(b.cell)
            if i != j:
                edges.add((min(i, j), max(i, j)))
    return edges


def roi_selection_prob(grid: Grid, current, candidate, r_visit: Sequence, tau: PheromoneMatrix,
                       alpha: float, beta: float) -> float:
    """Probability of moving to `candidate` next among the unvisited ROIs."""
    if not r_visit:
        raise ValueError("no unvisited ROI left")
    cells = [CellIndex(*c) for c in r_visit]
    if CellIndex(*candidate) not in cells:
        return 0.0
    cur = CellIndex(*current)
    weights = {c: tau.get(cur, c) ** alpha * (1.0 / dist(grid, cur, c)) ** beta for c in cells}
    return weights[CellIndex(*candidate)] / sum(weights.values())


def select_next_roi(grid: Grid, current, r_visit: Sequence, tau: PheromoneMatrix, alpha: float, beta: float,
                    rng: random.Random | None = None) -> CellIndex:
    """Most probable next ROI, ties to the earliest in `r_visit`; with `rng`, a roulette draw instead."""
    if not r_visit:
        raise ValueError("no unvisited ROI left")
    cur = CellIndex(*current)
    cells = [CellIndex(*c) for c in r_visit]
    w = [tau.get(cur, c) ** alpha * dist(grid, cur, c) ** -beta for c in cells]
    if rng is None:
        return cells[max(range(len(w)), key=w.__getitem__)]
    x = rng.random() * sum(w)
    acc = 0.0
    for c, wi in zip(cells, w):
        acc += wi
        if acc > x:
            return c
    return cells[-1]


def select_charging_cell(grid: Grid, current, candidates: Sequence, tau: PheromoneMatrix,
                         params: SolverParams, stations: Iterable = ()) -> CellIndex:
    """Highest-scoring swap cell: tau^alpha * d^beta, existing stations boosted.

    Ties resolve to the lowest row-major cell index.
    """
    if not candidates:
        raise ValueError("no charging candidates")
    cur = CellIndex(*current)
    existing = {CellIndex(*s) for s in stations}
    best, best_score = None, -1.0
    for c in sorted(CellIndex(*c) for c in candidates):
        score = tau.get(cur, c) ** params.alpha * dist(grid, cur, c) ** params.beta
        if c in existing:
            score *= params.station_reuse_bonus
        if score > best_score:
            best, best_score = c, score
    return best


def reachable_cells(scenario: Scenario, current, residual: float, hull_filter: HullFilter | None = None,
                    stations: Iterable = ()) -> set[CellIndex]:
    """Cells reachable from `current` on `residual` energy, optionally inside the ROI hull.

    Existing stations within range are always included.
    """
    if residual <= 0:
        raise ValueError("residual energy must be positive")
    grid = scenario.grid
    cur = grid.index(current)
    space = np.arange(grid.num_cells) if hull_filter is None else hull_filter.member_index
    st = np.array(sorted(grid.index(s) for s in stations), dtype=np.intp)
    # distance-zero current cell always qualifies, even at residual -> 0+
    cand = np.union1d(charging.reachable(grid.distances, cur, residual + charging.EPS,
                                         scenario.uav.fly_cost_per_m, space),
                      charging.reachable(grid.distances, cur, residual + charging.EPS,
                                         scenario.uav.fly_cost_per_m, st))
    out = {grid.cell(i) for i in cand}
    out.add(grid.check(current))
    return out


@dataclass
class IterationStats:
    iteration: int
    max_len_m: float
    nc: int
    best_len_m: float
    best_nc: int
    shortest_len_m: float
    charge_stops: int
    candidates_scanned: int
    seconds: float


class Colony:
    """One solver run: pheromone state, RNG and best-so-far tracking."""

    def __init__(self, scenario: Scenario, params: SolverParams):
        self.scenario = scenario
        self.params = params
        grid = scenario.grid
        self.grid = grid
        self.D = grid.distances
        self.Dl = self.D.tolist()
        self.fly_cost = scenario.uav.fly_cost_per_m
        self.e_max = scenario.uav.e_max
        self.threshold = max(
            params.e_threshold if params.e_threshold is not None else self.fly_cost * grid.diagonal_m,
            charging.EPS)
        self.slack = params.detour_slack_m if params.detour_slack_m is not None else grid.cell_size_m / 2
        self.roi_idx = [grid.index(r) for r in scenario.rois]
        self.start = grid.index(scenario.start)
        self.all_cells = np.arange(grid.num_cells)
        self.hull = roi_hull(scenario) if params.use_hull_reduction else None
        self.space = self.hull.member_index if self.hull is not None else self.all_cells
        self.tau = PheromoneMatrix(grid, params.tau0)
        self.rng = random.Random(params.seed)
        self.finder = charging.StopFinder(scenario, self.slack)
        self.best: Solution | None = None
        # Lexicographic (max L, NC) best, tracked alongside for convergence curves.
        self.shortest: Solution | None = None
        self.iteration = 0
        self._scanned = 0
        self._stops = 0
        self._ref: tuple[float, int] | None = None
        self._waypoints: dict[tuple[int, Kind], Waypoint] = {}

    # -- move selection ---------------------------------------------------

    def _pick(self, weights, q0: float) -> int:
        """Index of the chosen entry: greedy with probability q0, else roulette."""
        n = len(weights)
        if q0 >= 1.0 or (q0 > 0.0 and self.rng.random() < q0):
            return max(range(n), key=weights.__getitem__)
        total = float(sum(weights))
        if not total > 0:
            return max(range(n), key=weights.__getitem__)
        x = self.rng.random() * total
        acc = 0.0
        for k in range(n):
            acc += weights[k]
            if acc > x:
                return k
        return n - 1

    def select_roi(self, current: int, r_visit: list[int]) -> int:
        """Next ROI by the tau^alpha / d^beta rule; ties go to insertion order."""
        p = self.params
        row = self.Dl[current]
        taus = self.tau.values(current, r_visit)
        w = [t ** p.alpha * row[j] ** -p.beta for t, j in zip(taus, r_visit)]
        return r_visit[self._pick(w, p.exploit_prob)]

    def charge_candidates(self, current: int, target: int, residual: float,
                          stations: dict[int, None]) -> np.ndarray:
        """Swap-cell candidates: the search space scanned for reachable cells on a short
        detour toward `target`, plus existing stations meeting the same test."""
        D, fc = self.D, self.fly_cost
        cand = charging.detour_candidates(D, current, target, residual, fc, self.space, self.slack)
        self._scanned += len(self.space)
        if stations:
            Dl = self.Dl
            direct = Dl[current][target]
            extra = [s for s in stations
                     if fc * Dl[current][s] <= residual - charging.EPS
                     and Dl[target][s] < direct - charging.EPS
                     and Dl[current][s] + Dl[target][s] <= direct + self.slack]
            if extra:
                cand = np.union1d(cand, extra)
        if len(cand) == 0 and self.hull is not None:
            cand = charging.detour_candidates(D, current, target, residual, fc, self.all_cells, self.slack)
            self._scanned += len(self.all_cells)
        if len(cand) == 0:
            cand = charging.progress_candidates(D, current, target, residual, fc, self.all_cells)
        return cand

    def select_charge(self, current: int, cand: np.ndarray, stations: dict[int, None]) -> int:
        """Swap cell by tau^alpha * d^beta (longer hops preferred), existing stations boosted."""
        p = self.params
        w = self.tau.row(current, cand) ** p.alpha * self.D[current, cand] ** p.beta
        if stations and p.station_reuse_bonus != 1.0:
            bonus = [p.station_reuse_bonus if c in stations else 1.0 for c in cand.tolist()]
            w = w * np.asarray(bonus)
        return int(cand[self._pick(w.tolist(), p.charge_exploit_prob)])

    # -- construction -------------------------------------------------------

    def _solution(self, paths: list[list[tuple[int, Kind]]], stations) -> Solution:
        Dl, cell, cache = self.Dl, self.grid.cell, self._waypoints
        wps = []
        longest = 0.0
        for p in paths:
            longest = max(longest, sum(Dl[a[0]][b[0]] for a, b in zip(p, p[1:])))
            row = []
            for key in p:
                w = cache.get(key)
                if w is None:
                    w = cache[key] = Waypoint(cell(key[0]), key[1])
                row.append(w)
            wps.append(tuple(row))
        st = frozenset(cell(i) for i in stations)
        return Solution(tuple(wps), st, longest, len(st))

    def construct(self) -> Solution:
        """Build one complete solution with all UAVs taking turns."""
        n_uav = self.scenario.num_uavs
        Dl, fc = self.Dl, self.fly_cost
        r_visit = [i for i in self.roi_idx if i != self.start]
        pos = [self.start] * n_uav
        energy = [self.e_max] * n_uav
        paths: list[list[tuple[int, Kind]]] = [[(self.start, Kind.START)] for _ in range(n_uav)]
        pending: list[int | None] = [None] * n_uav
        stations: dict[int, None] = {}
        cap = 50 * (len(self.roi_idx) + 1) * n_uav + int(self.grid.num_cells)
        stops = 0

        def advance(u: int, target: int) -> bool:
            """One move of UAV u toward target; True once it arrives."""
            nonlocal stops
            cur = pos[u]
            leg = fc * Dl[cur][target]
            if leg <= energy[u] - self.threshold:
                energy[u] -= leg
                pos[u] = target
                paths[u].append((target, Kind.ROI_VISIT))
                return True
            cand = self.charge_candidates(cur, target, energy[u], stations)
            if len(cand):
                c = self.select_charge(cur, cand, stations)
            elif energy[u] < self.e_max:
                c = cur
            else:
                raise InfeasibleError(f"UAV {u} stuck at cell {self.grid.cell(cur)} with a full battery")
            stops += 1
            if stops > cap:
                raise InfeasibleError("construction exceeded its charging-stop cap")
            pos[u] = c
            paths[u].append((c, Kind.RECHARGE))
            energy[u] = self.e_max
            stations.setdefault(c, None)
            if c in r_visit:
                r_visit.remove(c)
            return c == target

        while r_visit:
            for u in range(n_uav):
                if not r_visit:
                    break
                target = pending[u] if pending[u] in r_visit else self.select_roi(pos[u], r_visit)
                if advance(u, target):
                    pending[u] = None
                    if target in r_visit:
                        r_visit.remove(target)
                else:
                    pending[u] = target

        if self.scenario.return_to_start:
            for u in range(n_uav):
                while pos[u] != self.start:
                    advance(u, self.start)

        self._stops = stops
        return self._solution(paths, stations)

    # -- iteration ----------------------------------------------------------

    def rank(self, sol: Solution) -> tuple:
        """Sort key of a solution; smaller is better."""
        p = self.params
        if p.ranking == "weighted":
            return (weighted_cost(p.q1, p.q2, sol.max_path_len_m, sol.nc), sol.max_path_len_m, sol.nc)
        if p.ranking == "normalized":
            return (sol.max_path_len_m / self._ref[0] + sol.nc / self._ref[1], sol.max_path_len_m, sol.nc)
        return (sol.max_path_len_m, sol.nc)

    def step(self) -> IterationStats:
        """Construct, optionally 2-OPT, then evaporate and reinforce trails."""
        t0 = time.perf_counter()
        self._scanned = 0
        p = self.params
        sol = self.construct()
        if p.use_two_opt:
            sol = two_opt(sol, self.scenario, finder=self.finder)
        edges = used_edges(self.grid, sol)
        self.tau.evaporate(p.rho, edges)
        if edges:
            self.tau.reinforce(p.rho, edges, deposit_amount(p.q1, p.q2, sol.max_path_len_m, sol.nc))
        if self._ref is None:
            self._ref = (sol.max_path_len_m, max(sol.nc, 1))
        if self.best is None or self.rank(sol) < self.rank(self.best):
            self.best = sol
        if self.shortest is None or (sol.max_path_len_m, sol.nc) < (self.shortest.max_path_len_m, self.shortest.nc):
            self.shortest = sol
        self.iteration += 1
        return IterationStats(self.iteration, sol.max_path_len_m, sol.nc, self.best.max_path_len_m,
                              self.best.nc, self.shortest.max_path_len_m, self._stops, self._scanned, time.perf_counter() - t0)

    def run(self, iterations: int | None = None,
            callback: Callable[[IterationStats], None] | None = None) -> Solution:
        for _ in range(iterations if iterations is not None else self.params.max_iterations):
            stats = self.step()
            if callback is not None:
                callback(stats)
        return self.best


def solve(scenario: Scenario, params: SolverParams | None = None,
          callback: Callable[[IterationStats], None] | None = None) -> Solution:
    """Run max_iterations of the colony and return the best solution found."""
    return Colony(scenario, params or SolverParams()).run(callback=callback)
