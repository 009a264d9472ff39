"""Solution representation, per-slot energy bookkeeping and constraint validation.

Constraint ids in reports:

    C3  a UAV occupies exactly one grid cell in every slot
    C4  every ROI is covered by some UAV by t_finish
    C5  0 < energy <= E_MAX in every slot
    C6  per-slot movement <= slot_len * v_max
    C7  a landed UAV sits on a charging-station cell
    C8  energy evolves by the flying/landed battery rule
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .scenario import CellIndex, Grid, Scenario, UavConfig


class EnergyDepletedError(ValueError):
    pass


class Kind(str, Enum):
    START = "START"
    ROI_VISIT = "ROI_VISIT"
    RECHARGE = "RECHARGE"


class Mode(str, Enum):
    FLYING = "FLYING"
    RECHARGING = "RECHARGING"


@dataclass(frozen=True)
class Waypoint:
    cell: CellIndex
    kind: Kind

    def to_dict(self) -> dict:
        return {"cell": [self.cell.row, self.cell.col], "kind": self.kind.value}

    @classmethod
    def from_dict(cls, d: dict) -> Waypoint:
        return cls(CellIndex(*map(int, d["cell"])), Kind(d["kind"]))


@dataclass
class UavState:
    position_m: tuple[float, float]
    energy: float
    mode: Mode = Mode.FLYING


def path_length(grid: Grid, path: Sequence[Waypoint]) -> float:
    """Polyline length through waypoint cell centers."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        ax, ay = grid.center(a.cell)
        bx, by = grid.center(b.cell)
        total += math.hypot(ax - bx, ay - by)
    return total


@dataclass(frozen=True)
class Solution:
    paths: tuple[tuple[Waypoint, ...], ...]
    stations: frozenset[CellIndex]
    max_path_len_m: float
    nc: int

    def __post_init__(self):
        if self.nc != len(self.stations):
            raise ValueError(f"nc={self.nc} but {len(self.stations)} stations listed")

    @classmethod
    def build(cls, grid: Grid, paths: Iterable[Sequence[Waypoint]],
              stations: Iterable[Sequence[int]] | None = None) -> Solution:
        """Assemble a solution, deriving lengths and, if omitted, the station set."""
        paths = tuple(tuple(p) for p in paths)
        if stations is None:
            stations = {w.cell for p in paths for w in p if w.kind is Kind.RECHARGE}
        st = frozenset(CellIndex(*s) for s in stations)
        lengths = [path_length(grid, p) for p in paths]
        return cls(paths, st, max(lengths, default=0.0), len(st))

    def path_lengths(self, grid: Grid) -> list[float]:
        return [path_length(grid, p) for p in self.paths]

    def sorted_stations(self) -> list[CellIndex]:
        return sorted(self.stations)

    def to_dict(self) -> dict:
        return {
            "paths": [[w.to_dict() for w in p] for p in self.paths],
            "stations": [[r, c] for r, c in self.sorted_stations()],
            "max_path_len_m": self.max_path_len_m,
            "nc": self.nc,
        }

    @classmethod
    def from_dict(cls, d: dict, grid: Grid | None = None) -> Solution:
        paths = tuple(tuple(Waypoint.from_dict(w) for w in p) for p in d["paths"])
        stations = frozenset(CellIndex(int(r), int(c)) for r, c in d["stations"])
        sol = cls(paths, stations, float(d["max_path_len_m"]), int(d["nc"]))
        if grid is not None:
            actual = max((path_length(grid, p) for p in paths), default=0.0)
            if not math.isclose(actual, sol.max_path_len_m, rel_tol=1e-9, abs_tol=1e-6):
                raise ValueError(f"max_path_len_m={sol.max_path_len_m} disagrees with paths ({actual})")
        return sol


def step_energy(prev_energy: float, flying: bool, dist_this_slot_m: float, cfg: UavConfig,
                hover_drain: float = 0.0) -> float:
    """Advance residual energy by one slot.

    Flying drains fly_cost_per_m per meter (plus an optional constant per-slot
    hover drain); landing on a station swaps the battery back to E_MAX.
    """
    if dist_this_slot_m < 0:
        raise ValueError("distance flown must be non-negative")
    if not flying:
        return cfg.e_max
    energy = prev_energy - cfg.fly_cost_per_m * dist_this_slot_m - hover_drain
    if energy <= 0:
        raise EnergyDepletedError(f"energy depleted: {prev_energy} -> {energy}")
    return energy


@dataclass(frozen=True)
class Violation:
    constraint: str
    uav: int
    slot: int
    message: str

    def to_dict(self) -> dict:
        return {"constraint": self.constraint, "uav": self.uav, "slot": self.slot, "message": self.message}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    t_finish_slots: int = 0
    slots_per_uav: list[int] = field(default_factory=list)
    min_energy: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def first(self, constraint: str) -> Violation | None:
        return next((v for v in self.violations if v.constraint == constraint), None)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "t_finish_slots": self.t_finish_slots,
            "slots_per_uav": self.slots_per_uav,
            "min_energy": self.min_energy,
            "violations": [v.to_dict() for v in self.violations],
        }


_TOL = 1e-9


def simulate(scenario: Scenario, solution: Solution, hover_drain: float = 0.0) -> ValidationReport:
    """Fly every path slot by slot and check the model constraints.

    Each leg between consecutive waypoints is split into the fewest equal slots
    that respect the speed bound, so UAVs are exactly over a waypoint at the end
    of a slot. A RECHARGE waypoint adds one landed slot. The cell attributed to
    a slot is the one containing the UAV at the slot's end.
    """
    grid, cfg = scenario.grid, scenario.uav
    step = cfg.slot_step_m
    e_max = cfg.e_max
    report = ValidationReport()
    covered: dict[CellIndex, int] = {}
    roi_set = set(scenario.rois)

    for u, path in enumerate(solution.paths):
        for w in path:
            grid.check(w.cell)
            if w.kind is Kind.ROI_VISIT and w.cell not in roi_set:
                raise ValueError(f"UAV {u}: ROI_VISIT at non-ROI cell {tuple(w.cell)}")
        if not path or path[0].cell != scenario.start:
            raise ValueError(f"UAV {u}: path must begin at the start cell {tuple(scenario.start)}")
        if any(w.kind is Kind.START for w in path[1:]):
            raise ValueError(f"UAV {u}: START waypoint only allowed first")

        t = 0
        energy = e_max
        lowest = energy
        if scenario.start in roi_set:
            covered.setdefault(scenario.start, 0)
        crashed = False
        for a, b in zip(path, path[1:]):
            ax, ay = grid.center(a.cell)
            bx, by = grid.center(b.cell)
            leg = math.hypot(bx - ax, by - ay)
            n = math.ceil(leg / step - _TOL) if leg > 0 else 0
            for k in range(1, n + 1):
                t += 1
                moved = leg / n
                if moved > step * (1 + _TOL):
                    report.violations.append(Violation("C6", u, t, f"moved {moved:.3f} m > {step:.3f} m"))
                f = k / n
                cell = grid.cell_at(ax + (bx - ax) * f, ay + (by - ay) * f)
                if cell is None:
                    report.violations.append(Violation("C3", u, t, "position outside the grid"))
                elif cell in roi_set and cell not in covered:
                    covered[cell] = t
                expected = energy - cfg.fly_cost_per_m * moved - hover_drain
                try:
                    new_energy = step_energy(energy, True, moved, cfg, hover_drain)
                except EnergyDepletedError as exc:
                    report.violations.append(Violation("C5", u, t, str(exc)))
                    crashed = True
                    break
                if not math.isclose(new_energy, expected, rel_tol=1e-12, abs_tol=1e-9):
                    report.violations.append(Violation("C8", u, t, "flight drain mismatch"))
                if new_energy > e_max * (1 + _TOL):
                    report.violations.append(Violation("C5", u, t, f"energy {new_energy} above E_MAX"))
                energy = new_energy
                lowest = min(lowest, energy)
            if crashed:
                break
            if b.kind is Kind.RECHARGE:
                t += 1
                if b.cell not in solution.stations:
                    report.violations.append(
                        Violation("C7", u, t, f"landed at {tuple(b.cell)} without a charging station"))
                energy = step_energy(energy, False, 0.0, cfg)
                if energy != e_max:
                    report.violations.append(Violation("C8", u, t, "battery swap did not restore E_MAX"))
        report.slots_per_uav.append(t)
        report.min_energy.append(lowest)

    missing = [r for r in scenario.rois if r not in covered]
    for r in missing:
        report.violations.append(Violation("C4", -1, -1, f"ROI {tuple(r)} never covered"))
    if missing:
        report.t_finish_slots = max(report.slots_per_uav, default=0)
    else:
        report.t_finish_slots = max(covered.values(), default=0)
    return report
