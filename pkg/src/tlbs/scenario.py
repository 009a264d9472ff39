"""Problem instances: the gridded field, ROIs, UAV fleet and scenario generators."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

LAYOUTS = ("semi2", "semi4")


class CellIndex(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class Grid:
    rows: int = 20
    cols: int = 20
    cell_size_m: float = 1000.0

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.rows}x{self.cols}")
        if not self.cell_size_m > 0:
            raise ValueError(f"cell_size_m must be positive, got {self.cell_size_m}")

    @property
    def num_cells(self) -> int:
        return self.rows * self.cols

    @property
    def diagonal_m(self) -> float:
        return self.cell_size_m * math.sqrt(2.0)

    @property
    def width_m(self) -> float:
        return self.cols * self.cell_size_m

    @property
    def height_m(self) -> float:
        return self.rows * self.cell_size_m

    def contains(self, cell: Sequence[int]) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    def check(self, cell: Sequence[int]) -> CellIndex:
        if not self.contains(cell):
            raise ValueError(f"cell {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return CellIndex(int(cell[0]), int(cell[1]))

    def index(self, cell: Sequence[int]) -> int:
        """Row-major flat index."""
        r, c = cell
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise ValueError(f"cell {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return int(r) * self.cols + int(c)

    def cell(self, index: int) -> CellIndex:
        return CellIndex(*divmod(int(index), self.cols))

    def center(self, cell: Sequence[int]) -> tuple[float, float]:
        """Cell center as (x, y) meters; x grows with col, y with row."""
        r, c = self.check(cell)
        return ((c + 0.5) * self.cell_size_m, (r + 0.5) * self.cell_size_m)

    def cell_at(self, x: float, y: float) -> CellIndex | None:
        """Cell containing a continuous point, or None outside the field."""
        if not (0.0 <= x <= self.width_m and 0.0 <= y <= self.height_m):
            return None
        c = min(int(x // self.cell_size_m), self.cols - 1)
        r = min(int(y // self.cell_size_m), self.rows - 1)
        return CellIndex(r, c)

    @cached_property
    def centers(self) -> np.ndarray:
        """(num_cells, 2) array of centers in row-major order."""
        idx = np.arange(self.num_cells)
        rows, cols = np.divmod(idx, self.cols)
        return np.column_stack(((cols + 0.5) * self.cell_size_m, (rows + 0.5) * self.cell_size_m))

    @cached_property
    def distances(self) -> np.ndarray:
        """Dense center-to-center distance matrix over all cells."""
        p = self.centers
        return np.hypot(p[:, None, 0] - p[None, :, 0], p[:, None, 1] - p[None, :, 1])


def dist(grid: Grid, a: Sequence[int], b: Sequence[int]) -> float:
    """Euclidean distance between two cell centers in meters."""
    ax, ay = grid.center(a)
    bx, by = grid.center(b)
    return math.hypot(ax - bx, ay - by)


@dataclass(frozen=True)
class UavConfig:
    range_m: float = 5000.0
    v_max_mps: float = 10.0
    slot_len_s: float = 10.0
    altitude_m: float = 500.0
    cone_angle_rad: float = 2.0 * math.pi / 3.0
    fly_cost_per_m: float = 1.0

    def __post_init__(self):
        if not self.range_m > 0:
            raise ValueError("range_m must be positive")
        if not self.v_max_mps > 0 or not self.slot_len_s > 0:
            raise ValueError("v_max_mps and slot_len_s must be positive")
        if self.altitude_m < 0:
            raise ValueError("altitude_m must be non-negative")
        if not 0 < self.cone_angle_rad < math.pi:
            raise ValueError("cone_angle_rad must lie in (0, pi)")
        if not self.fly_cost_per_m > 0:
            raise ValueError("fly_cost_per_m must be positive")

    @property
    def e_max(self) -> float:
        """Full-battery energy; equals range_m at the default 1 unit per meter."""
        return self.range_m * self.fly_cost_per_m

    @property
    def slot_step_m(self) -> float:
        """Largest distance flyable in one time slot."""
        return self.v_max_mps * self.slot_len_s

    @property
    def sensing_radius_m(self) -> float:
        return self.altitude_m * math.tan(self.cone_angle_rad / 2.0)


def sensing_coverage(cfg: UavConfig) -> float:
    """Footprint area of the sensing cone, pi * (H tan(theta/2))^2."""
    theta = cfg.cone_angle_rad
    if not 0 < theta < math.pi:
        raise ValueError(f"cone angle {theta} outside (0, pi)")
    return math.pi * (cfg.altitude_m * math.tan(theta / 2.0)) ** 2


@dataclass(frozen=True)
class Scenario:
    grid: Grid
    rois: tuple[CellIndex, ...]
    start: CellIndex
    num_uavs: int = 1
    uav: UavConfig = field(default_factory=UavConfig)
    return_to_start: bool = False
    # Region decomposition tag ("semi2"/"semi4") for instances the exact oracle can split.
    layout: str | None = None

    def __post_init__(self):
        rois = tuple(self.grid.check(c) for c in self.rois)
        object.__setattr__(self, "rois", rois)
        object.__setattr__(self, "start", self.grid.check(self.start))
        if not rois:
            raise ValueError("scenario needs at least one ROI")
        if len(set(rois)) != len(rois):
            raise ValueError("ROIs must be distinct")
        if self.start not in rois:
            raise ValueError("start cell must be one of the ROIs")
        if self.num_uavs < 1:
            raise ValueError("num_uavs must be >= 1")
        if self.layout is not None and self.layout not in LAYOUTS:
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.uav.sensing_radius_m < self.grid.diagonal_m / 2.0:
            raise ValueError("sensing footprint does not cover a whole cell")

    @property
    def nr(self) -> int:
        return len(self.rois)

    def region_of(self, cell: Sequence[int]) -> int:
        """Region id of a cell under this scenario's layout (0 without one)."""
        r, c = cell
        if self.layout == "semi2":
            return int(r >= self.grid.rows / 2)
        if self.layout == "semi4":
            return 2 * int(r >= self.grid.rows / 2) + int(c >= self.grid.cols / 2)
        return 0

    def regions(self) -> list[list[CellIndex]]:
        """ROIs grouped by region, keeping insertion order inside each group."""
        n = {None: 1, "semi2": 2, "semi4": 4}[self.layout]
        groups: list[list[CellIndex]] = [[] for _ in range(n)]
        for roi in self.rois:
            groups[self.region_of(roi)].append(roi)
        return groups

    def to_dict(self) -> dict:
        d = {
            "grid": {"rows": self.grid.rows, "cols": self.grid.cols, "cell_size_m": self.grid.cell_size_m},
            "rois": [[r, c] for r, c in self.rois],
            "start": [self.start.row, self.start.col],
            "num_uavs": self.num_uavs,
            "uav": {
                "range_m": self.uav.range_m,
                "v_max_mps": self.uav.v_max_mps,
                "slot_len_s": self.uav.slot_len_s,
                "altitude_m": self.uav.altitude_m,
                "cone_angle_rad": self.uav.cone_angle_rad,
                "fly_cost_per_m": self.uav.fly_cost_per_m,
            },
        }
        if self.return_to_start:
            d["return_to_start"] = True
        if self.layout is not None:
            d["layout"] = self.layout
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        g = d["grid"]
        return cls(
            grid=Grid(int(g["rows"]), int(g["cols"]), float(g["cell_size_m"])),
            rois=tuple(CellIndex(int(r), int(c)) for r, c in d["rois"]),
            start=CellIndex(*map(int, d["start"])),
            num_uavs=int(d.get("num_uavs", 1)),
            uav=UavConfig(**{k: float(v) for k, v in d.get("uav", {}).items()}),
            return_to_start=bool(d.get("return_to_start", False)),
            layout=d.get("layout"),
        )


def generate_random(seed: int, grid: Grid | None = None, nr: int = 10, num_uavs: int = 1,
                    uav: UavConfig | None = None) -> Scenario:
    """Uniformly sample nr distinct ROI cells; the first one sampled is the start."""
    grid = grid or Grid()
    if not 1 <= nr <= grid.num_cells:
        raise ValueError(f"cannot place {nr} ROIs on {grid.num_cells} cells")
    rng = random.Random(seed)
    picks = rng.sample(range(grid.num_cells), nr)
    rois = tuple(grid.cell(i) for i in picks)
    return Scenario(grid, rois, rois[0], num_uavs, uav or UavConfig())


def generate_semi_random(seed: int, grid: Grid | None = None, num_uavs: int = 2,
                         uav: UavConfig | None = None, nr: int = 10) -> Scenario:
    """Decomposable multi-UAV instance.

    Two UAVs get nr/2 ROIs in the top half and nr/2 in the bottom half. Four UAVs
    get the ROIs spread over the NW/NE/SW/SE quadrants with every quadrant
    nonempty. All UAVs start at the first ROI of the first region.
    """
    grid = grid or Grid()
    if num_uavs not in (2, 4):
        raise ValueError(f"semi-random scenarios support 2 or 4 UAVs, got {num_uavs}")
    if nr < num_uavs:
        raise ValueError("need at least one ROI per region")
    rng = random.Random(seed)
    layout = "semi2" if num_uavs == 2 else "semi4"
    half_r, half_c = grid.rows / 2, grid.cols / 2

    def region(i: int) -> int:
        r, c = divmod(i, grid.cols)
        if layout == "semi2":
            return int(r >= half_r)
        return 2 * int(r >= half_r) + int(c >= half_c)

    pools: list[list[int]] = [[] for _ in range(num_uavs)]
    for i in range(grid.num_cells):
        pools[region(i)].append(i)

    base, extra = divmod(nr, num_uavs)
    counts = [base + 1] * extra + [base] * (num_uavs - extra)
    rng.shuffle(counts)
    rois: list[CellIndex] = []
    for pool, k in zip(pools, counts):
        if k > len(pool):
            raise ValueError("region too small for requested ROI count")
        rois.extend(grid.cell(i) for i in rng.sample(pool, k))
    return Scenario(grid, tuple(rois), rois[0], num_uavs, uav or UavConfig(), layout=layout)
