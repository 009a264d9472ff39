"""Experiment harness: gaps against the exact oracle, iteration sweeps and timing."""
from __future__ import annotations

import csv
import enum
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .aco import Colony, IterationStats, SolverParams
from .energy_sim import Solution
from .enhancements.tuning import tune_parameters
from .oracle import OracleResult, oracle_solve
from .scenario import Scenario, generate_random, generate_semi_random

CSV_COLUMNS = ("seed", "scenario_kind", "ubat_len_m", "oracle_len_m", "len_gap_pct",
               "ubat_nc", "oracle_nc", "nc_gap_pct", "iters", "wall_s")


class ScenarioKind(enum.Enum):
    RANDOM_1UAV = "random1"
    SEMI_2UAV = "semi2"
    SEMI_4UAV = "semi4"

    def make(self, seed: int) -> Scenario:
        if self is ScenarioKind.RANDOM_1UAV:
            return generate_random(seed)
        return generate_semi_random(seed, num_uavs=2 if self is ScenarioKind.SEMI_2UAV else 4)


def worker_count(jobs: int) -> int:
    """Parallel workers for `jobs` tasks, capped by TLBS_THREADS when set."""
    cap = os.environ.get("TLBS_THREADS")
    n = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, jobs))


@dataclass
class ExperimentConfig:
    scenario_kind: ScenarioKind = ScenarioKind.RANDOM_1UAV
    num_seeds: int = 20
    params: SolverParams = field(default_factory=SolverParams)
    # Ablation switches; tuning runs tune_parameters before every solve.
    hull: bool = True
    tuning: bool = True
    two_opt: bool = True
    first_seed: int = 0
    tuning_warmup: int = 1000
    tuning_rounds: int = 2

    def __post_init__(self):
        if self.num_seeds < 1:
            raise ValueError("num_seeds must be >= 1")

    @property
    def seeds(self) -> range:
        return range(self.first_seed, self.first_seed + self.num_seeds)

    def solver_params(self, seed: int) -> SolverParams:
        return self.params.replace(seed=seed, use_hull_reduction=self.hull, use_two_opt=self.two_opt)


@dataclass(frozen=True)
class GapRow:
    seed: int
    scenario_kind: str
    ubat_len_m: float
    oracle_len_m: float
    len_gap_pct: float
    ubat_nc: int
    oracle_nc: int
    nc_gap_pct: float | None
    iters: int
    wall_s: float

    def as_csv(self) -> dict:
        d = asdict(self)
        d["nc_gap_pct"] = "" if self.nc_gap_pct is None else self.nc_gap_pct
        return d


@dataclass(frozen=True)
class GapStats:
    mean_len_gap_pct: float
    stdev_len_gap_pct: float
    mean_nc_gap_pct: float
    stdev_nc_gap_pct: float
    mean_extra_len_m: float
    mean_extra_nc: float

    def to_dict(self) -> dict:
        return asdict(self)


def gap_row(seed: int, kind: str, sol: Solution, oracle: OracleResult, iters: int, wall_s: float) -> GapRow:
    o_len, o_nc = oracle.max_path_len_m, oracle.nc
    len_gap = 0.0 if o_len == 0 else (sol.max_path_len_m - o_len) / o_len * 100.0
    # a zero oracle NC has no percentage; the absolute extra count still goes into the stats
    nc_gap = (sol.nc - o_nc) / o_nc * 100.0 if o_nc > 0 else None
    return GapRow(seed, kind, sol.max_path_len_m, o_len, len_gap, sol.nc, o_nc, nc_gap, iters, wall_s)


def _stdev(xs: Sequence[float]) -> float:
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def aggregate(rows: Sequence[GapRow]) -> GapStats:
    if not rows:
        raise ValueError("no rows to aggregate")
    rows = sorted(rows, key=lambda r: r.seed)
    len_gaps = [r.len_gap_pct for r in rows]
    nc_gaps = [r.nc_gap_pct for r in rows if r.nc_gap_pct is not None]
    return GapStats(
        mean_len_gap_pct=statistics.fmean(len_gaps),
        stdev_len_gap_pct=_stdev(len_gaps),
        mean_nc_gap_pct=statistics.fmean(nc_gaps) if nc_gaps else 0.0,
        stdev_nc_gap_pct=_stdev(nc_gaps),
        mean_extra_len_m=statistics.fmean(r.ubat_len_m - r.oracle_len_m for r in rows),
        mean_extra_nc=statistics.fmean(r.ubat_nc - r.oracle_nc for r in rows),
    )


def tuned_params(scenario: Scenario, cfg: ExperimentConfig, params: SolverParams) -> SolverParams:
    if not cfg.tuning:
        return params
    q1, q2 = tune_parameters(scenario, params.q1, params.q2, cfg.tuning_warmup, cfg.tuning_rounds, params)
    return params.replace(q1=q1, q2=q2)


def run_seed(cfg: ExperimentConfig, seed: int) -> GapRow:
    scenario = cfg.scenario_kind.make(seed)
    oracle = oracle_solve(scenario)
    t0 = time.perf_counter()
    params = tuned_params(scenario, cfg, cfg.solver_params(seed))
    sol = Colony(scenario, params).run()
    return gap_row(seed, cfg.scenario_kind.value, sol, oracle, params.max_iterations, time.perf_counter() - t0)


def _run_seed_args(args) -> GapRow:
    return run_seed(*args)


def run_gap_experiment(cfg: ExperimentConfig, workers: int | None = None) -> tuple[GapStats, list[GapRow]]:
    """Solve every seed, compare against the oracle and aggregate. Rows come back sorted by seed."""
    jobs = [(cfg, s) for s in cfg.seeds]
    n = workers or worker_count(len(jobs))
    if n == 1:
        rows = [run_seed(c, s) for c, s in jobs]
    else:
        with ProcessPoolExecutor(n) as pool:
            rows = list(pool.map(_run_seed_args, jobs))
    rows.sort(key=lambda r: r.seed)
    return aggregate(rows), rows


def rows_to_csv(rows: Sequence[GapRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_csv())
    return buf.getvalue()


def write_rows(path: str | Path, rows: Sequence[GapRow]) -> None:
    Path(path).write_text(rows_to_csv(rows))


def run_iteration_sweep(scenario: Scenario, params: SolverParams, checkpoints: Sequence[int]
                        ) -> list[tuple[int, float, int]]:
    """Shortest-so-far (iteration, max length, NC) at each checkpoint of one continuous run.

    Uses the colony's lexicographic (length, NC) record rather than its ranked
    best, so the curve never goes up.
    """
    cps = list(checkpoints)
    if any(b < a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be sorted ascending")
    if cps and cps[0] < 1:
        raise ValueError("checkpoints must be >= 1")
    colony = Colony(scenario, params)
    curve = []
    for cp in cps:
        colony.run(cp - colony.iteration)
        curve.append((cp, colony.shortest.max_path_len_m, colony.shortest.nc))
    return curve


@dataclass(frozen=True)
class TimingResult:
    samples_s: np.ndarray
    candidates_scanned: tuple[int, ...]
    iterations: int

    @property
    def mean_s(self) -> float:
        return float(self.samples_s.mean())

    def cdf(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted durations and their cumulative fractions."""
        x = np.sort(self.samples_s)
        return x, np.arange(1, len(x) + 1) / len(x)


WARMUP = 5


def run_timing_cdf(scenario: Scenario, params: SolverParams, iters: int, hull_on: bool) -> TimingResult:
    """Per-iteration wall time over `iters` iterations after a 5-iteration warm-up."""
    if iters < 30:
        raise ValueError("iters must be >= 30")
    colony = Colony(scenario, params.replace(use_hull_reduction=hull_on))
    stats: list[IterationStats] = []
    colony.run(WARMUP)
    colony.run(iters, stats.append)
    return TimingResult(np.array([s.seconds for s in stats]),
                        tuple(s.candidates_scanned for s in stats), len(stats))


def compare_hull_timing(scenarios: Sequence[Scenario], params: SolverParams, iters: int,
                        blocks: int = 5) -> dict:
    """Mean per-iteration time with and without hull filtering.

    The two colonies of each scenario advance in alternating blocks, so slow
    drifts in machine load hit both sides alike.
    """
    if iters < 30:
        raise ValueError("iters must be >= 30")
    on: list[float] = []
    off: list[float] = []
    for sc in scenarios:
        pair = {True: Colony(sc, params.replace(use_hull_reduction=True)),
                False: Colony(sc, params.replace(use_hull_reduction=False))}
        for c in pair.values():
            c.run(WARMUP)
        per_block = math.ceil(iters / blocks)
        done = 0
        while done < iters:
            n = min(per_block, iters - done)
            for flag, sink in ((True, on), (False, off)):
                pair[flag].run(n, lambda s, sink=sink: sink.append(s.seconds))
            done += n
    mean_on, mean_off = statistics.fmean(on), statistics.fmean(off)
    return {"mean_on_s": mean_on, "mean_off_s": mean_off,
            "reduction_pct": (mean_off - mean_on) / mean_off * 100.0,
            "samples": len(on)}
