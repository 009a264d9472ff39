"""Iterative calibration of the reinforcement constants Q1 and Q2."""
from __future__ import annotations

from dataclasses import dataclass

from ..aco import SolverParams, solve
from ..energy_sim import Solution
from ..scenario import Scenario


@dataclass(frozen=True)
class TuningRound:
    q1: float
    q2: float
    max_len_m: float
    nc: int


def tune_parameters(scenario: Scenario, initial_q1: float = 1.0, initial_q2: float = 1.0,
                    warmup_iters: int = 1000, rounds: int = 2,
                    params: SolverParams | None = None,
                    history: list[TuningRound] | None = None) -> tuple[float, float]:
    """Short warm-up runs that set Q1 to the best max path length and Q2 to its NC.

    After each round the deposit Q1/maxL + Q2/NC evaluated on the warm-up
    solution is 2 (1 when NC = 0, where Q2 becomes 0), the same order as tau0.
    Each round reuses the seed of `params` so only the constants change.
    """
    if warmup_iters < 1:
        raise ValueError("warmup_iters must be >= 1")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    base = params or SolverParams()
    q1, q2 = float(initial_q1), float(initial_q2)
    for _ in range(rounds):
        sol: Solution = solve(scenario, base.replace(q1=q1, q2=q2, max_iterations=warmup_iters))
        q1, q2 = sol.max_path_len_m, float(sol.nc)
        if history is not None:
            history.append(TuningRound(q1, q2, sol.max_path_len_m, sol.nc))
    return q1, q2
