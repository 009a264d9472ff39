"""Command-line entry point: gen, solve, oracle, validate, bench."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .aco import InfeasibleError, SolverParams, solve
from .bench import ExperimentConfig, ScenarioKind, rows_to_csv, run_gap_experiment
from .energy_sim import Solution, simulate
from .enhancements.tuning import tune_parameters
from .oracle import DEFAULT_CAP, OracleRefusal, oracle_solve
from .render import RenderSpec, render_svg
from .scenario import Scenario, generate_random, generate_semi_random

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_FAIL):
        super().__init__(message)
        self.code = code


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over the target."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}") from e
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_json(path: str | Path, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2) + "\n")


def read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"cannot read {path}: {e}") from e


def load_scenario(path: str) -> Scenario:
    try:
        return Scenario.from_dict(read_json(path))
    except (KeyError, TypeError, ValueError) as e:
        raise CliError(f"invalid scenario {path}: {e}") from e


def load_params(path: str | None) -> SolverParams:
    if path is None:
        return SolverParams()
    try:
        return SolverParams.load(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}") from e
    except (TypeError, ValueError) as e:
        raise CliError(f"invalid params {path}: {e}") from e


# -- commands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.kind == "random1":
        sc = generate_random(args.seed, nr=args.nr)
    else:
        sc = generate_semi_random(args.seed, num_uavs=2 if args.kind == "semi2" else 4, nr=args.nr)
    write_json(args.out, sc.to_dict())
    return EXIT_OK


def cmd_solve(args) -> int:
    sc = load_scenario(args.scenario)
    params = load_params(args.params)
    if args.iters is not None:
        params = params.replace(max_iterations=args.iters)
    if args.seed is not None:
        params = params.replace(seed=args.seed)
    if args.tune:
        q1, q2 = tune_parameters(sc, params.q1, params.q2, args.tune_warmup, args.tune, params)
        params = params.replace(q1=q1, q2=q2)
    try:
        sol = solve(sc, params)
    except InfeasibleError as e:
        raise CliError(f"infeasible: {e}") from e
    write_json(args.out, sol.to_dict())
    if args.svg:
        write_atomic(args.svg, render_svg(sc, sol, RenderSpec(show_hull=not args.no_hull_outline)))
    print(f"max_len_m={sol.max_path_len_m:.3f} nc={sol.nc} iters={params.max_iterations}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    sc = load_scenario(args.scenario)
    try:
        res = oracle_solve(sc, cap=args.cap, closed=True if args.closed_tour else None)
    except OracleRefusal as e:
        raise CliError(f"oracle refused: {e}", EXIT_REFUSED) from e
    write_json(args.out, res.to_dict(sc.grid))
    print(f"max_len_m={res.max_path_len_m:.3f} nc={res.nc} regions={len(res.regions)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    try:
        sol = Solution.from_dict(read_json(args.solution))
        report = simulate(sc, sol)
    except (KeyError, TypeError, ValueError) as e:
        raise CliError(f"invalid solution {args.solution}: {e}") from e
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_bench(args) -> int:
    params = load_params(args.params)
    if args.iters is not None:
        params = params.replace(max_iterations=args.iters)
    cfg = ExperimentConfig(ScenarioKind(args.kind), args.seeds, params, hull=not args.no_hull,
                           tuning=not args.no_tuning, two_opt=not args.no_two_opt,
                           first_seed=args.first_seed, tuning_warmup=args.tune_warmup)
    try:
        stats, rows = run_gap_experiment(cfg)
    except OracleRefusal as e:
        raise CliError(f"oracle refused: {e}", EXIT_REFUSED) from e
    out = Path(args.out)
    write_atomic(out, rows_to_csv(rows))
    stats_path = args.stats or str(out.with_suffix(".stats.json"))
    write_json(stats_path, stats.to_dict())
    print(" ".join(f"{k}={v:.4f}" for k, v in stats.to_dict().items()))
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlbs", description="UAV trajectories and battery-swap station placement.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a scenario JSON")
    g.add_argument("--kind", required=True, choices=["random1", "semi2", "semi4"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nr", type=int, default=10, help="number of ROIs")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run the ant-colony solver")
    s.add_argument("--scenario", required=True)
    s.add_argument("--params", help="SolverParams as JSON or TOML")
    s.add_argument("--out", required=True)
    s.add_argument("--svg")
    s.add_argument("--iters", type=int, help="override max_iterations")
    s.add_argument("--seed", type=int, help="override the RNG seed")
    s.add_argument("--tune", type=int, default=0, metavar="ROUNDS", help="Q1/Q2 tuning rounds before solving")
    s.add_argument("--tune-warmup", type=int, default=1000)
    s.add_argument("--no-hull-outline", action="store_true", help="omit the ROI hull from the SVG")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact brute-force solution")
    o.add_argument("--scenario", required=True)
    o.add_argument("--out", required=True)
    o.add_argument("--cap", type=int, default=DEFAULT_CAP)
    o.add_argument("--closed-tour", action="store_true", help="force a return to the start")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("validate", help="check a solution against every constraint")
    v.add_argument("--scenario", required=True)
    v.add_argument("--solution", required=True)
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="gap experiment against the oracle")
    b.add_argument("--kind", required=True, choices=[k.value for k in ScenarioKind])
    b.add_argument("--seeds", type=int, default=20)
    b.add_argument("--first-seed", type=int, default=0)
    b.add_argument("--params")
    b.add_argument("--iters", type=int)
    b.add_argument("--tune-warmup", type=int, default=1000)
    b.add_argument("--no-hull", action="store_true")
    b.add_argument("--no-tuning", action="store_true")
    b.add_argument("--no-two-opt", action="store_true")
    b.add_argument("--out", required=True, help="per-seed CSV")
    b.add_argument("--stats", help="stats JSON (default: <out>.stats.json)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"tlbs: {e}", file=sys.stderr)
        return e.code
    except ValueError as e:
        print(f"tlbs: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"tlbs: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
