import pytest

from tlbs.aco import SolverParams, deposit_amount, solve
from tlbs.enhancements.tuning import TuningRound, tune_parameters
from tlbs.scenario import Grid, Scenario, generate_random

GRID = Grid()
FAST = SolverParams(max_iterations=30, seed=4)


def test_one_round_sets_constants_to_warmup_result():
    sc = generate_random(4)
    warm = solve(sc, FAST.replace(q1=1.0, q2=1.0))
    q1, q2 = tune_parameters(sc, 1.0, 1.0, warmup_iters=30, rounds=1, params=FAST)
    assert q1 == warm.max_path_len_m
    assert q2 == float(warm.nc)
    # the deposit on the warm-up solution is normalized to about 2
    assert deposit_amount(q1, q2, warm.max_path_len_m, warm.nc) == pytest.approx(2.0)


def test_zero_stations_gives_zero_q2():
    sc = Scenario(GRID, ((0, 0), (0, 2), (2, 2)), (0, 0))
    history: list[TuningRound] = []
    q1, q2 = tune_parameters(sc, warmup_iters=10, rounds=2, params=FAST, history=history)
    assert q2 == 0.0
    assert q1 == pytest.approx(4000.0)
    assert len(history) == 2
    assert deposit_amount(q1, q2, 4000.0, 0) == pytest.approx(1.0)


def test_rounds_chain():
    sc = generate_random(7)
    history: list[TuningRound] = []
    q1, q2 = tune_parameters(sc, warmup_iters=20, rounds=2, params=FAST, history=history)
    second = solve(sc, FAST.replace(q1=history[0].q1, q2=history[0].q2, max_iterations=20))
    assert (q1, q2) == (second.max_path_len_m, float(second.nc))


@pytest.mark.parametrize("kw", [{"warmup_iters": 0}, {"rounds": 0}])
def test_rejects_bad_arguments(kw):
    with pytest.raises(ValueError):
        tune_parameters(generate_random(0), params=FAST, **kw)
