"""
End-to-end runs over the benchmark corpus
"""

import random
from pathlib import Path

import pytest

from handlers.solution_printer import format_define_fun, print_solution
from handlers.stats_handler import SolverStats
from handlers.sygus_parser import parse_sygus
from models.solution import Verdict
from services.strategy_dispatcher import Strategy, StrategyDispatcher
from services.verifier import Verifier
from utils.evaluator import evaluate
from utils.sampling import alphabet_for, random_value

BENCHMARKS = Path(__file__).resolve().parent.parent / "benchmarks"
INFEASIBLE = {"lia_infeasible.sl", "pbe_contradictory.sl"}
CORPUS = sorted(path.name for path in BENCHMARKS.glob("*.sl"))


@pytest.mark.slow
@pytest.mark.parametrize("name", CORPUS)
def test_benchmark_verdict(benchmark, config, name):
    problem = benchmark(name)
    result = StrategyDispatcher(config, SolverStats()).dispatch(problem, Strategy.AUTO)
    if name in INFEASIBLE:
        assert result.verdict is Verdict.INFEASIBLE
        return
    assert result.is_solved, result.reason
    outcome = Verifier(config).check_candidate(problem, result.solution)
    assert outcome.is_valid and outcome.exact
    _assert_printed_solution_parses_back(problem, result.solution, config)


def _assert_printed_solution_parses_back(problem, solution, config):
    decl = problem.synth_fun
    body = solution.body(decl.name)
    printed = format_define_fun(decl, body)
    reparsed = parse_sygus(f"{printed} (synth-fun unused_fn ((y Int)) Int)").defined(decl.name)
    rng = random.Random(config.seed)
    alphabet = alphabet_for(problem.string_alphabet())
    for _ in range(100):
        env = {p.name: random_value(p.sort, rng, config, alphabet) for p in decl.params}
        assert evaluate(reparsed.body, env) == evaluate(body, env), (printed, env)


@pytest.mark.slow
@pytest.mark.parametrize("name, strategy", [
    ("lia_max2.sl", Strategy.AUTO),
    ("lia_max2.sl", Strategy.FAST),
    ("pbe_abs.sl", Strategy.UNIF),
    ("inv_two_counters.sl", Strategy.UNIF),
])
def test_runs_are_deterministic(benchmark, config, name, strategy):
    problem = benchmark(name)
    outputs = {print_solution(problem, StrategyDispatcher(config, SolverStats()).dispatch(problem, strategy))
               for _ in range(2)}
    assert len(outputs) == 1
