import pytest

from handlers.sygus_parser import load_problem
from models.solution import Provenance, Verdict
from models.solver_config import SolverConfig
from services.base_service import Budget
from services.cegis_service import CegisService, RefinementState, enumeration_context
from services.enumerator import next_candidate
from utils.evaluator import evaluate

REPAIR_FAILS = """
(set-logic LIA)
(synth-fun f ((x Int)) Int ((S Int) (C Int)) ((S Int ((+ x C))) (C Int ((Constant Int)))))
(declare-var x Int)
(constraint (= (f x) (* 2 x)))
"""


def _solve(problem, config, stats):
    service = CegisService(config, stats)
    return service.solve(problem, Budget.from_config(config))


def test_constant_repair(benchmark, config, stats):
    problem = benchmark("lia_constant_repair.sl")
    result = _solve(problem, config, stats)
    assert result.is_solved
    assert result.solution.provenance is Provenance.CONSTANT_REPAIR
    body = result.solution.body("f")
    for x in range(-50, 51):
        assert evaluate(body, {"x": x}) > x + 100
    assert stats["repair_rounds"] >= 1


def test_constant_window(benchmark, config, stats):
    result = _solve(benchmark("lia_constant_window.sl"), config, stats)
    assert result.is_solved
    assert 5 <= result.solution.body("g").value <= 7


def test_finite_grammar_without_solution_is_infeasible(benchmark, config, stats):
    result = _solve(benchmark("lia_infeasible.sl"), config, stats)
    assert result.verdict is Verdict.INFEASIBLE
    assert result.exit_code == 0


def test_enumerates_until_verified(config, stats):
    problem = load_problem("""
        (synth-fun f ((a Int)) Int ((S Int)) ((S Int (a 0 1 (+ S S)))))
        (declare-var a Int)
        (constraint (> (f a) a))""")
    result = _solve(problem, config, stats)
    assert result.is_solved
    assert str(result.solution.body("f")) in ("(+ a 1)", "(+ 1 a)")
    assert stats["counterexamples"] >= 1


def test_counterexamples_reject_before_verification(benchmark, config, stats):
    result = _solve(benchmark("lia_max2.sl"), SolverConfig(timeout_ms=30_000, max_size=8), stats)
    assert result.is_solved
    body = result.solution.body("max2")
    for x in range(-4, 5):
        for y in range(-4, 5):
            assert evaluate(body, {"x": x, "y": y}) == max(x, y)
    assert stats["fast_rejections"] >= 1


def test_repair_failure_is_proven(config, stats):
    problem = load_problem(REPAIR_FAILS)
    service = CegisService(config, stats)
    ctx = enumeration_context(problem, service)
    template = next_candidate(ctx)
    assert template.has_hole
    repaired, proven = service.repair_constants(problem, template, RefinementState())
    assert repaired is None and proven


def test_unrepairable_grammar_is_infeasible(config, stats):
    result = _solve(load_problem(REPAIR_FAILS), config, stats)
    assert result.verdict is Verdict.INFEASIBLE


def test_candidate_budget(benchmark, stats):
    config = SolverConfig(max_candidates=3)
    result = _solve(benchmark("lia_max2.sl"), config, stats)
    assert result.verdict is Verdict.UNKNOWN
    assert stats["candidates_enumerated"] <= 4


@pytest.mark.parametrize("name", ["bv_double.sl", "bv_xor.sl"])
def test_bitvector_problems(benchmark, config, stats, name):
    result = _solve(benchmark(name), config, stats)
    assert result.is_solved
