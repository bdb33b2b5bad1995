from handlers.sygus_parser import load_problem
from models.solution import Solution
from models.solver_config import SolverConfig
from models.term import INT, STRING, Lambda, mk_app, mk_bv, mk_int, mk_string, mk_var
from services.verifier import OutcomeKind, Verifier
from utils.evaluator import holds

x = mk_var("x", INT)


def test_valid_linear_candidate(benchmark, config, stats):
    problem = benchmark("lia_constant_repair.sl")
    outcome = Verifier(config, stats).check_candidate(problem, Solution({"f": mk_app("+", x, mk_int(101))}))
    assert outcome.is_valid and outcome.exact
    assert stats["verifier_calls"] == 1


def test_counterexample_refutes_candidate(benchmark, config, stats):
    problem = benchmark("lia_constant_repair.sl")
    outcome = Verifier(config, stats).check_candidate(problem, Solution({"f": x}))
    assert outcome.is_counterexample
    assert set(outcome.counterexample) == {"x"}
    assert not holds(problem.constraints[0], outcome.counterexample,
                     {"f": _identity(problem)})
    assert stats["counterexamples"] == 1


def _identity(problem):
    decl = problem.synth_fun
    return Lambda(decl.params, decl.params[0])


def test_counterexample_covers_every_universal_variable(benchmark, config):
    problem = benchmark("lia_max2.sl")
    outcome = Verifier(config).check_candidate(problem, Solution({"max2": mk_var("x", INT)}))
    assert outcome.is_counterexample
    assert set(outcome.counterexample) == {"x", "y"}
    cex = outcome.counterexample
    assert cex["y"] > cex["x"]


def test_closed_examples_are_evaluated(benchmark, config):
    problem = benchmark("pbe_first_word.sl")
    s = mk_var("x", STRING)
    first_word = mk_app("str.substr", s, mk_int(0),
                        mk_app("str.indexof", s, mk_string(" "), mk_int(0)))
    assert Verifier(config).check_candidate(problem, Solution({"f": first_word})).is_valid
    assert Verifier(config).check_candidate(problem, Solution({"f": s})).is_counterexample


def test_small_bitvectors_are_checked_exhaustively(benchmark, config):
    problem = benchmark("bv_double.sl")
    bv = mk_var("x", problem.synth_fun.return_sort)
    good = Solution({"f": mk_app("bvadd", bv, bv)})
    outcome = Verifier(config).check_candidate(problem, good)
    assert outcome.is_valid and outcome.exact
    bad = Solution({"f": mk_app("bvadd", bv, mk_bv(2, 8))})
    assert Verifier(config).check_candidate(problem, bad).is_counterexample


def test_bounded_tier_is_not_a_proof():
    problem_text = """
        (synth-fun f ((s String)) Int)
        (declare-var s String)
        (constraint (>= (f s) 0))"""
    problem = load_problem(problem_text)
    s = mk_var("s", STRING)
    candidate = Solution({"f": mk_app("str.len", s)})
    outcome = Verifier(SolverConfig(string_max_length=2)).check_candidate(problem, candidate)
    assert outcome.kind is OutcomeKind.UNKNOWN and not outcome.exact
    accepted = Verifier(SolverConfig(string_max_length=2, accept_bounded=True)).check_candidate(problem, candidate)
    assert accepted.is_valid and not accepted.exact
