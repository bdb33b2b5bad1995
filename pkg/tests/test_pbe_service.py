import pytest

from handlers.sygus_parser import load_problem
from models.solution import Provenance, Verdict
from models.solver_config import SolverConfig
from services.base_service import Budget
from services.cegis_service import problem_grammar
from services.pbe_service import (NotPBE, PBEInstance, PbeService, UnificationLearner, information_gain,
                                  is_pbe)
from utils.evaluator import evaluate


def _examples_hold(problem, result):
    decl = problem.synth_fun
    body = result.solution.body(decl.name)
    for inputs, output in is_pbe(problem).examples:
        env = {p.name: v for p, v in zip(decl.params, inputs)}
        assert evaluate(body, env) == output


def test_recognizes_examples(benchmark):
    instance = is_pbe(benchmark("pbe_first_word.sl"))
    assert isinstance(instance, PBEInstance)
    assert instance.outputs() == ["John", "Ada", "Alan", "Grace"]
    assert instance.points(benchmark("pbe_first_word.sl").synth_fun.params)[1] == {"x": "Ada Lovelace"}
    assert not instance.contradictory


def test_boolean_examples(benchmark):
    instance = is_pbe(benchmark("pbe_threshold.sl"))
    assert instance.examples == [((7,), True), ((9,), True), ((2,), False), ((5,), False)]


def test_examples_inside_conjunctions():
    problem = load_problem("(synth-fun f ((x Int)) Int) (constraint (and (= (f 1) 2) (= 4 (f 3))))")
    assert is_pbe(problem).examples == [((1,), 2), ((3,), 4)]


@pytest.mark.parametrize("name", ["lia_max2.sl", "inv_counter.sl"])
def test_universal_constraints_are_not_examples(benchmark, name):
    assert isinstance(is_pbe(benchmark(name)), NotPBE)


def test_contradictory_examples(benchmark, config, stats):
    problem = benchmark("pbe_contradictory.sl")
    assert is_pbe(problem).contradictory
    result = PbeService(config, stats).solve(problem, Budget.from_config(config))
    assert result.verdict is Verdict.INFEASIBLE


def test_information_gain():
    labels = [True, True, False, False]
    assert information_gain(labels, [True, True, False, False]) == pytest.approx(1.0)
    assert information_gain(labels, [True, False, True, False]) == pytest.approx(0.0)
    assert 0 < information_gain(labels, [True, True, True, False]) < 1


def test_decision_tree_for_absolute_value(benchmark, config, stats):
    problem = benchmark("pbe_abs.sl")
    result = PbeService(config, stats).solve(problem, Budget.from_config(config))
    assert result.is_solved
    assert result.solution.provenance is Provenance.PBE_UNIFICATION
    assert result.solution.body("f").op == "ite"
    _examples_hold(problem, result)
    assert stats["pool_terms"] > 0


def test_boolean_target_without_ite(benchmark, config, stats):
    problem = benchmark("pbe_threshold.sl")
    result = PbeService(config, stats).solve(problem, Budget.from_config(config))
    assert result.is_solved
    _examples_hold(problem, result)


def test_concatenation(benchmark, config, stats):
    problem = benchmark("pbe_greeting.sl")
    result = PbeService(config, stats).solve(problem, Budget.from_config(config))
    assert result.is_solved
    assert str(result.solution.body("greet")) == '(str.++ "Hello " name)'


def test_learner_combines_pools(benchmark, stats):
    problem = benchmark("pbe_abs.sl")
    instance = is_pbe(problem)
    points = instance.points(problem.synth_fun.params)
    learner = UnificationLearner(problem_grammar(problem), points, SolverConfig(pool_chunk=50), stats,
                                 observational=True)
    assert learner.ite is not None and learner.conditions is not None
    term = learner.learn(list(enumerate(instance.outputs())))
    assert term is not None and learner.satisfies(term, list(enumerate(instance.outputs())))


@pytest.mark.slow
@pytest.mark.parametrize("name", ["pbe_first_word.sl", "pbe_initial.sl"])
def test_string_programs(benchmark, config, stats, name):
    problem = benchmark(name)
    result = PbeService(config, stats).solve(problem, Budget.from_config(config))
    assert result.is_solved
    _examples_hold(problem, result)
