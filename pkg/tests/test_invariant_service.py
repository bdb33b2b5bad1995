import itertools

import pytest

from handlers.sygus_parser import load_problem
from models.solution import Provenance, Verdict
from models.term import INT, TRUE, mk_app, mk_int, mk_var
from services.base_service import Budget
from services.invariant_service import (InvariantService, LemmaKind, PointLabels, RefinementLemma,
                                        classify_counterexample, invariant_problem, strengthen_post)
from utils.evaluator import holds

GRAMMAR_INV = """
(set-logic LIA)
(synth-inv inv_fun ((x Int)) ((B Bool) (I Int)) ((B Bool ((<= I I))) (I Int (x 0 10))))
(define-fun pre_fun ((x Int)) Bool (= x 0))
(define-fun trans_fun ((x Int) (x! Int)) Bool (and (< x 10) (= x! (+ x 1))))
(define-fun post_fun ((x Int)) Bool (<= x 10))
(inv-constraint inv_fun pre_fun trans_fun post_fun)
"""

UNSAFE = """
(set-logic LIA)
(synth-inv inv_fun ((x Int)))
(define-fun pre_fun ((x Int)) Bool (= x 0))
(define-fun trans_fun ((x Int) (x! Int)) Bool (and (< x 10) (= x! (+ x 1))))
(define-fun post_fun ((x Int)) Bool (<= x 5))
(inv-constraint inv_fun pre_fun trans_fun post_fun)
"""


def _assert_inductive(problem, body, bound=20):
    target = invariant_problem(problem)
    names = [v.name for v in target.state_vars]
    primed = [v.name for v in target.primed_vars]
    values = range(-bound, bound + 1)
    for state in itertools.product(values, repeat=len(names)):
        env = dict(zip(names, state))
        inv = holds(body, env)
        if holds(target.pre, env):
            assert inv
        if inv:
            assert holds(target.post, env)
    # one step of the transition from every invariant state in the box
    for state in itertools.product(values, repeat=len(names)):
        env = dict(zip(names, state))
        if not holds(body, env):
            continue
        for successor in itertools.product(range(-bound - 1, bound + 2), repeat=len(names)):
            full = {**env, **dict(zip(primed, successor))}
            if holds(target.trans, full):
                assert holds(body, dict(zip(names, successor)))


def test_strengthening_only_without_grammar(benchmark):
    assert strengthen_post(benchmark("inv_counter.sl")).strengthened
    assert not strengthen_post(load_problem(GRAMMAR_INV)).strengthened


def test_strengthened_target_conjoins_post(benchmark):
    target = strengthen_post(benchmark("inv_counter.sl"))
    overall = target.overall(TRUE)
    assert holds(overall, {"x": 10}) and not holds(overall, {"x": 11})


@pytest.mark.parametrize("mode", ["fast", "unif"])
@pytest.mark.parametrize("name", ["inv_counter.sl", "inv_countdown.sl"])
def test_invariant_is_inductive(benchmark, config, stats, mode, name):
    problem = benchmark(name)
    result = InvariantService(config, stats, mode=mode).solve(problem, Budget.from_config(config))
    assert result.is_solved
    _assert_inductive(problem, result.solution.body("inv_fun"))


def test_unif_reports_provenance(benchmark, config, stats):
    problem = benchmark("inv_two_counters.sl")
    result = InvariantService(config, stats, mode="unif").solve(problem, Budget.from_config(config))
    assert result.is_solved
    assert result.solution.provenance is Provenance.INVARIANT_UNIFICATION
    _assert_inductive(problem, result.solution.body("inv_fun"), bound=8)


def test_grammar_invariant(config, stats):
    problem = load_problem(GRAMMAR_INV)
    result = InvariantService(config, stats, mode="fast").solve(problem, Budget.from_config(config))
    assert result.is_solved
    assert str(result.solution.body("inv_fun")) == "(<= x 10)"


def test_unsafe_program_is_infeasible(config, stats):
    problem = load_problem(UNSAFE)
    result = InvariantService(config, stats, mode="unif").solve(problem, Budget.from_config(config))
    assert result.verdict is Verdict.INFEASIBLE
    assert stats["refinement_lemmas"] >= 1


def test_classify_counterexample(benchmark):
    target = invariant_problem(benchmark("inv_counter.sl"))
    x = mk_var("x", INT)
    assert classify_counterexample(target, mk_app("<", x, mk_int(0)), {"x": 0, "x!": 1}).kind is LemmaKind.PRE
    assert classify_counterexample(target, TRUE, {"x": 11, "x!": 0}).kind is LemmaKind.POST
    lemma = classify_counterexample(target, mk_app("<=", x, mk_int(3)), {"x": 3, "x!": 4})
    assert lemma == RefinementLemma(LemmaKind.INDUCTION, (("x", 3),), (("x", 4),))
    assert classify_counterexample(target, mk_app("<=", x, mk_int(10)), {"x": 3, "x!": 4}) is None


def test_labels_propagate_along_transitions():
    labels = PointLabels()
    labels.add(RefinementLemma(LemmaKind.PRE, (("x", 0),)))
    labels.add(RefinementLemma(LemmaKind.INDUCTION, (("x", 0),), (("x", 1),)))
    labels.add(RefinementLemma(LemmaKind.INDUCTION, (("x", 7),), (("x", 8),)))
    labels.add(RefinementLemma(LemmaKind.POST, (("x", 12),)))
    labels.add(RefinementLemma(LemmaKind.INDUCTION, (("x", 11),), (("x", 12),)))
    assignment, conflict = labels.propagate()
    assert not conflict
    index = labels.index
    assert assignment[index[(("x", 1),)]] is True
    assert assignment[index[(("x", 11),)]] is False
    # neither end of 7 -> 8 is decided; the source is excluded
    assert assignment[index[(("x", 7),)]] is False
    assert index[(("x", 8),)] not in assignment


def test_labels_conflict():
    labels = PointLabels()
    labels.add(RefinementLemma(LemmaKind.PRE, (("x", 0),)))
    labels.add(RefinementLemma(LemmaKind.INDUCTION, (("x", 0),), (("x", 1),)))
    labels.add(RefinementLemma(LemmaKind.POST, (("x", 1),)))
    assert labels.propagate() == ({}, True)
