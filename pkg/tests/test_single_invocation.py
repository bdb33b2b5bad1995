import pytest

from handlers.sygus_parser import load_problem
from models.solution import Provenance, Verdict
from models.term import INT, mk_and, mk_app, mk_int, mk_not, mk_var
from services.base_service import Budget
from services.lia_solver import qf_lia_sat
from services.single_invocation_service import (EXAMPLE_VAR, NotSingleInvocation, SingleInvocationProperty,
                                                SingleInvocationService, build_ite_solution, cegqi_solve,
                                                detect_single_invocation, select_instantiation)
from utils.evaluator import evaluate


def _problem(constraints, signature="((x Int))"):
    return load_problem(f"(synth-fun f {signature} Int) (declare-var a Int) (declare-var b Int) {constraints}")


@pytest.mark.parametrize("constraints, reason", [
    ("(constraint (= (f a) (f b)))", "different invocation arguments"),
    ("(constraint (> (f (+ a 1)) 0))", "invocation arguments are not distinct variables"),
    ("(constraint (> (f a) b))", "variable b is not an invocation argument"),
    ("(constraint (> a 0))", "conjunct without invocation mentions variables"),
])
def test_not_single_invocation(constraints, reason):
    detected = detect_single_invocation(_problem(constraints))
    assert isinstance(detected, NotSingleInvocation)
    assert detected.reason == reason


def test_repeated_argument_is_rejected():
    detected = detect_single_invocation(_problem("(constraint (> (f a a) 0))", "((x Int) (y Int))"))
    assert isinstance(detected, NotSingleInvocation)


def test_detect_max2(benchmark):
    sip = detect_single_invocation(benchmark("lia_max2.sl"))
    assert isinstance(sip, SingleInvocationProperty)
    assert [p.name for p in sip.params] == ["x", "y"]
    # Q[x, y] holds exactly for the maximum
    for x in range(-3, 4):
        for y in range(-3, 4):
            for out in range(-4, 5):
                env = {"x": x, "y": y, sip.output.name: out}
                assert evaluate(sip.q_body, env) == (out == max(x, y))


def test_invocation_renamed_to_parameters(benchmark):
    sip = detect_single_invocation(benchmark("lia_array_search2.sl"))
    assert isinstance(sip, SingleInvocationProperty)
    names = {v.name for v in _vars(sip.q_body)}
    assert names <= {"y1", "y2", "k1", sip.output.name}


def _vars(term):
    if term.is_var:
        yield term
    for child in term.children:
        yield from _vars(child)


def test_instances_close_max2(benchmark):
    sip = detect_single_invocation(benchmark("lia_max2.sl"))
    result = cegqi_solve(sip, max_iterations=16)
    assert result.status == "closed"
    assert len(result.instances) == 2
    closure = mk_and(*[mk_not(sip.instantiate(t)) for t in result.instances])
    assert qf_lia_sat(closure).is_unsat
    solution = build_ite_solution(result.instances, sip)
    for x in range(-5, 6):
        for y in range(-5, 6):
            assert evaluate(solution, {"x": x, "y": y}) == max(x, y)


def test_lower_bound_is_selected():
    sip = detect_single_invocation(_problem("(constraint (> (f a) a))"))
    result = cegqi_solve(sip, max_iterations=4)
    assert result.status == "closed"
    x = sip.params[0]
    assert build_ite_solution(result.instances, sip) is mk_app("+", x, mk_int(1))


def test_equality_is_selected():
    sip = detect_single_invocation(_problem("(constraint (= (f a) 5))"))
    result = cegqi_solve(sip, max_iterations=4)
    assert result.status == "closed"
    assert result.instances == (mk_int(5),)


def test_select_instantiation_prefers_greatest_lower_bound():
    e = mk_var(EXAMPLE_VAR, INT)
    k0 = mk_var("#k0", INT)
    k1 = mk_var("#k1", INT)
    q = mk_and(mk_app(">=", e, k0), mk_app(">=", e, k1))
    assert select_instantiation({"#k0": 3, "#k1": 7, EXAMPLE_VAR: 9}, q, e) is k1
    upper_only = mk_app("<=", e, k0)
    assert select_instantiation({"#k0": 3, EXAMPLE_VAR: 1}, upper_only, e) is k0
    assert select_instantiation({EXAMPLE_VAR: 4}, mk_app(">=", e, e), e) is mk_int(4)


def test_infeasible_conjecture():
    sip = detect_single_invocation(_problem("(constraint (> (f a) a)) (constraint (< (f a) a))"))
    assert cegqi_solve(sip, max_iterations=4).status == "infeasible"


def test_service_solves_without_grammar(benchmark, config, stats):
    problem = benchmark("lia_sign.sl")
    service = SingleInvocationService(config, stats)
    assert service.applies_to(problem)
    result = service.solve(problem, Budget.from_config(config))
    assert result.is_solved
    assert result.solution.provenance is Provenance.SINGLE_INVOCATION
    body = result.solution.body("sign")
    for x in range(-5, 6):
        assert evaluate(body, {"x": x}) == (x > 0) - (x < 0)
    assert stats["cegqi_iterations"] >= 3


def test_service_reports_infeasible(config, stats):
    problem = _problem("(constraint (> (f a) a)) (constraint (< (f a) a))")
    result = SingleInvocationService(config, stats).solve(problem, Budget.from_config(config))
    assert result.verdict is Verdict.INFEASIBLE


@pytest.mark.parametrize("name, expected", [
    ("lia_double.sl", lambda x, y: 2 * x),
    ("lia_linear_grammar.sl", lambda x, y: 2 * x - y),
])
def test_reconstruction_in_grammar(benchmark, config, stats, name, expected):
    problem = benchmark(name)
    service = SingleInvocationService(config, stats)
    result = service.solve(problem, Budget.from_config(config))
    assert result.is_solved
    body = result.solution.body(problem.synth_fun.name)
    assert all(sub.op != "*" for sub in _apply_nodes(body))
    params = [p.name for p in problem.synth_fun.params]
    for x in range(-4, 5):
        for y in range(-4, 5):
            env = dict(zip(params, (x, y)))
            assert evaluate(body, env) == expected(x, y)


def _apply_nodes(term):
    if term.is_apply:
        yield term
    for child in term.children:
        yield from _apply_nodes(child)


def test_not_applicable_outside_linear_integers(benchmark, config):
    service = SingleInvocationService(config)
    assert not service.applies_to(benchmark("bv_double.sl"))
    assert not service.applies_to(benchmark("lia_symmetric_max.sl"))
    assert not service.applies_to(benchmark("inv_counter.sl"))


def test_reconstruction_repairs_constant_slots(config, stats):
    problem = load_problem("""
        (set-logic LIA)
        (synth-fun f ((x Int)) Int ((S Int)) ((S Int (x (Constant Int) (- S S)))))
        (declare-var a Int)
        (constraint (> (f a) (+ a 100)))""")
    result = SingleInvocationService(config, stats).solve(problem, Budget.from_config(config))
    assert result.is_solved
    assert result.solution.provenance is Provenance.SINGLE_INVOCATION
    assert stats["repair_rounds"] > 0
    body = result.solution.body("f")
    assert body.op == "-"
    assert all(evaluate(body, {"x": x}) > x + 100 for x in range(-50, 51))
