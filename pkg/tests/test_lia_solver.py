import pytest

from models.exceptions import NonLinearError
from models.term import BOOL, INT, STRING, mk_and, mk_app, mk_int, mk_not, mk_or, mk_var
from services.lia_solver import (LiaStatus, LinearAtom, is_lia, lift_ite, negate_atom, normalize_atom,
                                 qf_lia_sat, solve_conjunction)
from utils.evaluator import evaluate

x = mk_var("x", INT)
y = mk_var("y", INT)
z = mk_var("z", INT)
b = mk_var("b", BOOL)


def _sat(phi):
    result = qf_lia_sat(phi)
    assert result.status is LiaStatus.SAT
    assert evaluate(phi, result.model)
    return result.model


def test_contradictory_bounds():
    assert qf_lia_sat(mk_and(mk_app(">=", x, mk_int(1)), mk_app("<=", x, mk_int(0)))).is_unsat


def test_strict_bound_has_a_model():
    model = _sat(mk_app(">", x, mk_int(2)))
    assert model["x"] > 2


def test_integrality_matters():
    # 2x = 3 has a rational solution only
    assert qf_lia_sat(mk_app("=", mk_app("*", mk_int(2), x), mk_int(3))).is_unsat
    three_x = mk_app("*", mk_int(3), x)
    two_y = mk_app("*", mk_int(2), y)
    box = [mk_app(op, v, mk_int(k)) for v in (x, y) for op, k in ((">=", -5), ("<=", 5))]
    model = _sat(mk_and(mk_app("=", mk_app("+", three_x, two_y), mk_int(1)), *box))
    assert 3 * model["x"] + 2 * model["y"] == 1


def test_max_of_two_closure_is_unsat():
    # no y is >= both and differs from both
    ge = mk_and(mk_app(">=", y, x), mk_app(">=", y, z))
    picks = mk_or(mk_app("=", y, x), mk_app("=", y, z))
    assert qf_lia_sat(mk_and(ge, mk_not(picks), mk_app("<=", y, x))).is_unsat
    assert qf_lia_sat(mk_and(mk_app(">=", x, z), mk_not(mk_app(">=", x, z)))).is_unsat


def test_disjunction_and_booleans():
    phi = mk_and(mk_or(mk_app("<", x, mk_int(-5)), b),
                 mk_app("=>", b, mk_app(">", x, mk_int(100))),
                 mk_app(">", x, mk_int(-10)))
    model = _sat(phi)
    assert -10 < model["x"] < -5 or (model["b"] and model["x"] > 100)


def test_ite_is_lifted():
    phi = mk_app("=", mk_app("ite", mk_app("<=", x, mk_int(0)), mk_int(7), x), mk_int(7))
    lifted = lift_ite(phi)
    assert all(not (sub.is_apply and sub.op == "ite") for sub in _walk(lifted))
    for value in range(-3, 10):
        assert evaluate(phi, {"x": value}) == evaluate(lifted, {"x": value})
    _sat(mk_and(phi, mk_app(">", x, mk_int(0))))


def _walk(term):
    yield term
    for child in term.children:
        yield from _walk(child)


def test_normalize_atom():
    atom = normalize_atom("<", mk_app("*", mk_int(2), x), mk_int(5))
    assert atom == LinearAtom((("x", 1),), -2)
    assert normalize_atom(">=", x, y) == LinearAtom((("x", -1), ("y", 1)), 0)
    for value in range(-5, 6):
        for neg in negate_atom(atom):
            if neg.holds({"x": value}):
                assert not atom.holds({"x": value})


def test_solve_conjunction_reports_integer_model():
    atoms = [LinearAtom((("x", -1),), 3), LinearAtom((("x", 1), ("y", 1)), -10)]
    result = solve_conjunction(atoms, ["x", "y"])
    assert result.is_sat
    assert result.model["x"] >= 3 and result.model["x"] + result.model["y"] <= 10


def test_fragment_checks():
    assert is_lia(mk_and(mk_app("<=", mk_app("+", x, y), mk_int(3)), b))
    assert not is_lia(mk_app("=", mk_var("s", STRING), mk_var("s", STRING)))
    with pytest.raises(NonLinearError):
        qf_lia_sat(mk_app("=", mk_var("s", STRING), mk_var("t", STRING)))
