import itertools
import random

import pytest

from models.exceptions import SortError, UnboundVariableError
from models.term import (BOOL, INT, STRING, BitVecVal, Lambda, beta_reduce, bitvec_sort, mk_app,
                         mk_bool, mk_bv, mk_call, mk_int, mk_not, mk_string, mk_var, substitute)
from utils.evaluator import evaluate
from utils.rewriter import rewrite

x1 = mk_var("x1", INT)
x2 = mk_var("x2", INT)
y = mk_var("y", INT)
b = mk_var("b", BOOL)


def test_terms_are_hash_consed():
    assert mk_app("+", x1, mk_int(1)) is mk_app("+", x1, mk_int(1))
    assert mk_var("x1", INT) is x1


def test_ill_sorted_application_is_rejected():
    with pytest.raises(SortError):
        mk_app("+", x1, b)
    with pytest.raises(SortError):
        mk_app("bvadd", mk_bv(1, 4), mk_bv(1, 8))


def test_evaluate_examples():
    assert evaluate(mk_app("+", x1, mk_int(1)), {"x1": 3}) == 4
    assert evaluate(mk_app("ite", mk_bool(True), x1, x2), {"x1": 7, "x2": 9}) == 7
    assert evaluate(mk_app("str.++", mk_string("Jo"), mk_string("hn")), {}) == "John"
    assert evaluate(mk_app("str.substr", mk_string("abcde"), mk_int(1), mk_int(3)), {}) == "bcd"


@pytest.mark.parametrize("start, length, expected", [
    (0, 10, "abcde"),
    (-1, 2, ""),
    (2, -1, ""),
    (5, 1, ""),
    (3, 5, "de"),
])
def test_substr_out_of_range(start, length, expected):
    term = mk_app("str.substr", mk_string("abcde"), mk_int(start), mk_int(length))
    assert evaluate(term, {}) == expected


def _substr_reference(s, start, length):
    if start < 0 or length <= 0:
        return ""
    return "".join(ch for k, ch in enumerate(s) if start <= k < start + length)


def _indexof_reference(s, t, start):
    if start < 0 or start > len(s):
        return -1
    for k in range(start, len(s) - len(t) + 1):
        if s[k:k + len(t)] == t:
            return k
    return -1


def _random_string(rng, max_length):
    return "".join(rng.choice("ab ") for _ in range(rng.randint(0, max_length)))


def test_substr_and_indexof_agree_with_reference():
    rng = random.Random(2024)
    for _ in range(50):
        s = _random_string(rng, 6)
        start, length = rng.randint(-3, 9), rng.randint(-3, 9)
        t = _random_string(rng, 2)
        substr = mk_app("str.substr", mk_string(s), mk_int(start), mk_int(length))
        indexof = mk_app("str.indexof", mk_string(s), mk_string(t), mk_int(start))
        at = mk_app("str.at", mk_string(s), mk_int(start))
        assert evaluate(substr, {}) == _substr_reference(s, start, length), (s, start, length)
        assert evaluate(indexof, {}) == _indexof_reference(s, t, start), (s, t, start)
        assert evaluate(at, {}) == _substr_reference(s, start, 1), (s, start)


def test_string_index_conventions():
    s = mk_string("a b")
    assert evaluate(mk_app("str.indexof", s, mk_string(" "), mk_int(0)), {}) == 1
    assert evaluate(mk_app("str.indexof", s, mk_string("z"), mk_int(0)), {}) == -1
    assert evaluate(mk_app("str.at", s, mk_int(9)), {}) == ""
    assert evaluate(mk_app("str.to_int", mk_string("12a")), {}) == -1
    assert evaluate(mk_app("int.to_str", mk_int(-3)), {}) == ""


def test_bitvector_arithmetic_wraps():
    x = mk_var("x", bitvec_sort(4))
    env = {"x": BitVecVal(4, 15)}
    assert evaluate(mk_app("bvadd", x, mk_bv(1, 4)), env) == BitVecVal(4, 0)
    assert evaluate(mk_app("bvneg", x), env) == BitVecVal(4, 1)
    assert evaluate(mk_app("bvshl", x, mk_bv(4, 4)), env) == BitVecVal(4, 0)


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate(x1, {})


def test_substitute_examples():
    assert substitute(mk_app(">=", y, x1), {y: x2}) is mk_app(">=", x2, x1)
    term = mk_app("+", y, y)
    assert substitute(term, {}) is term
    shifted = mk_app("+", x1, mk_int(1))
    assert substitute(term, {y: shifted}) is mk_app("+", shifted, shifted)


def test_substitution_is_simultaneous():
    swapped = substitute(mk_app("-", x1, x2), {x1: x2, x2: x1})
    assert swapped is mk_app("-", x2, x1)


def test_substitute_rejects_sort_change():
    with pytest.raises(SortError):
        substitute(x1, {x1: b})


def test_beta_reduce_inlines_calls():
    call = mk_call("f", (x2,), INT)
    definitions = {"f": Lambda((x1,), mk_app("+", x1, mk_int(1)))}
    assert beta_reduce(mk_app(">", call, x2), definitions) is \
        mk_app(">", mk_app("+", x2, mk_int(1)), x2)


def test_rewrite_examples():
    assert rewrite(mk_app("+", x1, mk_int(0))) is x1
    assert rewrite(mk_not(mk_not(b))) is b
    assert rewrite(mk_app("+", mk_int(1), x1)) is rewrite(mk_app("+", x1, mk_int(1)))


def _grammar_terms(max_size):
    """Every term of {x1, 0, 1, +, ite, <=} up to max_size, by sort"""
    ints = {1: [x1, mk_int(0), mk_int(1)]}
    bools = {1: []}
    for size in range(2, max_size + 1):
        ints[size], bools[size] = [], []
        for left in range(1, size - 1):
            right = size - 1 - left
            for a, c in itertools.product(ints.get(left, []), ints.get(right, [])):
                ints[size].append(mk_app("+", a, c))
                bools[size].append(mk_app("<=", a, c))
        for cs in range(1, size - 2):
            for ts in range(1, size - 1 - cs):
                es = size - 1 - cs - ts
                for cond, then, other in itertools.product(bools.get(cs, []), ints.get(ts, []),
                                                           ints.get(es, [])):
                    ints[size].append(mk_app("ite", cond, then, other))
    return [t for terms in ints.values() for t in terms] + [t for terms in bools.values() for t in terms]


def test_rewrite_preserves_semantics_and_is_idempotent():
    terms = _grammar_terms(6)
    assert any(t.op == "ite" for t in terms)
    violations = []
    for term in terms:
        normal = rewrite(term)
        if rewrite(normal) is not normal:
            violations.append(("idempotence", term))
        for value in range(-5, 6):
            if evaluate(normal, {"x1": value}) != evaluate(term, {"x1": value}):
                violations.append(("semantics", term, value))
                break
    assert violations == []


def test_rewrite_keeps_sort():
    s = mk_var("s", STRING)
    term = mk_app("str.++", s, mk_string(""))
    assert rewrite(term).sort == STRING
    assert evaluate(rewrite(term), {"s": "ab"}) == "ab"
