import itertools

import pytest

from handlers.sygus_parser import parse_sygus
from models.datatype import EmbeddedTerm, embed_grammar
from models.solver_config import SolverConfig
from services.enumerator import EnumContext, Exhausted, derive_symmetry_rules, next_candidate, rewrite_key
from utils.evaluator import evaluate

POINTS = [{"x": x} for x in range(-2, 3)]


def _grammar(text="(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S)))))"):
    decl = parse_sygus(text).synth_fun
    return embed_grammar(decl.grammar, decl.params)


def _drain(ctx):
    terms = []
    while True:
        item = next_candidate(ctx)
        if isinstance(item, Exhausted):
            return terms, item
        terms.append(item)


def _brute_force(grammar, symbol, max_size):
    by_size = {}
    for size in range(1, max_size + 1):
        found = []
        for ctor in grammar.constructors[symbol]:
            if ctor.arity == 0:
                if size == 1:
                    found.append(EmbeddedTerm(ctor))
                continue
            for left in range(1, size - 1):
                right = size - 1 - left
                for a, b in itertools.product(by_size.get(left, []), by_size.get(right, [])):
                    found.append(EmbeddedTerm(ctor, [a, b]))
        by_size[size] = found
    return [t for terms in by_size.values() for t in terms]


def test_sizes_are_nondecreasing(stats):
    ctx = EnumContext(_grammar(), POINTS, SolverConfig(max_size=5), stats=stats)
    terms, exhausted = _drain(ctx)
    assert [t.size for t in terms[:3]] == [1, 1, 1]
    assert [t.size for t in terms] == sorted(t.size for t in terms)
    assert exhausted.reason == "size limit"
    assert stats["candidates_enumerated"] == len(terms)


def test_identity_patterns_are_never_yielded():
    ctx = EnumContext(_grammar(), POINTS, SolverConfig(max_size=7))
    terms, _ = _drain(ctx)
    for t in terms:
        if t.constructor.name == "+":
            assert "0" not in [c.constructor.name for c in t.children]


@pytest.mark.parametrize("symmetry", [True, False])
def test_signatures_match_brute_force(symmetry):
    grammar = _grammar()
    ctx = EnumContext(grammar, POINTS, SolverConfig(max_size=4, symmetry_breaking=symmetry))
    terms, _ = _drain(ctx)

    def signature(t):
        return tuple(evaluate(t.term, env) for env in POINTS)

    expected = {signature(t) for t in _brute_force(grammar, "S", 4)}
    assert {signature(t) for t in terms} == expected


def test_no_duplicate_rewritten_forms():
    ctx = EnumContext(_grammar(), POINTS, SolverConfig(max_size=7))
    terms, _ = _drain(ctx)
    keys = [rewrite_key(t) for t in terms]
    assert len(keys) == len(set(keys))


def test_observational_pruning_keeps_one_term_per_signature():
    ctx = EnumContext(_grammar(), POINTS, SolverConfig(max_size=7), observational=True)
    terms, _ = _drain(ctx)
    signatures = [ctx.signature(t) for t in terms]
    assert len(signatures) == len(set(signatures))
    assert (1, 2, 3, 4, 5) in signatures


def test_symmetry_rules():
    grammar = _grammar()
    ctx = EnumContext(grammar, POINTS, SolverConfig(max_size=3))
    rules = derive_symmetry_rules(ctx)
    plus = grammar.constructor("S", "+")
    zero = grammar.constructor("S", "0")
    one = grammar.constructor("S", "1")
    assert (plus, 1, zero) in rules.forbidden
    assert (plus, 0, zero) in rules.forbidden
    assert (plus, 1, one) not in rules.forbidden
    assert plus in rules.commutative


def test_finite_grammar_is_exhausted():
    grammar = _grammar("(synth-fun f ((x Int)) Int ((S Int) (B Bool)) "
                       "((S Int (x 0 (ite B S S))) (B Bool (true))))")
    ctx = EnumContext(grammar, POINTS, SolverConfig(max_size=12))
    terms, exhausted = _drain(ctx)
    assert exhausted.is_finite
    assert sorted(str(t.term) for t in terms) == ["0", "x"]


def test_terms_of_other_nonterminals_are_pooled():
    grammar = _grammar("(synth-fun f ((x Int)) Int ((S Int) (B Bool)) "
                       "((S Int (x 1 (ite B S S))) (B Bool ((<= S S)))))")
    ctx = EnumContext(grammar, POINTS, SolverConfig(max_size=5))
    _drain(ctx)
    conditions = [str(t.term) for t in ctx.terms("B")]
    assert "(<= x 1)" in conditions
