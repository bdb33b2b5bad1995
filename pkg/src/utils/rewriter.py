"""
Theory rewriter: a fixed, ordered rule list applied bottom-up to a fixpoint.

Normal forms are used as redundancy keys by the enumerator and to tidy
solutions before printing.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from models.term import (BOOL, FALSE, INT, STRING, TRUE, BitVecVal, SortKind, Term, TermKind,
                         mk_app, mk_bv, mk_const, mk_int, mk_string, rebuild, term_order_key)
from utils.evaluator import apply_op

DEFAULT_RULE_BUDGET = 10_000

_ARITH = ("+", "-", "*")
_COMMUTATIVE_BV = ("bvadd", "bvand", "bvor", "bvxor")
_NEGATED_COMPARISON = {"<=": ">", "<": ">=", ">=": "<", ">": "<="}


@dataclass
class LinearForm:
    """Integer linear combination: sum(coeffs[atom] * atom) + constant"""
    coeffs: Dict[Term, int] = field(default_factory=dict)
    constant: int = 0

    def add(self, other: "LinearForm", scale: int = 1) -> "LinearForm":
        coeffs = dict(self.coeffs)
        for atom, c in other.coeffs.items():
            total = coeffs.get(atom, 0) + scale * c
            if total:
                coeffs[atom] = total
            else:
                coeffs.pop(atom, None)
        return LinearForm(coeffs, self.constant + scale * other.constant)

    def scale(self, factor: int) -> "LinearForm":
        if factor == 0:
            return LinearForm()
        return LinearForm({a: c * factor for a, c in self.coeffs.items()}, self.constant * factor)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs


def linearize(term: Term) -> LinearForm:
    """Linear form of an Int term; non-arithmetic subterms become atoms"""
    if term.is_const:
        return LinearForm({}, term.value)
    if term.is_apply and term.op in _ARITH:
        parts = [linearize(c) for c in term.children]
        if term.op == "+":
            result = LinearForm()
            for p in parts:
                result = result.add(p)
            return result
        if term.op == "-":
            if len(parts) == 1:
                return parts[0].scale(-1)
            result = parts[0]
            for p in parts[1:]:
                result = result.add(p, -1)
            return result
        left, right = parts
        if left.is_constant:
            return right.scale(left.constant)
        if right.is_constant:
            return left.scale(right.constant)
    return LinearForm({term: 1}, 0)


def build_linear(form: LinearForm) -> Term:
    """Canonical term for a linear form: ordered monomials, constant last"""
    parts: List[Term] = []
    for atom in sorted(form.coeffs, key=term_order_key):
        coeff = form.coeffs[atom]
        parts.append(atom if coeff == 1 else mk_app("*", mk_int(coeff), atom))
    if form.constant or not parts:
        parts.append(mk_int(form.constant))
    if len(parts) == 1:
        return parts[0]
    return mk_app("+", *parts)


def _bool_const(term: Term) -> Optional[bool]:
    return term.value if term.is_const and term.sort == BOOL else None


def _is_negation_of(a: Term, b: Term) -> bool:
    return (a.is_apply and a.op == "not" and a.children[0] is b) or \
           (b.is_apply and b.op == "not" and b.children[0] is a)


def _bv_is(term: Term, value: int) -> bool:
    return term.is_const and isinstance(term.value, BitVecVal) and term.value.value == value


def _bv_ones(term: Term) -> bool:
    return term.is_const and isinstance(term.value, BitVecVal) and \
        term.value.value == (1 << term.value.width) - 1


class Rewriter:
    def __init__(self, rule_budget: int = DEFAULT_RULE_BUDGET):
        """
        Initialize rewriter

        Args:
            rule_budget: Maximum rule applications per rewrite call
        """
        self.rule_budget = rule_budget
        self._cache: Dict[Term, Term] = {}
        self._remaining = rule_budget
        self._exhausted = False

    def rewrite(self, term: Term) -> Term:
        """
        Normal form of term with identical sort and semantics

        Args:
            term: Well-sorted term

        Returns:
            Term: rewritten term; idempotent unless the rule budget runs out
        """
        cached = self._cache.get(term)
        if cached is not None:
            return cached
        self._remaining = self.rule_budget
        self._exhausted = False
        result = self._normalize(term, {})
        if self._exhausted:
            logging.debug(f"Rewrite budget exhausted on {term}")
        return result

    def _normalize(self, term: Term, local: Dict[Term, Term]) -> Term:
        cached = self._cache.get(term) or local.get(term)
        if cached is not None:
            return cached
        if not term.children:
            return term
        node = rebuild(term, [self._normalize(c, local) for c in term.children])
        result = node
        if node.kind is TermKind.APPLY and self._remaining > 0:
            simplified = self._simplify(node)
            if simplified is not node:
                self._remaining -= 1
                if self._remaining <= 0:
                    self._exhausted = True
                result = self._normalize(simplified, local)
        store = local if self._exhausted else self._cache
        store[term] = result
        store[result] = result
        return result

    # -- rules -------------------------------------------------------------

    def _simplify(self, node: Term) -> Term:
        op = node.op
        children = node.children
        if all(c.is_const for c in children):
            return mk_const(apply_op(op, [c.value for c in children]), node.sort)
        if op in _ARITH:
            return build_linear(linearize(node))
        if op in ("<=", "<", ">=", ">"):
            return self._compare(node)
        if op == "=":
            return self._equality(node)
        if op == "not":
            return self._negation(node)
        if op in ("and", "or"):
            return self._junction(node)
        if op == "=>":
            return mk_app("or", mk_app("not", children[0]), children[1])
        if op == "ite":
            return self._ite(node)
        if op.startswith("str.") or op == "int.to_str":
            return self._string(node)
        if op.startswith("bv"):
            return self._bitvector(node)
        return node

    def _compare(self, node: Term) -> Term:
        left, right = node.children
        diff = linearize(left).add(linearize(right), -1)
        if diff.is_constant:
            return mk_const(apply_op(node.op, [diff.constant, 0]))
        return node

    def _equality(self, node: Term) -> Term:
        left, right = node.children
        if left is right:
            return TRUE
        if left.sort == INT:
            diff = linearize(left).add(linearize(right), -1)
            if diff.is_constant:
                return mk_const(diff.constant == 0)
        if left.sort == BOOL:
            for a, b in ((left, right), (right, left)):
                value = _bool_const(b)
                if value is True:
                    return a
                if value is False:
                    return mk_app("not", a)
        if term_order_key(right) < term_order_key(left):
            return mk_app("=", right, left)
        return node

    def _negation(self, node: Term) -> Term:
        child = node.children[0]
        if child.is_apply:
            if child.op == "not":
                return child.children[0]
            if child.op in _NEGATED_COMPARISON:
                return mk_app(_NEGATED_COMPARISON[child.op], *child.children)
            if child.op == "bvult":
                return mk_app("bvule", child.children[1], child.children[0])
            if child.op == "bvule":
                return mk_app("bvult", child.children[1], child.children[0])
        return node

    def _junction(self, node: Term) -> Term:
        op = node.op
        unit = op == "and"
        flat: List[Term] = []
        for child in node.children:
            if child.is_apply and child.op == op:
                flat.extend(child.children)
            else:
                flat.append(child)
        kept: List[Term] = []
        for child in flat:
            value = _bool_const(child)
            if value is unit:
                continue
            if value is not None:
                return mk_const(not unit)
            if child not in kept:
                kept.append(child)
        for i, a in enumerate(kept):
            for b in kept[i + 1:]:
                if _is_negation_of(a, b):
                    return mk_const(not unit)
        dual = "or" if unit else "and"
        plain = {c for c in kept if not (c.is_apply and c.op == dual)}
        kept = [c for c in kept
                if not (c.is_apply and c.op == dual and plain.intersection(c.children))]
        if not kept:
            return mk_const(unit)
        if len(kept) == 1:
            return kept[0]
        kept.sort(key=term_order_key)
        result = mk_app(op, *kept)
        return node if result is node else result

    def _ite(self, node: Term) -> Term:
        cond, then, other = node.children
        value = _bool_const(cond)
        if value is not None:
            return then if value else other
        if then is other:
            return then
        if cond.is_apply and cond.op == "not":
            return mk_app("ite", cond.children[0], other, then)
        if node.sort == BOOL:
            t, e = _bool_const(then), _bool_const(other)
            if t is True and e is False:
                return cond
            if t is False and e is True:
                return mk_app("not", cond)
            if t is True:
                return mk_app("or", cond, other)
            if t is False:
                return mk_app("and", mk_app("not", cond), other)
            if e is False:
                return mk_app("and", cond, then)
            if e is True:
                return mk_app("or", mk_app("not", cond), then)
        return node

    def _string(self, node: Term) -> Term:
        op = node.op
        children = node.children
        if op == "str.++":
            parts: List[Term] = []
            for child in children:
                pieces = child.children if child.is_apply and child.op == "str.++" else (child,)
                for piece in pieces:
                    if piece.is_const and piece.value == "":
                        continue
                    if piece.is_const and parts and parts[-1].is_const:
                        parts[-1] = mk_string(parts[-1].value + piece.value)
                    else:
                        parts.append(piece)
            if not parts:
                return mk_string("")
            if len(parts) == 1:
                return parts[0]
            result = mk_app("str.++", *parts)
            return node if result is node else result
        if op == "str.substr":
            s, start, length = children
            if (s.is_const and s.value == "") or (length.is_const and length.value <= 0) \
                    or (start.is_const and start.value < 0):
                return mk_string("")
        if op == "str.at":
            s, start = children
            if (s.is_const and s.value == "") or (start.is_const and start.value < 0):
                return mk_string("")
        if op == "str.contains":
            s, t = children
            if s is t or (t.is_const and t.value == ""):
                return TRUE
        if op in ("str.prefixof", "str.suffixof"):
            s, t = children
            if s is t or (s.is_const and s.value == ""):
                return TRUE
        if op == "str.replace":
            s, t, u = children
            if t is u:
                return s
        return node

    def _bitvector(self, node: Term) -> Term:
        op = node.op
        children = node.children
        if op in ("bvnot", "bvneg"):
            child = children[0]
            if child.is_apply and child.op == op:
                return child.children[0]
            return node
        a, b = children
        width = node.children[0].sort.width
        if op in _COMMUTATIVE_BV:
            if term_order_key(b) < term_order_key(a):
                return mk_app(op, b, a)
            if op in ("bvadd", "bvor", "bvxor") and _bv_is(b, 0):
                return a
            if op == "bvand":
                if _bv_is(b, 0):
                    return b
                if _bv_ones(b) or a is b:
                    return a
            if op == "bvor":
                if _bv_ones(b):
                    return b
                if a is b:
                    return a
            if op == "bvxor" and a is b:
                return mk_bv(0, width)
            return node
        if op == "bvsub":
            if _bv_is(b, 0):
                return a
            if a is b:
                return mk_bv(0, width)
        if op in ("bvshl", "bvlshr"):
            if _bv_is(b, 0) or _bv_is(a, 0):
                return a
        if op == "bvult":
            if a is b or _bv_is(b, 0):
                return FALSE
        if op == "bvule":
            if a is b or _bv_is(a, 0):
                return TRUE
        return node


_default_rewriter = Rewriter()


def configure_rewriter(rule_budget: int) -> None:
    """Replace the shared rewriter (and its cache) with a new budget"""
    global _default_rewriter
    _default_rewriter = Rewriter(rule_budget)


def rewrite(term: Term) -> Term:
    """Rewrite term with the shared session rewriter"""
    return _default_rewriter.rewrite(term)
