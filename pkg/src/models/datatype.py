"""
Deep embedding of grammars as algebraic datatypes.

Each nonterminal becomes a datatype, each production a constructor whose
analog is the theory operator (or variable, or literal) it stands for.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from models.exceptions import SortError, UnrepairedConstantError, UnsupportedOperatorError
from models.problem import GrammarDef, NonterminalDef, Production, SynthFunDecl, hole_var
from models.term import (BOOL, INT, OPERATORS, STRING, BitVecVal, Sort, SortKind, Term, Value,
                         bitvec_sort, datatype_sort, format_value, iter_subterms, mk_app,
                         mk_const, mk_var, sort_of_value, substitute)
from utils.evaluator import evaluate


class _Hole:
    """Marker for a constant slot that has not been repaired yet"""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "HOLE"


HOLE = _Hole()


@dataclass(frozen=True, eq=False)
class Constructor:
    name: str
    datatype: str
    production: Production
    field_symbols: Tuple[str, ...]
    params: Tuple[Term, ...]

    @property
    def arity(self) -> int:
        return len(self.field_symbols)

    @property
    def is_constant_slot(self) -> bool:
        return self.production.is_constant_slot

    @property
    def template(self) -> Optional[Term]:
        return self.production.template

    def analog(self, children: Sequence[Term]) -> Term:
        """Theory term for this constructor applied to unembedded children"""
        template = self.production.template
        holes = self.production.holes
        if not holes:
            return template
        if template.is_var:
            return children[0]
        if template.is_apply and template.children == holes:
            return mk_app(template.op, *children)
        return substitute(template, dict(zip(holes, children)))

    def __repr__(self) -> str:
        return f"Constructor({self.name})"


class EmbeddedTerm:
    """
    Value of a grammar datatype.

    Constant-slot constructors carry a concrete value or HOLE; size is the
    constructor count.
    """
    __slots__ = ("constructor", "children", "value", "size", "has_hole", "_term", "signature")

    def __init__(self, constructor: Constructor, children: Sequence["EmbeddedTerm"] = (),
                 value=None):
        if len(children) != constructor.arity:
            raise SortError(f"constructor {constructor.name} expects {constructor.arity} children")
        for symbol, child in zip(constructor.field_symbols, children):
            if child.constructor.datatype != symbol:
                raise SortError(f"constructor {constructor.name} expects a {symbol} child, "
                                f"got {child.constructor.datatype}")
        if constructor.is_constant_slot and value is None:
            value = HOLE
        self.constructor = constructor
        self.children = tuple(children)
        self.value = value
        self.size = 1 + sum(c.size for c in self.children)
        self.has_hole = value is HOLE or any(c.has_hole for c in self.children)
        self._term: Optional[Term] = None
        self.signature: Optional[tuple] = None

    @property
    def term(self) -> Term:
        if self._term is None:
            self._term = unembed(self)
        return self._term

    def hole_sorts(self) -> List[Sort]:
        """Sorts of the HOLE slots in left-to-right pre-order"""
        if self.value is HOLE:
            return [self.constructor.production.constant_sort]
        result: List[Sort] = []
        for child in self.children:
            result.extend(child.hole_sorts())
        return result

    def template_term(self, hole_vars: Sequence[Term]) -> Term:
        """Unembedding with the HOLE slots replaced by the given variables, in order"""
        queue = list(hole_vars)

        def build(node: "EmbeddedTerm") -> Term:
            if node.constructor.is_constant_slot:
                if node.value is HOLE:
                    return queue.pop(0)
                return mk_const(node.value)
            return node.constructor.analog([build(c) for c in node.children])

        return build(self)

    def fill(self, values: Sequence[Value]) -> "EmbeddedTerm":
        """Copy with HOLE slots replaced by values, in pre-order"""
        queue = list(values)

        def build(node: "EmbeddedTerm") -> "EmbeddedTerm":
            if not node.has_hole:
                return node
            if node.value is HOLE:
                return EmbeddedTerm(node.constructor, (), queue.pop(0))
            return EmbeddedTerm(node.constructor, [build(c) for c in node.children], node.value)

        return build(self)

    def __str__(self) -> str:
        if self.constructor.is_constant_slot:
            inner = "HOLE" if self.value is HOLE else format_value(self.value)
            return f"{self.constructor.name}({inner})"
        if not self.children:
            return self.constructor.name
        return f"{self.constructor.name}({', '.join(str(c) for c in self.children)})"

    def __repr__(self) -> str:
        return f"EmbeddedTerm({self})"


@dataclass
class DatatypeGrammar:
    start: str
    params: Tuple[Term, ...]
    theory_sorts: Dict[str, Sort]
    constructors: Dict[str, Tuple[Constructor, ...]]

    @property
    def symbols(self) -> List[str]:
        return list(self.constructors)

    def sort_of(self, symbol: str) -> Sort:
        """Datatype sort encoding the nonterminal"""
        return datatype_sort(symbol)

    def constructor(self, symbol: str, name: str) -> Constructor:
        for ctor in self.constructors[symbol]:
            if ctor.name == name:
                return ctor
        raise KeyError(name)

    def apply(self, symbol: str, name: str, *children: EmbeddedTerm, value=None) -> EmbeddedTerm:
        return EmbeddedTerm(self.constructor(symbol, name), children, value)

    def find_production(self, symbol: str, op: str, field_symbols: Sequence[str]) -> Optional[Constructor]:
        """Constructor of symbol whose template is (op holes...) over the given nonterminals"""
        for ctor in self.constructors.get(symbol, ()):
            template = ctor.template
            if template is not None and template.is_apply and template.op == op \
                    and template.children == ctor.production.holes \
                    and ctor.field_symbols == tuple(field_symbols):
                return ctor
        return None


def _constructor_name(production: Production, used: Dict[str, int]) -> str:
    if production.is_constant_slot:
        base = "const"
    elif production.template is not None and production.template.is_apply:
        base = production.template.op
    else:
        base = production.label
    count = used.get(base, 0)
    used[base] = count + 1
    return base if count == 0 else f"{base}_{count}"


def embed_grammar(grammar: GrammarDef, params: Sequence[Term]) -> DatatypeGrammar:
    """
    Encode a grammar as one datatype per nonterminal

    Args:
        grammar: Parsed (or default) grammar
        params: Synth-fun argument variables

    Returns:
        DatatypeGrammar: constructors in production order

    Raises:
        UnsupportedOperatorError: production using a symbol outside the signature
        SortError: reference to an undeclared nonterminal
    """
    symbols = {nt.symbol: nt.sort for nt in grammar.nonterminals}
    constructors: Dict[str, Tuple[Constructor, ...]] = {}
    for nt in grammar.nonterminals:
        used: Dict[str, int] = {}
        ctors: List[Constructor] = []
        for production in nt.productions:
            if production.template is not None:
                for sub in iter_subterms(production.template):
                    if sub.is_call or (sub.is_apply and sub.op not in OPERATORS):
                        raise UnsupportedOperatorError(
                            f"unsupported operator '{sub.name or sub.op}' in production {production.label}")
                if production.template.sort != nt.sort:
                    raise SortError(f"production {production.label} has sort {production.template.sort}, "
                                    f"nonterminal {nt.symbol} is {nt.sort}")
            for symbol, hole in zip(production.hole_symbols, production.holes):
                if symbol not in symbols:
                    raise SortError(f"unknown nonterminal '{symbol}' in production {production.label}")
                if symbols[symbol] != hole.sort:
                    raise SortError(f"nonterminal '{symbol}' used at sort {hole.sort}")
            ctors.append(Constructor(_constructor_name(production, used), nt.symbol, production,
                                     tuple(production.hole_symbols), tuple(params)))
        constructors[nt.symbol] = tuple(ctors)
    return DatatypeGrammar(grammar.start.symbol, tuple(params), symbols, constructors)


def unembed(t: EmbeddedTerm) -> Term:
    """
    Replace each constructor by its analog

    Raises:
        UnrepairedConstantError: if a constant slot is still HOLE
    """
    if t.constructor.is_constant_slot:
        if t.value is HOLE:
            raise UnrepairedConstantError()
        return mk_const(t.value)
    return t.constructor.analog([c.term for c in t.children])


def eval_embedded(t: EmbeddedTerm, args: Sequence[Value]) -> Value:
    """Evaluation operator: value of the encoded term on the argument tuple"""
    params = t.constructor.params
    return evaluate(t.term, {p.name: a for p, a in zip(params, args)})


# ---------------------------------------------------------------------------
# Default grammar for synth-funs declared without one

def _leaf(term: Term) -> Production:
    return Production(label=str(term), template=term)


def _op(op: str, *symbol_sorts: Tuple[str, Sort]) -> Production:
    holes = tuple(hole_var(i, sort) for i, (_, sort) in enumerate(symbol_sorts))
    template = mk_app(op, *holes)
    label = "(" + op + " " + " ".join(s for s, _ in symbol_sorts) + ")"
    return Production(label=label, template=template, holes=holes,
                      hole_symbols=tuple(s for s, _ in symbol_sorts))


_STRING_LOGICS = ("S", "SLIA", "QF_S", "QF_SLIA", "ALL")


def default_grammar(decl: SynthFunDecl, logic: str, int_literals: Sequence[int] = (),
                    string_literals: Sequence[str] = ()) -> GrammarDef:
    """
    Grammar over the full core operator set of the sorts in play

    Args:
        decl: Synth-fun without a grammar
        logic: Problem logic name
        int_literals: Integer literals of the problem, added to Int productions
        string_literals: String literals of the problem, added to String productions

    Returns:
        GrammarDef: start symbol first
    """
    sorts: List[Sort] = [decl.return_sort]
    for s in list(decl.arg_sorts) + [BOOL]:
        if s not in sorts:
            sorts.append(s)
    if (STRING in sorts or logic in _STRING_LOGICS) and STRING not in sorts:
        sorts.append(STRING)
    if STRING in sorts and INT not in sorts:
        sorts.append(INT)
    if "LIA" in logic and INT not in sorts:
        sorts.append(INT)

    names: Dict[Sort, str] = {}
    for s in sorts:
        if s == decl.return_sort:
            names[s] = "Start"
        elif s.kind is SortKind.BITVEC:
            names[s] = f"BV{s.width}"
        else:
            names[s] = {SortKind.INT: "I", SortKind.BOOL: "B", SortKind.STRING: "S"}[s.kind]

    def nt(sort: Sort) -> Tuple[str, Sort]:
        return names[sort], sort

    nonterminals: List[NonterminalDef] = []
    for sort in sorts:
        prods: List[Production] = [_leaf(p) for p in decl.params if p.sort == sort]
        if sort == INT:
            for value in [0, 1] + [v for v in int_literals if v not in (0, 1)]:
                prods.append(_leaf(mk_const(value)))
            prods += [_op("+", nt(INT), nt(INT)), _op("-", nt(INT), nt(INT)),
                      _op("ite", nt(BOOL), nt(INT), nt(INT))]
            if STRING in sorts:
                prods += [_op("str.len", nt(STRING)),
                          _op("str.indexof", nt(STRING), nt(STRING), nt(INT)),
                          _op("str.to_int", nt(STRING))]
        elif sort == BOOL:
            prods += [_leaf(mk_const(True)), _leaf(mk_const(False)),
                      _op("and", nt(BOOL), nt(BOOL)), _op("or", nt(BOOL), nt(BOOL)),
                      _op("not", nt(BOOL))]
            if INT in sorts:
                prods += [_op("<=", nt(INT), nt(INT)), _op("<", nt(INT), nt(INT)),
                          _op("=", nt(INT), nt(INT))]
            if STRING in sorts:
                prods += [_op("str.contains", nt(STRING), nt(STRING)),
                          _op("str.prefixof", nt(STRING), nt(STRING)),
                          _op("str.suffixof", nt(STRING), nt(STRING)),
                          _op("=", nt(STRING), nt(STRING))]
            for other in sorts:
                if other.kind is SortKind.BITVEC:
                    prods += [_op("bvult", nt(other), nt(other)), _op("bvule", nt(other), nt(other)),
                              _op("=", nt(other), nt(other))]
        elif sort == STRING:
            for value in [""] + [v for v in string_literals if v != ""]:
                prods.append(_leaf(mk_const(value)))
            prods += [_op("str.++", nt(STRING), nt(STRING)),
                      _op("str.substr", nt(STRING), nt(INT), nt(INT)),
                      _op("str.at", nt(STRING), nt(INT)),
                      _op("str.replace", nt(STRING), nt(STRING), nt(STRING)),
                      _op("int.to_str", nt(INT)),
                      _op("ite", nt(BOOL), nt(STRING), nt(STRING))]
        elif sort.kind is SortKind.BITVEC:
            prods += [_leaf(mk_const(BitVecVal(sort.width, 0))), _leaf(mk_const(BitVecVal(sort.width, 1)))]
            prods += [_op(op, nt(sort), nt(sort))
                      for op in ("bvadd", "bvsub", "bvand", "bvor", "bvxor", "bvshl", "bvlshr")]
            prods += [_op("bvnot", nt(sort)), _op("bvneg", nt(sort)),
                      _op("ite", nt(BOOL), nt(sort), nt(sort))]
        nonterminals.append(NonterminalDef(names[sort], sort, tuple(prods)))
    return GrammarDef(tuple(nonterminals))


def grammar_for(decl: SynthFunDecl, logic: str, int_literals: Sequence[int] = (),
                string_literals: Sequence[str] = ()) -> DatatypeGrammar:
    """Embedded grammar of a synth-fun, defaulting when none was declared"""
    grammar = decl.grammar or default_grammar(decl, logic, int_literals, string_literals)
    return embed_grammar(grammar, decl.params)
