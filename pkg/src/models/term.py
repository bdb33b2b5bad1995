"""
Sorts, values and hash-consed terms shared by every solver component
"""

import threading
import weakref
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from models.exceptions import NonLinearError, SortError


class SortKind(Enum):
    INT = "Int"
    BOOL = "Bool"
    STRING = "String"
    BITVEC = "BitVec"
    DATATYPE = "Datatype"


@dataclass(frozen=True)
class Sort:
    kind: SortKind
    width: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind is SortKind.BITVEC and self.width < 1:
            raise SortError(f"bitvector width must be positive, got {self.width}")
        if self.kind is SortKind.DATATYPE and not self.name:
            raise SortError("datatype sort needs a name")

    def __str__(self) -> str:
        if self.kind is SortKind.BITVEC:
            return f"(_ BitVec {self.width})"
        if self.kind is SortKind.DATATYPE:
            return self.name
        return self.kind.value


INT = Sort(SortKind.INT)
BOOL = Sort(SortKind.BOOL)
STRING = Sort(SortKind.STRING)


def bitvec_sort(width: int) -> Sort:
    return Sort(SortKind.BITVEC, width=width)


def datatype_sort(name: str) -> Sort:
    return Sort(SortKind.DATATYPE, name=name)


@dataclass(frozen=True)
class BitVecVal:
    width: int
    value: int

    def __post_init__(self):
        if self.width < 1:
            raise SortError(f"bitvector width must be positive, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise SortError(f"bitvector value {self.value} does not fit in {self.width} bits")

    def __str__(self) -> str:
        return "#b" + format(self.value, f"0{self.width}b")


# Ground values are plain Python objects; bool must be tested before int.
Value = Union[bool, int, str, BitVecVal]
Environment = Dict[str, Value]


def sort_of_value(value: Value) -> Sort:
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, int):
        return INT
    if isinstance(value, str):
        return STRING
    if isinstance(value, BitVecVal):
        return bitvec_sort(value.width)
    raise SortError(f"not a ground value: {value!r}")


def format_string_literal(text: str) -> str:
    """Render a string value as an SMT-LIB 2.6 literal"""
    out = []
    for ch in text:
        code = ord(ch)
        if ch == '"':
            out.append('""')
        elif 32 <= code <= 126 and ch != "\\":
            out.append(ch)
        else:
            out.append(f"\\u{{{code:x}}}")
    return '"' + "".join(out) + '"'


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value) if value >= 0 else f"(- {-value})"
    if isinstance(value, str):
        return format_string_literal(value)
    return str(value)


class TermKind(Enum):
    VAR = "var"
    CONST = "const"
    APPLY = "apply"
    CALL = "call"


class Term:
    """
    Immutable, hash-consed term node.

    Structurally equal terms are the same object, so equality is identity
    and hashing is precomputed.
    """
    __slots__ = ("kind", "op", "name", "value", "sort", "children", "_hash", "_text", "__weakref__")

    def __init__(self, kind: TermKind, op: str, name: str, value, sort: Sort,
                 children: Tuple["Term", ...]):
        self.kind = kind
        self.op = op
        self.name = name
        self.value = value
        self.sort = sort
        self.children = children
        self._hash = hash((kind, op, name, value, sort, children))
        self._text: Optional[str] = None

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __ne__(self, other) -> bool:
        return self is not other

    def __lt__(self, other: "Term") -> bool:
        return term_order_key(self) < term_order_key(other)

    @property
    def is_var(self) -> bool:
        return self.kind is TermKind.VAR

    @property
    def is_const(self) -> bool:
        return self.kind is TermKind.CONST

    @property
    def is_apply(self) -> bool:
        return self.kind is TermKind.APPLY

    @property
    def is_call(self) -> bool:
        return self.kind is TermKind.CALL

    def __str__(self) -> str:
        if self._text is None:
            self._text = _render(self)
        return self._text

    def __repr__(self) -> str:
        return f"Term({self})"


_INTERN: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()
_INTERN_LOCK = threading.Lock()


def _intern(kind: TermKind, op: str, name: str, value, sort: Sort,
            children: Tuple[Term, ...]) -> Term:
    key = (kind, op, name, value, sort, children)
    with _INTERN_LOCK:
        term = _INTERN.get(key)
        if term is None:
            term = Term(kind, op, name, value, sort, children)
            _INTERN[key] = term
        return term


def _render(term: Term) -> str:
    if term.kind is TermKind.VAR:
        return term.name
    if term.kind is TermKind.CONST:
        return format_value(term.value)
    head = term.op if term.kind is TermKind.APPLY else term.name
    if not term.children:
        return head
    return "(" + head + " " + " ".join(str(c) for c in term.children) + ")"


def term_order_key(term: Term) -> Tuple[int, str]:
    """Total order used for canonical argument ordering; literals sort last"""
    return (1 if term.is_const else 0, str(term))


# ---------------------------------------------------------------------------
# Signature table

ARITH_OPS = frozenset({"+", "-", "*"})
INT_COMPARE_OPS = frozenset({"<=", "<", ">=", ">"})
BOOL_OPS = frozenset({"and", "or", "not", "=>"})
STRING_OPS = frozenset({"str.++", "str.len", "str.substr", "str.indexof", "str.at",
                        "str.contains", "str.replace", "str.to_int", "int.to_str",
                        "str.prefixof", "str.suffixof"})
BV_BINARY_OPS = frozenset({"bvadd", "bvsub", "bvand", "bvor", "bvxor", "bvshl", "bvlshr"})
BV_UNARY_OPS = frozenset({"bvnot", "bvneg"})
BV_COMPARE_OPS = frozenset({"bvult", "bvule"})
OPERATORS = (ARITH_OPS | INT_COMPARE_OPS | BOOL_OPS | STRING_OPS | BV_BINARY_OPS
             | BV_UNARY_OPS | BV_COMPARE_OPS | {"ite", "="})

# fixed-arity string operators: op -> (argument sorts, result sort)
_STRING_SIGNATURES: Dict[str, Tuple[Tuple[Sort, ...], Sort]] = {
    "str.len": ((STRING,), INT),
    "str.substr": ((STRING, INT, INT), STRING),
    "str.indexof": ((STRING, STRING, INT), INT),
    "str.at": ((STRING, INT), STRING),
    "str.contains": ((STRING, STRING), BOOL),
    "str.replace": ((STRING, STRING, STRING), STRING),
    "str.to_int": ((STRING,), INT),
    "int.to_str": ((INT,), STRING),
    "str.prefixof": ((STRING, STRING), BOOL),
    "str.suffixof": ((STRING, STRING), BOOL),
}


def _render_call(op: str, children: Sequence[Term]) -> str:
    return "(" + op + " " + " ".join(str(c) for c in children) + ")"


def _require(condition: bool, message: str, op: str, children: Sequence[Term]) -> None:
    if not condition:
        raise SortError(message, _render_call(op, children))


def result_sort(op: str, children: Sequence[Term]) -> Sort:
    """
    Check an application against the signature table

    Args:
        op: Operator name
        children: Argument terms

    Returns:
        Sort: Sort of the application

    Raises:
        SortError: on arity or sort mismatch
    """
    sorts = [c.sort for c in children]
    n = len(children)
    if op in ("+", "-"):
        _require(n >= (2 if op == "+" else 1), f"'{op}' arity mismatch", op, children)
        _require(all(s == INT for s in sorts), f"'{op}' expects Int arguments", op, children)
        return INT
    if op == "*":
        _require(n == 2, "'*' expects two arguments", op, children)
        _require(all(s == INT for s in sorts), "'*' expects Int arguments", op, children)
        if not any(c.is_const for c in children):
            raise NonLinearError("multiplication requires a literal factor",
                                 _render_call(op, children))
        return INT
    if op in INT_COMPARE_OPS:
        _require(n == 2 and all(s == INT for s in sorts),
                 f"'{op}' expects two Int arguments", op, children)
        return BOOL
    if op == "=":
        _require(n == 2 and sorts[0] == sorts[1], "'=' expects two arguments of one sort", op, children)
        return BOOL
    if op == "ite":
        _require(n == 3 and sorts[0] == BOOL and sorts[1] == sorts[2],
                 "'ite' expects (Bool, T, T)", op, children)
        return sorts[1]
    if op in ("and", "or"):
        _require(n >= 1 and all(s == BOOL for s in sorts), f"'{op}' expects Bool arguments", op, children)
        return BOOL
    if op == "not":
        _require(n == 1 and sorts[0] == BOOL, "'not' expects one Bool argument", op, children)
        return BOOL
    if op == "=>":
        _require(n == 2 and all(s == BOOL for s in sorts), "'=>' expects two Bool arguments", op, children)
        return BOOL
    if op == "str.++":
        _require(n >= 2 and all(s == STRING for s in sorts), "'str.++' expects String arguments", op, children)
        return STRING
    if op in _STRING_SIGNATURES:
        expected, result = _STRING_SIGNATURES[op]
        _require(tuple(sorts) == expected, f"'{op}' expects {tuple(str(s) for s in expected)}", op, children)
        return result
    if op in BV_BINARY_OPS or op in BV_COMPARE_OPS:
        _require(n == 2 and sorts[0].kind is SortKind.BITVEC and sorts[0] == sorts[1],
                 f"'{op}' expects two bitvectors of one width", op, children)
        return BOOL if op in BV_COMPARE_OPS else sorts[0]
    if op in BV_UNARY_OPS:
        _require(n == 1 and sorts[0].kind is SortKind.BITVEC, f"'{op}' expects one bitvector", op, children)
        return sorts[0]
    raise SortError(f"unknown operator '{op}'")


# ---------------------------------------------------------------------------
# Constructors

def mk_var(name: str, sort: Sort) -> Term:
    return _intern(TermKind.VAR, "", name, None, sort, ())


def mk_const(value: Value, sort: Optional[Sort] = None) -> Term:
    actual = sort_of_value(value)
    if sort is not None and sort != actual:
        raise SortError(f"literal {format_value(value)} is not of sort {sort}")
    return _intern(TermKind.CONST, "", "", value, actual, ())


def mk_int(value: int) -> Term:
    return mk_const(int(value))


def mk_bool(value: bool) -> Term:
    return mk_const(bool(value))


def mk_string(value: str) -> Term:
    return mk_const(str(value))


def mk_bv(value: int, width: int) -> Term:
    return mk_const(BitVecVal(width, value % (1 << width)))


TRUE = mk_bool(True)
FALSE = mk_bool(False)


def mk_app(op: str, *children: Term) -> Term:
    sort = result_sort(op, children)
    return _intern(TermKind.APPLY, op, "", None, sort, tuple(children))


def mk_call(name: str, children: Sequence[Term], sort: Sort) -> Term:
    """Application of a function symbol that is not in the signature table"""
    return _intern(TermKind.CALL, "", name, None, sort, tuple(children))


def rebuild(term: Term, children: Sequence[Term]) -> Term:
    """Same head as term, new children"""
    children = tuple(children)
    if children == term.children:
        return term
    if term.kind is TermKind.APPLY:
        return mk_app(term.op, *children)
    if term.kind is TermKind.CALL:
        return mk_call(term.name, children, term.sort)
    return term


def mk_and(*conjuncts: Term) -> Term:
    if not conjuncts:
        return TRUE
    if len(conjuncts) == 1:
        return conjuncts[0]
    return mk_app("and", *conjuncts)


def mk_or(*disjuncts: Term) -> Term:
    if not disjuncts:
        return FALSE
    if len(disjuncts) == 1:
        return disjuncts[0]
    return mk_app("or", *disjuncts)


def mk_not(term: Term) -> Term:
    return mk_app("not", term)


# ---------------------------------------------------------------------------
# Traversal and substitution

def iter_subterms(term: Term) -> Iterator[Term]:
    """Pre-order walk visiting each distinct subterm once"""
    seen = set()
    stack = [term]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        yield node
        stack.extend(reversed(node.children))


def free_vars(term: Term) -> Tuple[Term, ...]:
    return tuple(t for t in iter_subterms(term) if t.is_var)


def find_calls(term: Term, name: Optional[str] = None) -> List[Term]:
    return [t for t in iter_subterms(term) if t.is_call and (name is None or t.name == name)]


def term_size(term: Term) -> int:
    return 1 + sum(term_size(c) for c in term.children)


def transform(term: Term, visit: Callable[[Term, Tuple[Term, ...]], Term],
              memo: Optional[Dict[Term, Term]] = None) -> Term:
    """Bottom-up rebuild: visit(node, new_children) returns the replacement"""
    if memo is None:
        memo = {}
    cached = memo.get(term)
    if cached is not None:
        return cached
    children = tuple(transform(c, visit, memo) for c in term.children)
    result = visit(term, children)
    memo[term] = result
    return result


def substitute(term: Term, sub: Mapping[Term, Term]) -> Term:
    """
    Simultaneous substitution of variables

    Args:
        term: Term to rewrite
        sub: Mapping from variable terms to replacement terms

    Returns:
        Term: term with every mapped variable replaced

    Raises:
        SortError: if a replacement changes the variable's sort
    """
    if not sub:
        return term
    for var, replacement in sub.items():
        if var.sort != replacement.sort:
            raise SortError(f"cannot substitute {replacement} of sort {replacement.sort} "
                            f"for {var} of sort {var.sort}")

    def visit(node: Term, children: Tuple[Term, ...]) -> Term:
        if node.is_var:
            return sub.get(node, node)
        return rebuild(node, children)

    return transform(term, visit)


@dataclass(frozen=True)
class Lambda:
    """Function definition body over parameter variables"""
    params: Tuple[Term, ...]
    body: Term

    def apply(self, args: Sequence[Term]) -> Term:
        return substitute(self.body, dict(zip(self.params, args)))


def beta_reduce(term: Term, definitions: Mapping[str, Lambda]) -> Term:
    """Replace calls of the defined functions by their instantiated bodies"""
    if not definitions:
        return term

    def visit(node: Term, children: Tuple[Term, ...]) -> Term:
        if node.is_call and node.name in definitions:
            return definitions[node.name].apply(children)
        return rebuild(node, children)

    return transform(term, visit)
