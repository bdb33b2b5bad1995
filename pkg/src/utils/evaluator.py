"""
Ground semantics of the term signature
"""

from typing import Callable, Dict, Mapping, Optional, Sequence

from models.exceptions import EvaluationError, UnboundVariableError
from models.term import BitVecVal, Environment, Lambda, Sort, SortKind, Term, TermKind, Value


def str_substr(s: str, start: int, length: int) -> str:
    if start < 0 or length <= 0 or start >= len(s):
        return ""
    return s[start:start + length]


def str_indexof(s: str, t: str, start: int) -> int:
    if start < 0 or start > len(s):
        return -1
    return s.find(t, start)


def str_to_int(s: str) -> int:
    if not s or any(ch not in "0123456789" for ch in s):
        return -1
    return int(s)


def int_to_str(n: int) -> str:
    return str(n) if n >= 0 else ""


def _bv(width: int, value: int) -> BitVecVal:
    return BitVecVal(width, value & ((1 << width) - 1))


def _shift_left(a: BitVecVal, b: BitVecVal) -> BitVecVal:
    return _bv(a.width, a.value << b.value) if b.value < a.width else BitVecVal(a.width, 0)


def _shift_right(a: BitVecVal, b: BitVecVal) -> BitVecVal:
    return BitVecVal(a.width, a.value >> b.value) if b.value < a.width else BitVecVal(a.width, 0)


def _minus(args: Sequence[int]) -> int:
    if len(args) == 1:
        return -args[0]
    result = args[0]
    for a in args[1:]:
        result -= a
    return result


_STRICT_OPS: Dict[str, Callable[[Sequence[Value]], Value]] = {
    "+": lambda a: sum(a),
    "-": _minus,
    "*": lambda a: a[0] * a[1],
    "<=": lambda a: a[0] <= a[1],
    "<": lambda a: a[0] < a[1],
    ">=": lambda a: a[0] >= a[1],
    ">": lambda a: a[0] > a[1],
    "=": lambda a: a[0] == a[1] and type(a[0]) is type(a[1]),
    "not": lambda a: not a[0],
    "=>": lambda a: (not a[0]) or a[1],
    "str.++": lambda a: "".join(a),
    "str.len": lambda a: len(a[0]),
    "str.substr": lambda a: str_substr(a[0], a[1], a[2]),
    "str.indexof": lambda a: str_indexof(a[0], a[1], a[2]),
    "str.at": lambda a: str_substr(a[0], a[1], 1),
    "str.contains": lambda a: a[1] in a[0],
    "str.replace": lambda a: a[0].replace(a[1], a[2], 1),
    "str.to_int": lambda a: str_to_int(a[0]),
    "int.to_str": lambda a: int_to_str(a[0]),
    "str.prefixof": lambda a: a[1].startswith(a[0]),
    "str.suffixof": lambda a: a[1].endswith(a[0]),
    "bvadd": lambda a: _bv(a[0].width, a[0].value + a[1].value),
    "bvsub": lambda a: _bv(a[0].width, a[0].value - a[1].value),
    "bvand": lambda a: BitVecVal(a[0].width, a[0].value & a[1].value),
    "bvor": lambda a: BitVecVal(a[0].width, a[0].value | a[1].value),
    "bvxor": lambda a: BitVecVal(a[0].width, a[0].value ^ a[1].value),
    "bvnot": lambda a: _bv(a[0].width, ~a[0].value),
    "bvneg": lambda a: _bv(a[0].width, -a[0].value),
    "bvshl": lambda a: _shift_left(a[0], a[1]),
    "bvlshr": lambda a: _shift_right(a[0], a[1]),
    "bvult": lambda a: a[0].value < a[1].value,
    "bvule": lambda a: a[0].value <= a[1].value,
    "and": lambda a: all(a),
    "or": lambda a: any(a),
    "ite": lambda a: a[1] if a[0] else a[2],
}


def apply_op(op: str, args: Sequence[Value]) -> Value:
    """
    Apply a signature operator to ground argument values

    Args:
        op: Operator name from the signature table
        args: Already evaluated arguments

    Returns:
        Value: Result of the operator
    """
    try:
        return _STRICT_OPS[op](args)
    except KeyError:
        raise EvaluationError(f"no semantics for operator '{op}'") from None


def evaluate(term: Term, env: Mapping[str, Value],
             definitions: Optional[Mapping[str, Lambda]] = None) -> Value:
    """
    Evaluate a term under a variable environment

    Args:
        term: Well-sorted term
        env: Binding of every free variable name to a value
        definitions: Bodies for CALL nodes (synth-fun candidates, macros)

    Returns:
        Value: The value of term under env

    Raises:
        UnboundVariableError: if a free variable has no binding
        EvaluationError: for calls of unknown functions
    """
    kind = term.kind
    if kind is TermKind.CONST:
        return term.value
    if kind is TermKind.VAR:
        try:
            return env[term.name]
        except KeyError:
            raise UnboundVariableError(term.name) from None
    if kind is TermKind.APPLY:
        op = term.op
        children = term.children
        if op == "ite":
            branch = children[1] if evaluate(children[0], env, definitions) else children[2]
            return evaluate(branch, env, definitions)
        if op == "and":
            return all(evaluate(c, env, definitions) for c in children)
        if op == "or":
            return any(evaluate(c, env, definitions) for c in children)
        if op == "=>":
            return (not evaluate(children[0], env, definitions)) or evaluate(children[1], env, definitions)
        return _STRICT_OPS[op]([evaluate(c, env, definitions) for c in children])
    if definitions is None or term.name not in definitions:
        raise EvaluationError(f"no definition for function '{term.name}'")
    fn = definitions[term.name]
    args = [evaluate(c, env, definitions) for c in term.children]
    return evaluate(fn.body, {p.name: a for p, a in zip(fn.params, args)}, definitions)


def holds(term: Term, env: Mapping[str, Value],
          definitions: Optional[Mapping[str, Lambda]] = None) -> bool:
    return bool(evaluate(term, env, definitions))


def default_value(sort: Sort) -> Value:
    if sort.kind is SortKind.INT:
        return 0
    if sort.kind is SortKind.BOOL:
        return False
    if sort.kind is SortKind.STRING:
        return ""
    if sort.kind is SortKind.BITVEC:
        return BitVecVal(sort.width, 0)
    raise EvaluationError(f"no default value for sort {sort}")


def complete_environment(env: Mapping[str, Value], variables: Sequence[Term]) -> Environment:
    """Fill missing variables with the default value of their sort"""
    result = dict(env)
    for var in variables:
        if var.name not in result:
            result[var.name] = default_value(var.sort)
    return result
