"""
SyGuS-IF 2.0 frontend
Parses problem text into a SyGuSProblem and expands inv-constraints
"""

import logging
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from models.exceptions import (LegacySyntaxError, NonLinearError, ParseError, SortError,
                               UnsupportedOperatorError)
from models.problem import (FunctionDef, GrammarDef, InvariantParts, InvConstraint, NonterminalDef,
                            Production, SyGuSProblem, SynthFunDecl, hole_var)
from models.term import (BOOL, INT, OPERATORS, STRING, BitVecVal, Sort, Term, bitvec_sort, mk_and,
                         mk_app, mk_bool, mk_call, mk_const, mk_int, mk_not, mk_var)
from utils.sexpr import SExpr, SList, Token, TokenKind, is_symbol, read_all

LEGACY_COMMANDS = {
    "declare-primed-var": "declare both the variable and its primed copy with declare-var",
    "declare-fun": "use declare-var for universally quantified variables",
    "synth-blocking-fun": "use synth-fun",
}

IGNORED_COMMANDS = ("set-feature", "set-info", "exit")

# operators accepted under another name
_ALIASES = {"bvugt": ("bvult", True), "bvuge": ("bvule", True)}
_CHAINABLE = ("<=", "<", ">=", ">", "=")


def _where(expr: SExpr) -> Tuple[int, int]:
    return getattr(expr, "line", 0), getattr(expr, "column", 0)


def _error(message: str, expr: SExpr) -> ParseError:
    line, column = _where(expr)
    return ParseError(message, line, column)


def _symbol(expr: SExpr, what: str) -> str:
    if not isinstance(expr, Token) or expr.kind is not TokenKind.SYMBOL:
        raise _error(f"expected {what}", expr)
    return expr.text


def _list(expr: SExpr, what: str) -> SList:
    if not isinstance(expr, SList):
        raise _error(f"expected {what}", expr)
    return expr


def parse_sort(expr: SExpr) -> Sort:
    if is_symbol(expr, "Int"):
        return INT
    if is_symbol(expr, "Bool"):
        return BOOL
    if is_symbol(expr, "String"):
        return STRING
    if isinstance(expr, SList) and len(expr) == 3 and is_symbol(expr[0], "_") \
            and is_symbol(expr[1], "BitVec"):
        width = expr[2]
        if not isinstance(width, Token) or width.kind is not TokenKind.NUMERAL or int(width.text) < 1:
            raise _error("bitvector width must be a positive numeral", expr)
        return bitvec_sort(int(width.text))
    raise _error(f"unsupported sort {expr}", expr)


class SygusParser:
    """Command-by-command reader building one SyGuSProblem"""

    def __init__(self):
        self.logic = "ALL"
        self.synth_funs: List[SynthFunDecl] = []
        self.universal_vars: Dict[str, Term] = {}
        self.constraints: List[Term] = []
        self.defined: Dict[str, FunctionDef] = {}
        self.inv_constraints: List[InvConstraint] = []
        self.options: List[Tuple[str, str]] = []
        self.checked = False

    # -- commands ------------------------------------------------------------

    def parse(self, text: str) -> SyGuSProblem:
        commands = read_all(text)
        if not commands:
            raise ParseError("expected command", 1, 1)
        for command in commands:
            self._command(command)
        if not self.synth_funs:
            raise ParseError("expected synth-fun or synth-inv declaration", 1, 1)
        if not self.checked:
            logging.warning("Input has no check-synth command; solving anyway")
        return SyGuSProblem(
            logic=self.logic,
            synth_funs=tuple(self.synth_funs),
            universal_vars=tuple(self.universal_vars.values()),
            constraints=tuple(self.constraints),
            defined_funs=tuple(self.defined.values()),
            inv_constraints=tuple(self.inv_constraints),
            options=tuple(self.options),
        )

    def _command(self, command: SExpr) -> None:
        if not isinstance(command, SList) or not command:
            raise _error("expected command", command)
        head = _symbol(command[0], "command name")
        args = command[1:]
        if head in LEGACY_COMMANDS:
            line, column = _where(command)
            raise LegacySyntaxError(f"'{head}' is SyGuS v1 syntax; {LEGACY_COMMANDS[head]}", line, column)
        handler: Optional[Callable[[SList, Sequence[SExpr]], None]] = {
            "set-logic": self._set_logic,
            "set-option": self._set_option,
            "declare-var": self._declare_var,
            "define-fun": self._define_fun,
            "synth-fun": self._synth_fun,
            "synth-inv": self._synth_inv,
            "constraint": self._constraint,
            "inv-constraint": self._inv_constraint,
            "check-synth": self._check_synth,
        }.get(head)
        if handler is not None:
            handler(command, args)
        elif head in IGNORED_COMMANDS:
            logging.warning(f"Ignoring unsupported command '{head}' at line {command.line}")
        else:
            raise _error(f"unknown command '{head}'", command)

    def _set_logic(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) != 1:
            raise _error("set-logic expects one logic name", command)
        self.logic = _symbol(args[0], "logic name")

    def _set_option(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) != 2 or not isinstance(args[0], Token) or args[0].kind is not TokenKind.KEYWORD:
            raise _error("set-option expects a keyword and a value", command)
        logging.warning(f"Ignoring option {args[0].text} {args[1]}")
        self.options.append((args[0].text, str(args[1])))

    def _declare_var(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) != 2:
            raise _error("declare-var expects a name and a sort", command)
        name = _symbol(args[0], "variable name")
        if name in self.universal_vars or self._function_named(name):
            raise _error(f"'{name}' is already declared", args[0])
        self.universal_vars[name] = mk_var(name, parse_sort(args[1]))

    def _params(self, expr: SExpr) -> Tuple[Term, ...]:
        params: List[Term] = []
        for item in _list(expr, "parameter list"):
            pair = _list(item, "(name sort) pair")
            if len(pair) != 2:
                raise _error("expected (name sort) pair", pair)
            name = _symbol(pair[0], "parameter name")
            if any(p.name == name for p in params):
                raise _error(f"duplicate parameter '{name}'", pair)
            params.append(mk_var(name, parse_sort(pair[1])))
        return tuple(params)

    def _define_fun(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) != 4:
            raise _error("define-fun expects name, parameters, sort and body", command)
        name = _symbol(args[0], "function name")
        params = self._params(args[1])
        sort = parse_sort(args[2])
        body = self.term(args[3], {p.name: p for p in params}, closed=True)
        if body.sort != sort:
            raise SortError(f"body of '{name}' has sort {body.sort}, declared {sort}", str(args[3]))
        self.defined[name] = FunctionDef(name, params, sort, body)

    def _synth_fun(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) not in (3, 4, 5):
            raise _error("synth-fun expects name, parameters, sort and an optional grammar", command)
        name = _symbol(args[0], "function name")
        params = self._params(args[1])
        sort = parse_sort(args[2])
        self._add_synth_fun(command, name, params, sort, args[3:])

    def _synth_inv(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) not in (2, 3, 4):
            raise _error("synth-inv expects name, parameters and an optional grammar", command)
        name = _symbol(args[0], "function name")
        self._add_synth_fun(command, name, self._params(args[1]), BOOL, args[2:])

    def _add_synth_fun(self, command: SList, name: str, params: Tuple[Term, ...], sort: Sort,
                       grammar_args: Sequence[SExpr]) -> None:
        if self._function_named(name):
            raise _error(f"'{name}' is already declared", command)
        grammar = None
        if len(grammar_args) == 1:
            line, column = _where(grammar_args[0])
            raise LegacySyntaxError("SyGuS v1 grammar syntax; predeclare nonterminals: "
                                    "((S Int) ...) ((S Int (productions)) ...)", line, column)
        if len(grammar_args) == 2:
            grammar = self._grammar(grammar_args[0], grammar_args[1], params, sort)
        self.synth_funs.append(SynthFunDecl(name, params, sort, grammar))

    def _constraint(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) != 1:
            raise _error("constraint expects one term", command)
        term = self.term(args[0], {})
        if term.sort != BOOL:
            raise SortError("constraint is not Bool", str(args[0]))
        self.constraints.append(term)

    def _inv_constraint(self, command: SList, args: Sequence[SExpr]) -> None:
        if len(args) != 4:
            raise _error("inv-constraint expects inv, pre, trans and post names", command)
        names = [_symbol(a, "function name") for a in args]
        self.inv_constraints.append(InvConstraint(*names, line=command.line, column=command.column))

    def _check_synth(self, command: SList, args: Sequence[SExpr]) -> None:
        self.checked = True

    def _function_named(self, name: str) -> bool:
        return name in self.defined or any(f.name == name for f in self.synth_funs)

    # -- grammars ------------------------------------------------------------

    def _grammar(self, decls: SExpr, bodies: SExpr, params: Tuple[Term, ...], sort: Sort) -> GrammarDef:
        declared: Dict[str, Sort] = {}
        for item in _list(decls, "nonterminal declarations"):
            pair = _list(item, "(symbol sort) pair")
            if len(pair) != 2:
                raise _error("expected (symbol sort) nonterminal declaration", pair)
            declared[_symbol(pair[0], "nonterminal")] = parse_sort(pair[1])
        if not declared:
            raise _error("grammar declares no nonterminals", decls)

        nonterminals: List[NonterminalDef] = []
        for item in _list(bodies, "grammar rules"):
            rule = _list(item, "grammar rule")
            if len(rule) != 3:
                raise _error("expected (symbol sort (productions)) rule", rule)
            symbol = _symbol(rule[0], "nonterminal")
            if symbol not in declared:
                raise _error(f"undeclared nonterminal '{symbol}'", rule)
            nt_sort = parse_sort(rule[1])
            if nt_sort != declared[symbol]:
                raise SortError(f"nonterminal '{symbol}' redeclared with sort {nt_sort}", str(rule))
            productions: List[Production] = []
            for prod in _list(rule[2], "production list"):
                productions.extend(self._production(prod, nt_sort, declared, params))
            nonterminals.append(NonterminalDef(symbol, nt_sort, tuple(productions)))

        if list(declared) != [nt.symbol for nt in nonterminals]:
            raise _error("grammar rules must follow the nonterminal declaration order", bodies)
        if nonterminals[0].sort != sort:
            raise SortError(f"grammar start symbol has sort {nonterminals[0].sort}, function returns {sort}",
                            nonterminals[0].symbol)
        return GrammarDef(tuple(nonterminals))

    def _production(self, expr: SExpr, sort: Sort, nonterminals: Dict[str, Sort],
                    params: Tuple[Term, ...]) -> List[Production]:
        if isinstance(expr, SList) and len(expr) == 2 and is_symbol(expr[0]) \
                and expr[0].text in ("Constant", "Variable", "InputVariable", "LocalVariable"):
            kind = expr[0].text
            marker_sort = parse_sort(expr[1])
            if marker_sort != sort:
                raise SortError(f"({kind} {marker_sort}) used in a {sort} nonterminal", str(expr))
            if kind == "Constant":
                return [Production(label=str(expr), constant_sort=sort)]
            if kind == "Variable":
                return [Production(label=p.name, template=p) for p in params if p.sort == sort]
            line, column = _where(expr)
            raise LegacySyntaxError(f"'{kind}' is SyGuS v1 syntax; use (Variable T)", line, column)

        holes: List[Term] = []
        hole_symbols: List[str] = []

        def allocate(symbol: str) -> Term:
            hole = hole_var(len(holes), nonterminals[symbol])
            holes.append(hole)
            hole_symbols.append(symbol)
            return hole

        scope = {p.name: p for p in params}
        template = self.term(expr, scope, nonterminals=nonterminals, allocate=allocate, closed=True)
        if template.sort != sort:
            raise SortError(f"production has sort {template.sort}, nonterminal is {sort}", str(expr))
        return [Production(label=str(expr), template=template, holes=tuple(holes),
                           hole_symbols=tuple(hole_symbols))]

    # -- terms ---------------------------------------------------------------

    def term(self, expr: SExpr, scope: Dict[str, Term], nonterminals: Optional[Dict[str, Sort]] = None,
             allocate: Optional[Callable[[str], Term]] = None, closed: bool = False) -> Term:
        """
        Parse a term

        Args:
            expr: S-expression
            scope: Local bindings (parameters, let variables)
            nonterminals: Grammar symbols allowed as holes
            allocate: Creates the hole variable for a nonterminal occurrence
            closed: When True, universal variables are not visible

        Returns:
            Term: well-sorted term
        """
        if isinstance(expr, Token):
            return self._atom(expr, scope, nonterminals, allocate, closed)
        if not expr:
            raise _error("empty application", expr)
        head = expr[0]
        if isinstance(head, SList):
            if len(head) == 3 and is_symbol(head[0], "_"):
                raise _error(f"unsupported indexed operator {head}", head)
            raise _error("expected operator symbol", head)
        if is_symbol(head, "_"):
            return self._indexed_literal(expr)
        op = _symbol(head, "operator")

        if op == "let":
            return self._let(expr, scope, nonterminals, allocate, closed)
        if op == "!":
            if len(expr) < 2:
                raise _error("annotation expects a term", expr)
            return self.term(expr[1], scope, nonterminals, allocate, closed)
        if op == "-" and len(expr) == 2 and isinstance(expr[1], Token) and expr[1].kind is TokenKind.NUMERAL:
            return mk_int(-int(expr[1].text))

        children = [self.term(e, scope, nonterminals, allocate, closed) for e in expr[1:]]
        try:
            return self._apply(op, children, expr)
        except NonLinearError as error:
            line, column = _where(expr)
            raise SortError(f"{error.message} at line {line}, column {column}", str(expr)) from None

    def _atom(self, token: Token, scope: Dict[str, Term], nonterminals: Optional[Dict[str, Sort]],
              allocate: Optional[Callable[[str], Term]], closed: bool) -> Term:
        kind = token.kind
        if kind is TokenKind.NUMERAL:
            return mk_int(int(token.text))
        if kind is TokenKind.STRING:
            return mk_const(token.text)
        if kind is TokenKind.BINARY:
            bits = token.text[2:]
            return mk_const(BitVecVal(len(bits), int(bits, 2)))
        if kind is TokenKind.HEXADECIMAL:
            digits = token.text[2:]
            return mk_const(BitVecVal(4 * len(digits), int(digits, 16)))
        if kind is TokenKind.DECIMAL:
            raise UnsupportedOperatorError(f"real literal '{token.text}' is not supported",
                                           token.line, token.column)
        if kind is not TokenKind.SYMBOL:
            raise _error(f"unexpected token '{token.text}'", token)
        name = token.text
        if name in scope:
            return scope[name]
        if nonterminals is not None and name in nonterminals:
            return allocate(name)
        if name in ("true", "false"):
            return mk_bool(name == "true")
        if not closed and name in self.universal_vars:
            return self.universal_vars[name]
        if name in self.defined and not self.defined[name].params:
            return self.defined[name].body
        raise _error(f"unknown symbol '{name}'", token)

    def _indexed_literal(self, expr: SList) -> Term:
        if len(expr) == 3 and is_symbol(expr[1]) and expr[1].text.startswith("bv") \
                and expr[1].text[2:].isdigit() and isinstance(expr[2], Token) \
                and expr[2].kind is TokenKind.NUMERAL:
            width = int(expr[2].text)
            value = int(expr[1].text[2:])
            if width < 1 or value >= (1 << width):
                raise _error(f"bitvector literal {expr} out of range", expr)
            return mk_const(BitVecVal(width, value))
        raise _error(f"unsupported indexed expression {expr}", expr)

    def _let(self, expr: SList, scope: Dict[str, Term], nonterminals, allocate, closed: bool) -> Term:
        if len(expr) != 3:
            raise _error("let expects bindings and a body", expr)
        inner = dict(scope)
        for binding in _list(expr[1], "let bindings"):
            pair = _list(binding, "(name term) binding")
            if len(pair) != 2:
                raise _error("expected (name term) binding", pair)
            inner[_symbol(pair[0], "let variable")] = self.term(pair[1], scope, nonterminals, allocate, closed)
        return self.term(expr[2], inner, nonterminals, allocate, closed)

    def _apply(self, op: str, children: List[Term], expr: SList) -> Term:
        synth = next((f for f in self.synth_funs if f.name == op), None)
        if synth is not None:
            self._check_arguments(op, synth.arg_sorts, children, expr)
            return mk_call(op, children, synth.return_sort)
        if op in self.defined:
            fn = self.defined[op]
            self._check_arguments(op, tuple(p.sort for p in fn.params), children, expr)
            return fn.as_lambda().apply(children)

        if op in _ALIASES:
            target, swap = _ALIASES[op]
            return mk_app(target, *(reversed(children) if swap else children))
        if op in ("distinct", "xor") and len(children) < 2:
            raise _error(f"'{op}' expects at least two arguments", expr)
        if op == "distinct":
            pairs = [mk_not(mk_app("=", a, b)) for i, a in enumerate(children) for b in children[i + 1:]]
            return mk_and(*pairs)
        if op == "xor":
            if any(c.sort != BOOL for c in children):
                raise SortError("'xor' expects Bool arguments", str(expr))
            result = children[0]
            for child in children[1:]:
                result = mk_not(mk_app("=", result, child))
            return result
        if op in _CHAINABLE and len(children) > 2:
            return mk_and(*[mk_app(op, a, b) for a, b in zip(children, children[1:])])
        if op == "=>" and len(children) > 2:
            result = children[-1]
            for child in reversed(children[:-1]):
                result = mk_app("=>", child, result)
            return result
        if op == "*" and len(children) > 2:
            result = children[-1]
            for child in reversed(children[:-1]):
                result = mk_app("*", child, result)
            return result
        if op == "+" and len(children) == 1:
            return children[0]
        if op not in OPERATORS:
            line, column = _where(expr)
            raise UnsupportedOperatorError(f"unsupported operator '{op}'", line, column)
        return mk_app(op, *children)

    def _check_arguments(self, name: str, sorts: Tuple[Sort, ...], children: List[Term], expr: SList) -> None:
        if tuple(c.sort for c in children) != sorts:
            raise SortError(f"arguments of '{name}' do not match its declaration", str(expr))


def parse_sygus(text: str) -> SyGuSProblem:
    """
    Parse SyGuS-IF 2.0 text

    Args:
        text: Problem source

    Returns:
        SyGuSProblem: well-sorted problem, inv-constraints not yet expanded

    Raises:
        ParseError: lexical or syntax error with line and column
        SortError: ill-sorted expression
    """
    try:
        return SygusParser().parse(text)
    except RecursionError:
        raise ParseError("expression nesting too deep") from None


def _primed_name(name: str, taken: set) -> str:
    """name! unless declared already, then name!1, name!2, ..."""
    candidate, suffix = name + "!", 0
    while candidate in taken:
        suffix += 1
        candidate = f"{name}!{suffix}"
    taken.add(candidate)
    return candidate


def expand_inv_constraint(problem: SyGuSProblem) -> SyGuSProblem:
    """
    Replace inv-constraints by their three implication constraints

    Args:
        problem: Parsed problem

    Returns:
        SyGuSProblem: problem with invariant set, or problem itself if no inv-constraint exists
    """
    if not problem.inv_constraints:
        return problem
    if len(problem.inv_constraints) > 1:
        first = problem.inv_constraints[1]
        raise ParseError("only one inv-constraint is supported", first.line, first.column)
    ic = problem.inv_constraints[0]

    def lookup_def(name: str, arity: int) -> FunctionDef:
        fn = problem.defined(name)
        if fn is None:
            raise ParseError(f"inv-constraint references undeclared function '{name}'", ic.line, ic.column)
        if len(fn.params) != arity or fn.return_sort != BOOL:
            raise SortError(f"'{name}' must be a Bool function of {arity} arguments", name)
        return fn

    inv = next((f for f in problem.synth_funs if f.name == ic.inv), None)
    if inv is None:
        raise ParseError(f"inv-constraint references undeclared function '{ic.inv}'", ic.line, ic.column)
    if inv.return_sort != BOOL:
        raise SortError(f"invariant '{ic.inv}' must return Bool", ic.inv)
    n = len(inv.params)
    pre, trans, post = lookup_def(ic.pre, n), lookup_def(ic.trans, 2 * n), lookup_def(ic.post, n)
    sorts = inv.arg_sorts
    for fn in (pre, post):
        if tuple(p.sort for p in fn.params) != sorts:
            raise SortError(f"'{fn.name}' argument sorts do not match '{inv.name}'", fn.name)
    if tuple(p.sort for p in trans.params) != sorts + sorts:
        raise SortError(f"'{trans.name}' argument sorts do not match '{inv.name}'", trans.name)

    state = inv.params
    taken = {v.name for v in problem.universal_vars} | {p.name for p in state}
    primed = tuple(mk_var(_primed_name(p.name, taken), p.sort) for p in state)
    inv_now = mk_call(inv.name, state, BOOL)
    inv_next = mk_call(inv.name, primed, BOOL)
    constraints = (
        mk_app("=>", pre.as_lambda().apply(state), inv_now),
        mk_app("=>", mk_app("and", inv_now, trans.as_lambda().apply(state + primed)), inv_next),
        mk_app("=>", inv_now, post.as_lambda().apply(state)),
    )
    variables = list(problem.universal_vars)
    for var in state + primed:
        if var not in variables:
            variables.append(var)
    logging.debug(f"Expanded inv-constraint for {inv.name} over {len(state)} state variables")
    return replace(
        problem,
        universal_vars=tuple(variables),
        constraints=problem.constraints + constraints,
        inv_constraints=(),
        invariant=InvariantParts(inv.name, pre, trans, post, state, primed),
    )


def load_problem(text: str) -> SyGuSProblem:
    """Parse and expand in one step"""
    problem = parse_sygus(text)
    try:
        return expand_inv_constraint(problem)
    except RecursionError:
        raise ParseError("invariant definitions nested too deep") from None
