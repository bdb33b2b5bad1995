"""
SyGuS problem data model
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

from models.term import INT, STRING, Lambda, Sort, Term, iter_subterms, mk_and, mk_var


def hole_var(index: int, sort: Sort) -> Term:
    """Placeholder variable for the index-th nonterminal reference of a production"""
    return mk_var(f"#h{index}", sort)


@dataclass(frozen=True)
class Production:
    """
    One grammar alternative.

    template is a term whose hole variables stand for nonterminal
    references (in hole order); constant_sort marks a (Constant T) slot.
    """
    label: str
    template: Optional[Term] = None
    holes: Tuple[Term, ...] = ()
    hole_symbols: Tuple[str, ...] = ()
    constant_sort: Optional[Sort] = None

    @property
    def is_constant_slot(self) -> bool:
        return self.constant_sort is not None


@dataclass(frozen=True)
class NonterminalDef:
    symbol: str
    sort: Sort
    productions: Tuple[Production, ...]


@dataclass(frozen=True)
class GrammarDef:
    nonterminals: Tuple[NonterminalDef, ...]

    @property
    def start(self) -> NonterminalDef:
        return self.nonterminals[0]

    def nonterminal(self, symbol: str) -> NonterminalDef:
        for nt in self.nonterminals:
            if nt.symbol == symbol:
                return nt
        raise KeyError(symbol)


@dataclass(frozen=True)
class SynthFunDecl:
    name: str
    params: Tuple[Term, ...]
    return_sort: Sort
    grammar: Optional[GrammarDef] = None

    @property
    def arg_sorts(self) -> Tuple[Sort, ...]:
        return tuple(p.sort for p in self.params)

    def signature(self) -> str:
        args = " ".join(f"({p.name} {p.sort})" for p in self.params)
        return f"({args}) {self.return_sort}"


@dataclass(frozen=True)
class FunctionDef:
    """A define-fun macro"""
    name: str
    params: Tuple[Term, ...]
    return_sort: Sort
    body: Term

    def as_lambda(self) -> Lambda:
        return Lambda(self.params, self.body)


@dataclass(frozen=True)
class InvConstraint:
    inv: str
    pre: str
    trans: str
    post: str
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class InvariantParts:
    """Definitions referenced by an expanded inv-constraint"""
    inv: str
    pre: FunctionDef
    trans: FunctionDef
    post: FunctionDef
    state_vars: Tuple[Term, ...]
    primed_vars: Tuple[Term, ...]


@dataclass(frozen=True)
class SyGuSProblem:
    logic: str
    synth_funs: Tuple[SynthFunDecl, ...]
    universal_vars: Tuple[Term, ...]
    constraints: Tuple[Term, ...]
    defined_funs: Tuple[FunctionDef, ...] = ()
    inv_constraints: Tuple[InvConstraint, ...] = ()
    invariant: Optional[InvariantParts] = None
    options: Tuple[Tuple[str, str], ...] = ()

    @property
    def is_invariant_problem(self) -> bool:
        return self.invariant is not None

    @property
    def synth_fun(self) -> SynthFunDecl:
        return self.synth_funs[0]

    def defined(self, name: str) -> Optional[FunctionDef]:
        for fn in self.defined_funs:
            if fn.name == name:
                return fn
        return None

    def specification(self) -> Term:
        """Conjunction of all constraints"""
        return mk_and(*self.constraints)

    def literals(self, sort: Sort) -> List:
        """Distinct literal values of a sort occurring in constraints and macros, in order"""
        found: List = []
        roots = list(self.constraints) + [fn.body for fn in self.defined_funs]
        for root in roots:
            for sub in iter_subterms(root):
                if sub.is_const and sub.sort == sort and sub.value not in found:
                    found.append(sub.value)
        return found

    def string_alphabet(self) -> List[str]:
        chars: List[str] = []
        for literal in self.literals(STRING):
            for ch in literal:
                if ch not in chars:
                    chars.append(ch)
        return chars

    def int_literals(self) -> List[int]:
        return [v for v in self.literals(INT)]
