"""
Size-ordered enumeration of grammar terms.

Terms of size k are assembled from pooled terms whose sizes sum to k-1;
a term enters a pool only if its rewritten form (and, for example-complete
point sets, its value signature) is new for its nonterminal.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

from handlers.stats_handler import SolverStats
from models.datatype import Constructor, DatatypeGrammar, EmbeddedTerm
from models.solver_config import SolverConfig
from models.term import Environment, Term, mk_var
from services.base_service import Budget
from utils.evaluator import apply_op, evaluate
from utils.rewriter import rewrite

BUDGET_CHECK_INTERVAL = 256


@dataclass(frozen=True)
class Exhausted:
    """Returned by next_candidate once no further term will be produced"""
    reason: str

    @property
    def is_finite(self) -> bool:
        return self.reason == "finite"


@dataclass
class SymmetryRules:
    forbidden: Set[Tuple[Constructor, int, Constructor]] = field(default_factory=set)
    commutative: Set[Constructor] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.forbidden) + len(self.commutative)

    def allows(self, ctor: Constructor, children) -> bool:
        for i, child in enumerate(children):
            if (ctor, i, child.constructor) in self.forbidden:
                return False
        return True


def _fresh(prefix: str, index: int, sort) -> Term:
    return mk_var(f"#{prefix}{index}", sort)


class EnumContext:
    def __init__(self, grammar: DatatypeGrammar, points: List[Environment], config: SolverConfig,
                 target: Optional[str] = None, observational: bool = False,
                 stats: Optional[SolverStats] = None, budget: Optional[Budget] = None):
        """
        Initialize enumeration state

        Args:
            grammar: Embedded grammar
            points: Sample environments over the synth-fun parameters
            config: max_size and symmetry_breaking
            target: Nonterminal whose terms are yielded (grammar start by default)
            observational: Prune on value signature alone; only sound when points are
                every input the specification constrains
            stats: Shared counters
            budget: Checked while filling pools
        """
        self.grammar = grammar
        self.points = list(points)
        self.config = config
        self.target = target or grammar.start
        self.observational = observational
        self.stats = stats or SolverStats()
        self.budget = budget
        self.pools: Dict[str, Dict[int, List[EmbeddedTerm]]] = {s: {} for s in grammar.symbols}
        self.keys: Dict[str, Dict[Term, EmbeddedTerm]] = {s: {} for s in grammar.symbols}
        self.signatures: Dict[str, Dict[tuple, EmbeddedTerm]] = {s: {} for s in grammar.symbols}
        self.rules = derive_symmetry_rules(self) if config.symmetry_breaking else SymmetryRules()
        self.yielded = 0
        self.current_size = 0
        self.exhausted: Optional[Exhausted] = None
        self._leaf_signatures: Dict[Constructor, tuple] = {}
        self._built = 0
        self._stream = self._generate()
        logging.debug(f"Enumerator for {self.target}: {len(self.rules)} symmetry rules, "
                      f"{len(self.points)} sample points")

    def terms(self, symbol: Optional[str] = None) -> Iterator[EmbeddedTerm]:
        """Pooled terms of a nonterminal in admission order"""
        pools = self.pools[symbol or self.target]
        for size in sorted(pools):
            yield from pools[size]

    # -- generation ----------------------------------------------------------

    def _generate(self) -> Iterator[EmbeddedTerm]:
        arities = [c.arity for ctors in self.grammar.constructors.values() for c in ctors]
        max_arity = max([1] + arities)
        order = [self.target] + [s for s in self.grammar.symbols if s != self.target]
        last_nonempty = 0
        size = 0
        while True:
            size += 1
            if size > self.config.max_size:
                self.exhausted = Exhausted("size limit")
                return
            if last_nonempty and size > max_arity * last_nonempty + 1:
                self.exhausted = Exhausted("finite")
                return
            if not last_nonempty and size > 1:
                self.exhausted = Exhausted("finite")
                return
            self.current_size = size
            produced = False
            for symbol in order:
                for term in self._build(symbol, size):
                    produced = True
                    if symbol == self.target:
                        yield term
                if self.exhausted is not None:
                    return
            if produced:
                last_nonempty = size

    def _build(self, symbol: str, size: int) -> Iterator[EmbeddedTerm]:
        pool = self.pools[symbol].setdefault(size, [])
        for ctor in self.grammar.constructors[symbol]:
            if ctor.arity == 0:
                if size == 1:
                    candidate = EmbeddedTerm(ctor)
                    if not is_redundant(self, candidate):
                        pool.append(candidate)
                        yield candidate
                continue
            for sizes in _compositions(size - 1, ctor.arity):
                lists = [self.pools[s].get(k, []) for s, k in zip(ctor.field_symbols, sizes)]
                if not all(lists):
                    continue
                for combo in itertools.product(*[list(enumerate(lst)) for lst in lists]):
                    self._built += 1
                    if self._built % BUDGET_CHECK_INTERVAL == 0 and self.budget is not None \
                            and self.budget.expired():
                        self.exhausted = Exhausted("budget")
                        return
                    children = [child for _, child in combo]
                    if ctor in self.rules.commutative and \
                            (sizes[0], combo[0][0]) > (sizes[1], combo[1][0]):
                        self.stats.increment("symmetry_pruned")
                        continue
                    if not self.rules.allows(ctor, children):
                        self.stats.increment("symmetry_pruned")
                        continue
                    candidate = EmbeddedTerm(ctor, children)
                    if not is_redundant(self, candidate):
                        pool.append(candidate)
                        yield candidate

    def signature(self, term: EmbeddedTerm) -> Optional[tuple]:
        """Values of a HOLE-free term on the sample points, from child signatures"""
        if term.signature is not None or term.has_hole:
            return term.signature
        ctor = term.constructor
        template = ctor.template
        if ctor.is_constant_slot:
            term.signature = (term.value,) * len(self.points)
            return term.signature
        if not term.children:
            cached = self._leaf_signatures.get(ctor)
            if cached is None:
                cached = tuple(evaluate(template, env) for env in self.points)
                self._leaf_signatures[ctor] = cached
            term.signature = cached
            return cached
        child_sigs = [self.signature(c) for c in term.children]
        holes = ctor.production.holes
        if template.is_var:
            term.signature = child_sigs[0]
        elif template.is_apply and template.children == holes:
            term.signature = tuple(apply_op(template.op, list(values)) for values in zip(*child_sigs))
        else:
            term.signature = tuple(
                evaluate(template, {**env, **{h.name: sig[i] for h, sig in zip(holes, child_sigs)}})
                for i, env in enumerate(self.points))
        return term.signature


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def rewrite_key(term: EmbeddedTerm) -> Term:
    """Rewritten unembedding; HOLE slots become fresh variables"""
    if term.has_hole:
        holes = [_fresh("c", i, sort) for i, sort in enumerate(term.hole_sorts())]
        return rewrite(term.template_term(holes))
    return rewrite(term.term)


def is_redundant(ctx: EnumContext, term: EmbeddedTerm) -> bool:
    """
    Redundancy check that admits the term when it is new

    Args:
        ctx: Enumeration state
        term: Candidate of some nonterminal

    Returns:
        bool: True when an equivalent term of the same nonterminal was admitted before
    """
    symbol = term.constructor.datatype
    key = rewrite_key(term)
    keys = ctx.keys[symbol]
    if key in keys:
        ctx.stats.increment("candidates_pruned")
        return True
    if not term.has_hole:
        signature = ctx.signature(term)
        if ctx.observational:
            if signature in ctx.signatures[symbol]:
                ctx.stats.increment("candidates_pruned")
                return True
            ctx.signatures[symbol][signature] = term
    keys[key] = term
    return False


def next_candidate(ctx: EnumContext) -> Union[EmbeddedTerm, Exhausted]:
    """
    Next non-redundant term of the target nonterminal

    Returns:
        EmbeddedTerm or Exhausted: terms come in nondecreasing size
    """
    if ctx.exhausted is not None:
        return ctx.exhausted
    try:
        term = next(ctx._stream)
    except StopIteration:
        return ctx.exhausted or Exhausted("finite")
    ctx.yielded += 1
    ctx.stats.increment("candidates_enumerated")
    return term


def derive_symmetry_rules(ctx: EnumContext) -> SymmetryRules:
    """
    Forbidden child patterns whose rewritten form is a smaller term of the same nonterminal

    Returns:
        SymmetryRules: identity, annihilator and involution patterns plus commutative constructors
    """
    rules = SymmetryRules()
    grammar = ctx.grammar
    for symbol, ctors in grammar.constructors.items():
        leaves = {c.template for c in ctors if c.arity == 0 and not c.is_constant_slot}
        for ctor in ctors:
            if ctor.arity == 0 or ctor.is_constant_slot:
                continue
            holes = ctor.production.holes
            outer = [_fresh("s", j, h.sort) for j, h in enumerate(holes)]
            template = ctor.template
            if ctor.arity == 2 and ctor.field_symbols[0] == ctor.field_symbols[1] \
                    and template.is_apply and template.children == holes:
                if rewrite(ctor.analog(outer)) is rewrite(ctor.analog(outer[::-1])):
                    rules.commutative.add(ctor)
            for i, field_symbol in enumerate(ctor.field_symbols):
                for child in grammar.constructors[field_symbol]:
                    if child.is_constant_slot:
                        continue
                    inner = [_fresh("t", j, h.sort) for j, h in enumerate(child.production.holes)]
                    args = list(outer)
                    args[i] = child.analog(inner)
                    pattern = rewrite(ctor.analog(args))
                    if _replaceable(pattern, symbol, i, ctor, outer, child, inner, leaves):
                        rules.forbidden.add((ctor, i, child))
    return rules


def _replaceable(pattern: Term, symbol: str, position: int, ctor: Constructor, outer: List[Term],
                 child: Constructor, inner: List[Term], leaves: Set[Term]) -> bool:
    if pattern.is_var:
        for j, var in enumerate(outer):
            if j != position and var is pattern and ctor.field_symbols[j] == symbol:
                return True
        for j, var in enumerate(inner):
            if var is pattern and child.field_symbols[j] == symbol:
                return True
        return False
    return pattern in leaves
