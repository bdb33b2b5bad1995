"""
Programming-by-example: divide-and-conquer solution construction from
enumerated term pools (decision trees over ite, sequencing with str.++)
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from handlers.stats_handler import SolverStats
from models.datatype import DatatypeGrammar, EmbeddedTerm
from models.problem import SyGuSProblem
from models.solution import Provenance, Solution, SolveResult
from models.solver_config import SolverConfig
from models.term import BOOL, STRING, Environment, Term, Value
from services.base_service import Budget, SynthesisService
from services.cegis_service import problem_grammar
from services.enumerator import EnumContext, Exhausted, next_candidate
from services.verifier import Verifier
from utils.evaluator import evaluate

MAX_CONCAT_DEPTH = 8

Example = Tuple[int, Value]


@dataclass
class PBEInstance:
    """Input/output pairs of a synth-fun specified only on literal arguments"""
    examples: List[Tuple[Tuple[Value, ...], Value]] = field(default_factory=list)
    contradictory: bool = False

    def points(self, params: Sequence[Term]) -> List[Environment]:
        return [{p.name: v for p, v in zip(params, inputs)} for inputs, _ in self.examples]

    def outputs(self) -> List[Value]:
        return [output for _, output in self.examples]


@dataclass(frozen=True)
class NotPBE:
    reason: str


def _example_of(conjunct: Term, name: str) -> Optional[Tuple[Tuple[Value, ...], Value]]:
    def literal_call(term: Term) -> bool:
        return term.is_call and term.name == name and all(c.is_const for c in term.children)

    if literal_call(conjunct):
        return tuple(c.value for c in conjunct.children), True
    if conjunct.is_apply and conjunct.op == "not" and literal_call(conjunct.children[0]):
        return tuple(c.value for c in conjunct.children[0].children), False
    if conjunct.is_apply and conjunct.op == "=" and len(conjunct.children) == 2:
        left, right = conjunct.children
        if literal_call(left) and right.is_const:
            return tuple(c.value for c in left.children), right.value
        if literal_call(right) and left.is_const:
            return tuple(c.value for c in right.children), left.value
    return None


def is_pbe(problem: SyGuSProblem) -> Union[PBEInstance, NotPBE]:
    """
    Recognize a conjunction of input/output equalities

    Returns:
        PBEInstance (flagged contradictory when one input has two outputs) or NotPBE
    """
    if len(problem.synth_funs) != 1:
        return NotPBE("several synth-funs")
    decl = problem.synth_fun
    instance = PBEInstance()
    seen: Dict[Tuple[Value, ...], Value] = {}
    stack = list(problem.constraints)
    while stack:
        conjunct = stack.pop(0)
        if conjunct.is_apply and conjunct.op == "and":
            stack[:0] = list(conjunct.children)
            continue
        example = _example_of(conjunct, decl.name)
        if example is None:
            return NotPBE(f"constraint {conjunct} is not an example")
        inputs, output = example
        if inputs in seen:
            if seen[inputs] != output:
                logging.info(f"Contradictory examples for input {inputs}")
                instance.contradictory = True
            continue
        seen[inputs] = output
        instance.examples.append(example)
    if not instance.examples:
        return NotPBE("no examples")
    return instance


class TermPool:
    """Grammar terms of one nonterminal, pulled from the enumerator in chunks"""

    def __init__(self, ctx: EnumContext, budget: Optional[Budget] = None):
        self.ctx = ctx
        self.budget = budget
        self.terms: List[EmbeddedTerm] = []
        self.exhausted = False
        self._values: List[List[Value]] = []

    def __len__(self) -> int:
        return len(self.terms)

    def grow(self, count: int) -> int:
        added = 0
        while added < count and not self.exhausted:
            if self.budget is not None and self.budget.expired():
                break
            candidate = next_candidate(self.ctx)
            if isinstance(candidate, Exhausted):
                self.exhausted = True
                break
            if candidate.has_hole:
                continue
            self.terms.append(candidate)
            self._values.append([])
            added += 1
            if self.budget is not None:
                self.budget.tick()
        self.ctx.stats.increment("pool_terms", added)
        return added

    def values(self, index: int, points: Sequence[Environment]) -> List[Value]:
        """Values of a pooled term on the points, extended when points were added"""
        cached = self._values[index]
        if len(cached) < len(points):
            term = self.terms[index].term
            for env in points[len(cached):]:
                cached.append(evaluate(term, env))
        return cached


def _entropy(labels: Sequence[bool]) -> float:
    if not labels:
        return 0.0
    total = len(labels)
    result = 0.0
    for count in Counter(labels).values():
        p = count / total
        result -= p * math.log2(p)
    return result


def information_gain(labels: Sequence[bool], split: Sequence[bool]) -> float:
    left = [label for label, s in zip(labels, split) if s]
    right = [label for label, s in zip(labels, split) if not s]
    total = len(labels)
    return _entropy(labels) - (len(left) / total) * _entropy(left) - (len(right) / total) * _entropy(right)


class UnificationLearner:
    """
    Builds grammar terms agreeing with labeled points from two term pools:
    return terms of the start symbol and conditions of the Bool nonterminal
    feeding its ite production.
    """

    def __init__(self, grammar: DatatypeGrammar, points: List[Environment], config: SolverConfig,
                 stats: Optional[SolverStats] = None, budget: Optional[Budget] = None,
                 observational: bool = False):
        self.grammar = grammar
        self.points = points
        self.config = config
        self.stats = stats or SolverStats()
        self.budget = budget
        start = grammar.start
        self.ite = next((c for c in grammar.constructors[start]
                         if c.template is not None and c.template.is_apply and c.template.op == "ite"
                         and c.template.children == c.production.holes), None)
        self.conjunction = grammar.find_production(start, "and", (start, start))
        self.disjunction = grammar.find_production(start, "or", (start, start))
        self.negation = grammar.find_production(start, "not", (start,))
        self.concat = grammar.find_production(start, "str.++", (start, start))

        if self.ite is not None:
            condition_symbol = self.ite.field_symbols[0]
        elif grammar.theory_sorts[start] == BOOL and self.conjunction and self.disjunction and self.negation:
            condition_symbol = start
        else:
            condition_symbol = None
        self.returns = TermPool(self._context(start, observational), budget)
        self.conditions = TermPool(self._context(condition_symbol, observational), budget) \
            if condition_symbol else None
        self._turn = 0

    def _context(self, symbol: str, observational: bool) -> EnumContext:
        return EnumContext(self.grammar, self.points, self.config, target=symbol,
                           observational=observational, stats=self.stats, budget=self.budget)

    @property
    def exhausted(self) -> bool:
        return self.returns.exhausted and (self.conditions is None or self.conditions.exhausted)

    def covered(self, examples: Sequence[Example]) -> bool:
        """Whether every example is met by some pooled return term"""
        remaining = set(range(len(examples)))
        for index in range(len(self.returns)):
            values = self.returns.values(index, self.points)
            remaining -= {i for i in remaining if values[examples[i][0]] == examples[i][1]}
            if not remaining:
                return True
        return False

    def grow(self, examples: Sequence[Example]) -> None:
        """Fill return terms until coverage, then alternate between the two pools"""
        chunk = self.config.pool_chunk
        if not self.covered(examples) and not self.returns.exhausted:
            self.returns.grow(chunk)
            return
        use_conditions = self.conditions is not None and not self.conditions.exhausted \
            and (self._turn % 2 == 0 or self.returns.exhausted)
        self._turn += 1
        if use_conditions:
            self.conditions.grow(chunk)
        elif not self.returns.exhausted:
            self.returns.grow(chunk)

    def learn(self, examples: Sequence[Example]) -> Optional[EmbeddedTerm]:
        """
        Grow the pools until a consistent term is built

        Args:
            examples: (point index, expected value) pairs

        Returns:
            Optional[EmbeddedTerm]: term satisfying every example, None when the pools or budget ran out
        """
        use_concat = self.concat is not None and self.grammar.theory_sorts[self.grammar.start] == STRING
        while True:
            if self.budget is not None and self.budget.expired():
                return None
            self.grow(examples)
            result = self.learn_concat(examples) if use_concat else None
            if result is None:
                result = self.learn_decision_tree(examples)
            if result is not None:
                if not self.satisfies(result, examples):
                    logging.error(f"Learned term {result} disagrees with its examples")
                    return None
                return result
            if self.exhausted:
                logging.info("Term pools exhausted without a consistent term")
                return None

    def satisfies(self, term: EmbeddedTerm, examples: Sequence[Example]) -> bool:
        body = term.term
        return all(evaluate(body, self.points[i]) == output for i, output in examples)

    # -- decision trees --------------------------------------------------------

    def learn_decision_tree(self, examples: Sequence[Example]) -> Optional[EmbeddedTerm]:
        """Decision tree over the current pools, or None when some split is impossible"""
        if not examples:
            return None
        return self._tree(list(examples))

    def _tree(self, examples: List[Example]) -> Optional[EmbeddedTerm]:
        best_index, best_cover = None, []
        for index in range(len(self.returns)):
            values = self.returns.values(index, self.points)
            cover = [values[i] == output for i, output in examples]
            if best_index is None or sum(cover) > sum(best_cover):
                best_index, best_cover = index, cover
                if all(cover):
                    break
        if best_index is None:
            return None
        if all(best_cover):
            return self.returns.terms[best_index]
        if self.conditions is None:
            return None

        best_condition, best_split, best_gain = None, None, -1.0
        for index in range(len(self.conditions)):
            values = self.conditions.values(index, self.points)
            split = [bool(values[i]) for i, _ in examples]
            if all(split) or not any(split):
                continue
            gain = information_gain(best_cover, split)
            if gain > best_gain:
                best_condition, best_split, best_gain = index, split, gain
        if best_condition is None:
            return None

        then_part = self._tree([e for e, s in zip(examples, best_split) if s])
        if then_part is None:
            return None
        else_part = self._tree([e for e, s in zip(examples, best_split) if not s])
        if else_part is None:
            return None
        return self.combine(self.conditions.terms[best_condition], then_part, else_part)

    def combine(self, condition: EmbeddedTerm, then_part: EmbeddedTerm,
                else_part: EmbeddedTerm) -> EmbeddedTerm:
        if self.ite is not None:
            return EmbeddedTerm(self.ite, (condition, then_part, else_part))
        # (c and a) or (not c and b)
        left = EmbeddedTerm(self.conjunction, (condition, then_part))
        right = EmbeddedTerm(self.conjunction, (EmbeddedTerm(self.negation, (condition,)), else_part))
        return EmbeddedTerm(self.disjunction, (left, right))

    # -- concatenation ---------------------------------------------------------

    def learn_concat(self, examples: Sequence[Example], depth: int = 0) -> Optional[EmbeddedTerm]:
        """
        Left-factor string outputs into str.++ of pooled prefix terms

        Returns:
            Optional[EmbeddedTerm]: None when neither a prefix term nor a tree fits
        """
        outputs = [output for _, output in examples]
        if depth >= MAX_CONCAT_DEPTH or all(o == "" for o in outputs):
            return self.learn_decision_tree(examples)

        best_index, best_consumed = None, 0
        for index in range(len(self.returns)):
            values = self.returns.values(index, self.points)
            prefixes = [values[i] for i, _ in examples]
            if not all(isinstance(p, str) and o.startswith(p) for p, o in zip(prefixes, outputs)):
                continue
            consumed = sum(len(p) for p in prefixes)
            if consumed > best_consumed:
                best_index, best_consumed = index, consumed
                if consumed == sum(len(o) for o in outputs):
                    break
        if best_index is None:
            return self.learn_decision_tree(examples)

        head = self.returns.terms[best_index]
        values = self.returns.values(best_index, self.points)
        residual = [(i, output[len(values[i]):]) for i, output in examples]
        if all(rest == "" for _, rest in residual):
            return head
        tail = self.learn_concat(residual, depth + 1)
        if tail is None:
            return None
        return EmbeddedTerm(self.concat, (head, tail))


class PbeService(SynthesisService):
    """Unification engine for example-only specifications"""

    def __init__(self, config, stats=None, verifier: Optional[Verifier] = None):
        super().__init__(config, stats)
        self.verifier = verifier or Verifier(config, self.stats)

    def applies_to(self, problem: SyGuSProblem) -> bool:
        return isinstance(is_pbe(problem), PBEInstance)

    def solve(self, problem: SyGuSProblem, budget: Budget) -> SolveResult:
        instance = is_pbe(problem)
        if isinstance(instance, NotPBE):
            return SolveResult.unknown(instance.reason)
        if instance.contradictory:
            return SolveResult.infeasible("contradictory examples")

        decl = problem.synth_fun
        points = instance.points(decl.params)
        learner = UnificationLearner(problem_grammar(problem), points, self.config, self.stats, budget,
                                     observational=True)
        examples = list(enumerate(instance.outputs()))
        logging.info(f"Unification over {len(examples)} examples")
        term = learner.learn(examples)
        if term is None:
            return SolveResult.unknown("budget" if budget.expired() else "pools exhausted")

        body = term.term
        if not self.verifier.check_candidate(problem, Solution({decl.name: body})).is_valid:
            logging.error(f"Unification result {body} failed verification")
            return SolveResult.unknown("solution rejected by verifier")
        logging.info(f"Unification solution: {body}")
        return SolveResult.solved(Solution({decl.name: body}, Provenance.PBE_UNIFICATION))
