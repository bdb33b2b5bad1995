"""
Invariant synthesis: post-condition strengthening and pointwise unification
over refinement lemmas
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Set, Tuple

from models.problem import SyGuSProblem
from models.solution import Provenance, Solution, SolveResult, Verdict
from models.term import TRUE, Environment, Term, mk_and
from services.base_service import Budget, SynthesisService
from services.cegis_service import CegisService, enumeration_context, problem_grammar
from services.pbe_service import UnificationLearner
from services.verifier import Verifier
from utils.evaluator import holds
from utils.rewriter import rewrite


@dataclass(frozen=True)
class InvariantProblem:
    """Pre, transition and post bodies over the state and primed variables"""
    problem: SyGuSProblem
    pre: Term
    trans: Term
    post: Term
    state_vars: Tuple[Term, ...]
    primed_vars: Tuple[Term, ...]
    strengthened: bool = False

    def overall(self, body: Term) -> Term:
        """Printed invariant for a searched body"""
        return rewrite(mk_and(self.post, body)) if self.strengthened else body

    def wrap(self) -> Optional[Callable[[Term], Term]]:
        return self.overall if self.strengthened else None


def invariant_problem(problem: SyGuSProblem) -> InvariantProblem:
    parts = problem.invariant
    state, primed = parts.state_vars, parts.primed_vars
    return InvariantProblem(
        problem,
        pre=parts.pre.as_lambda().apply(state),
        trans=parts.trans.as_lambda().apply(state + primed),
        post=parts.post.as_lambda().apply(state),
        state_vars=state,
        primed_vars=primed,
    )


def strengthen_post(problem: SyGuSProblem) -> InvariantProblem:
    """
    Search for I' with post(x) and I'(x) as the overall invariant

    A synth-fun with its own grammar keeps the plain target, since the
    conjunction would leave the grammar.
    """
    target = invariant_problem(problem)
    if problem.synth_fun.grammar is not None:
        logging.info("Invariant has a grammar; post-condition strengthening skipped")
        return target
    return InvariantProblem(target.problem, target.pre, target.trans, target.post,
                            target.state_vars, target.primed_vars, strengthened=True)


class LemmaKind(Enum):
    PRE = "pre"
    INDUCTION = "induction"
    POST = "post"


@dataclass(frozen=True)
class RefinementLemma:
    kind: LemmaKind
    point: Tuple[Tuple[str, object], ...]
    successor: Optional[Tuple[Tuple[str, object], ...]] = None


def _state(env: Environment, variables: Tuple[Term, ...], names: Tuple[Term, ...]):
    return tuple((n.name, env[v.name]) for v, n in zip(variables, names))


def classify_counterexample(target: InvariantProblem, body: Term, cex: Environment) -> Optional[RefinementLemma]:
    """Lemma for the constraint the invariant body violates at cex, None if it violates none"""
    state = target.state_vars
    now = _state(cex, state, state)
    successor = _state(cex, target.primed_vars, state)
    inv_now = holds(body, dict(now))
    if holds(target.pre, cex) and not inv_now:
        return RefinementLemma(LemmaKind.PRE, now)
    if inv_now and not holds(target.post, cex):
        return RefinementLemma(LemmaKind.POST, now)
    if inv_now and holds(target.trans, cex) and not holds(body, dict(successor)):
        return RefinementLemma(LemmaKind.INDUCTION, now, successor)
    return None


@dataclass
class PointLabels:
    """
    Labeled states from refinement lemmas.

    Hard labels come from pre and post violations; induction pairs push
    positive labels forward and negative labels backward.
    """
    points: List[Environment] = field(default_factory=list)
    index: Dict[tuple, int] = field(default_factory=dict)
    must_include: Set[int] = field(default_factory=set)
    must_exclude: Set[int] = field(default_factory=set)
    pairs: List[Tuple[int, int]] = field(default_factory=list)

    def point(self, state: tuple) -> int:
        if state not in self.index:
            self.index[state] = len(self.points)
            self.points.append(dict(state))
        return self.index[state]

    def add(self, lemma: RefinementLemma) -> None:
        i = self.point(lemma.point)
        if lemma.kind is LemmaKind.PRE:
            self.must_include.add(i)
        elif lemma.kind is LemmaKind.POST:
            self.must_exclude.add(i)
        else:
            pair = (i, self.point(lemma.successor))
            if pair not in self.pairs:
                self.pairs.append(pair)

    def propagate(self) -> Tuple[Dict[int, bool], bool]:
        """
        Labels at fixpoint

        Returns:
            Tuple[Dict[int, bool], bool]: label per point and whether some reachable
            point must also be excluded
        """
        positive = set(self.must_include)
        negative = set(self.must_exclude)
        changed = True
        while changed:
            changed = False
            for s, t in self.pairs:
                if s in positive and t not in positive:
                    positive.add(t)
                    changed = True
                if t in negative and s not in negative:
                    negative.add(s)
                    changed = True
        if positive & negative:
            return {}, True
        labels = {i: True for i in positive}
        labels.update({i: False for i in negative})
        # unresolved pairs: exclude the source, and every state leading to an excluded one
        changed = True
        while changed:
            changed = False
            for s, t in self.pairs:
                if s not in labels and labels.get(t, False) is False:
                    labels[s] = False
                    changed = True
        return labels, False


class InvariantService(SynthesisService):
    """Invariant track, by enumeration (fast) or pointwise unification (unif)"""

    def __init__(self, config, stats=None, verifier: Optional[Verifier] = None, mode: str = "fast"):
        super().__init__(config, stats)
        self.verifier = verifier or Verifier(config, self.stats)
        self.mode = mode
        self.cegis = CegisService(config, self.stats, self.verifier)

    def applies_to(self, problem: SyGuSProblem) -> bool:
        return problem.is_invariant_problem and len(problem.synth_funs) == 1

    def solve(self, problem: SyGuSProblem, budget: Budget) -> SolveResult:
        strengthened = strengthen_post(problem)
        targets = [strengthened]
        if strengthened.strengthened:
            targets.append(invariant_problem(problem))

        result = SolveResult.unknown("budget")
        for position, target in enumerate(targets):
            share = budget.split(0.5) if position < len(targets) - 1 else budget.split(1.0)
            logging.info(f"Invariant search ({self.mode}, "
                         f"{'strengthened' if target.strengthened else 'plain'})")
            if self.mode == "unif":
                result = self.unif_pi_solve(target, share)
            else:
                ctx = enumeration_context(problem, self, share)
                result = self.cegis.solve_cegis(problem, ctx, share, wrap=target.wrap())
            budget.absorb(share)
            if result.is_solved:
                return result
            if result.verdict is Verdict.INFEASIBLE and (self.mode == "unif" or not target.strengthened):
                return result
        return result

    def unif_pi_solve(self, target: InvariantProblem, budget: Budget) -> SolveResult:
        """
        Alternate verification and unification over labeled states

        Args:
            target: Invariant problem, possibly strengthened
            budget: Time and candidate allowance

        Returns:
            SolveResult: verified invariant, infeasible on a labeling conflict, or unknown
        """
        problem = target.problem
        name = problem.synth_fun.name
        labels = PointLabels()
        learner = UnificationLearner(problem_grammar(problem), labels.points, self.config, self.stats,
                                     budget)
        body = TRUE

        while not budget.expired():
            overall = target.overall(body)
            outcome = self.verifier.check_candidate(problem, Solution({name: overall}))
            if outcome.is_valid:
                logging.info(f"Invariant {overall} after {len(labels.points)} labeled states")
                return SolveResult.solved(Solution({name: overall}, Provenance.INVARIANT_UNIFICATION))
            if not outcome.is_counterexample:
                return SolveResult.unknown(outcome.reason or "verification inconclusive")

            lemma = classify_counterexample(target, overall, outcome.counterexample)
            if lemma is None:
                logging.error(f"Counterexample does not refute {overall}")
                return SolveResult.unknown("invalid lemma")
            self.stats.increment("refinement_lemmas")
            logging.debug(f"Lemma {lemma.kind.value} at {dict(lemma.point)}")
            labels.add(lemma)

            assignment, conflict = labels.propagate()
            # positive labels are reachable from pre
            if conflict or any(label and not holds(target.post, labels.points[i])
                               for i, label in assignment.items()):
                logging.info("A reachable state violates the post-condition")
                return SolveResult.infeasible("reachable state violates post-condition")
            examples = sorted(assignment.items())
            if target.strengthened:
                examples = [(i, label) for i, label in examples
                            if label or holds(target.post, labels.points[i])]
            learned = learner.learn(examples) if examples else None
            if learned is None:
                return SolveResult.unknown("budget" if budget.expired() else "no consistent invariant")
            body = learned.term

        return SolveResult.unknown("budget")
