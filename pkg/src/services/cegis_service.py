"""
Counterexample-guided inductive synthesis over the enumerator
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from models.datatype import DatatypeGrammar, EmbeddedTerm, grammar_for
from models.problem import SyGuSProblem
from models.solution import Provenance, Solution, SolveResult
from models.term import (INT, STRING, Environment, Lambda, Term, beta_reduce, mk_and, mk_const,
                         mk_var, substitute)
from services.base_service import Budget, SynthesisService
from services.enumerator import EnumContext, Exhausted, next_candidate
from services.lia_solver import LiaStatus, is_lia, qf_lia_sat
from services.verifier import Verifier
from utils.evaluator import complete_environment, holds
from utils.sampling import BoundedDomain, alphabet_for, sample_points

Wrap = Callable[[Term], Term]


@dataclass
class RefinementState:
    """Counterexamples collected so far; each one refuted an earlier candidate"""
    counterexamples: List[Environment] = field(default_factory=list)
    candidates_tried: int = 0
    started: float = field(default_factory=time.monotonic)

    def add(self, env: Environment) -> None:
        if env not in self.counterexamples:
            self.counterexamples.append(env)

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started


def problem_grammar(problem: SyGuSProblem) -> DatatypeGrammar:
    """Embedded grammar of the single synth-fun, defaulted from the logic when absent"""
    decl = problem.synth_fun
    return grammar_for(decl, problem.logic, problem.int_literals(), problem.literals(STRING))


def enumeration_context(problem: SyGuSProblem, service: SynthesisService, budget: Optional[Budget] = None,
                        points: Optional[List[Environment]] = None, observational: bool = False,
                        target: Optional[str] = None,
                        grammar: Optional[DatatypeGrammar] = None) -> EnumContext:
    decl = problem.synth_fun
    if points is None:
        points = sample_points(decl.params, service.config, alphabet_for(problem.string_alphabet()),
                               problem.int_literals())
    return EnumContext(grammar or problem_grammar(problem), points, service.config, target=target,
                       observational=observational, stats=service.stats, budget=budget)


class CegisService(SynthesisService):
    """Enumerative CEGIS, the fast strategy"""

    def __init__(self, config, stats=None, verifier: Optional[Verifier] = None):
        super().__init__(config, stats)
        self.verifier = verifier or Verifier(config, self.stats)

    def applies_to(self, problem: SyGuSProblem) -> bool:
        return len(problem.synth_funs) == 1

    def solve(self, problem: SyGuSProblem, budget: Budget) -> SolveResult:
        ctx = enumeration_context(problem, self, budget)
        return self.solve_cegis(problem, ctx, budget)

    def solve_cegis(self, problem: SyGuSProblem, ctx: EnumContext, budget: Budget,
                    wrap: Optional[Wrap] = None, state: Optional[RefinementState] = None) -> SolveResult:
        """
        Refinement loop between the enumerator and the verifier

        Args:
            problem: Single synth-fun problem
            ctx: Enumeration state for its grammar
            budget: Candidate and time allowance
            wrap: Maps an enumerated body to the body that is checked and returned
            state: Counterexamples to start from

        Returns:
            SolveResult: verified solution, infeasible on exact exhaustion, unknown otherwise
        """
        decl = problem.synth_fun
        wrap = wrap or (lambda t: t)
        state = state or RefinementState()
        spec = problem.specification()
        all_exact = True

        while not budget.expired():
            candidate = next_candidate(ctx)
            if isinstance(candidate, Exhausted):
                return self._exhausted(candidate, all_exact, state)
            budget.tick()
            state.candidates_tried += 1

            if candidate.has_hole:
                repaired, exact = self.repair_constants(problem, candidate, state, budget, wrap)
                all_exact = all_exact and exact
                if repaired is not None:
                    logging.info(f"Constant repair produced {repaired.term} after "
                                 f"{state.candidates_tried} candidates")
                    return SolveResult.solved(Solution({decl.name: wrap(repaired.term)},
                                                       Provenance.CONSTANT_REPAIR))
                continue

            body = wrap(candidate.term)
            definitions = {decl.name: Lambda(decl.params, body)}
            if any(not holds(spec, env, definitions) for env in state.counterexamples):
                self.stats.increment("fast_rejections")
                continue

            logging.debug(f"Verifying candidate {body}")
            outcome = self.verifier.check_candidate(problem, Solution({decl.name: body}))
            if outcome.is_valid:
                logging.info(f"CEGIS found {body} after {state.candidates_tried} candidates, "
                             f"{len(state.counterexamples)} counterexamples")
                return SolveResult.solved(Solution({decl.name: body}, Provenance.ENUMERATIVE))
            if outcome.is_counterexample:
                state.add(outcome.counterexample)
            else:
                all_exact = False

        return SolveResult.unknown("budget")

    def _exhausted(self, exhausted: Exhausted, all_exact: bool, state: RefinementState) -> SolveResult:
        if exhausted.is_finite and all_exact:
            logging.info(f"Grammar exhausted after {state.candidates_tried} refuted candidates")
            return SolveResult.infeasible("finite grammar refuted")
        logging.info(f"Enumeration stopped: {exhausted.reason}")
        return SolveResult.unknown(exhausted.reason)

    # -- constant repair -------------------------------------------------------

    def repair_constants(self, problem: SyGuSProblem, template: EmbeddedTerm, state: RefinementState,
                         budget: Optional[Budget] = None,
                         wrap: Optional[Wrap] = None) -> Tuple[Optional[EmbeddedTerm], bool]:
        """
        Solve for the HOLE slots of a template

        Args:
            problem: Single synth-fun problem
            template: Enumerated term with at least one HOLE
            state: Counterexamples seeding the point set
            budget: Time allowance
            wrap: As in solve_cegis

        Returns:
            Tuple[Optional[EmbeddedTerm], bool]: filled template or None, and whether a
            failure was proven (False when the search was only bounded)
        """
        decl = problem.synth_fun
        wrap = wrap or (lambda t: t)
        holes = [mk_var(f"#c{i}", sort) for i, sort in enumerate(template.hole_sorts())]
        body = wrap(template.template_term(holes))
        spec = beta_reduce(problem.specification(), {decl.name: Lambda(decl.params, body)})
        variables = problem.universal_vars
        points = list(state.counterexamples[-8:]) or [complete_environment({}, variables)]

        for _ in range(self.config.max_repair_rounds):
            if budget is not None and budget.expired():
                return None, False
            self.stats.increment("repair_rounds")
            instances = [substitute(spec, {v: mk_const(env[v.name]) for v in variables}) for env in points]
            values, proven = self._solve_holes(mk_and(*instances), holes, problem.string_alphabet())
            if values is None:
                logging.debug(f"No constants for {template} ({'proven' if proven else 'bounded'})")
                return None, proven
            filled = template.fill(values)
            outcome = self.verifier.check_candidate(problem, Solution({decl.name: wrap(filled.term)}))
            if outcome.is_valid:
                return filled, True
            if not outcome.is_counterexample:
                return None, False
            points.append(outcome.counterexample)
            state.add(outcome.counterexample)
        return None, False

    def _solve_holes(self, phi: Term, holes: Sequence[Term],
                     alphabet: Sequence[str]) -> Tuple[Optional[list], bool]:
        if all(h.sort == INT for h in holes) and is_lia(phi):
            result = qf_lia_sat(phi, self.config.branch_depth, self.config.max_assignments)
            if result.status is LiaStatus.SAT:
                return [result.model.get(h.name, 0) for h in holes], True
            if result.status is LiaStatus.UNSAT:
                return None, True
        domain = BoundedDomain(holes, self.config, alphabet_for(alphabet))
        for env in domain:
            if holds(phi, env):
                return [env[h.name] for h in holes], True
        return None, domain.exhaustive
