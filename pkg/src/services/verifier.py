"""
Candidate verification: exact evaluation, the LIA core, then bounded search
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence

from handlers.stats_handler import SolverStats
from models.exceptions import NonLinearError
from models.problem import SyGuSProblem
from models.solution import Solution
from models.solver_config import SolverConfig
from models.term import Environment, Lambda, Term, beta_reduce, free_vars, mk_not
from services.lia_solver import LiaStatus, is_lia, qf_lia_sat
from utils.evaluator import complete_environment, holds
from utils.sampling import BoundedDomain, alphabet_for


class OutcomeKind(Enum):
    VALID = "valid"
    COUNTEREXAMPLE = "counterexample"
    UNKNOWN = "unknown"


@dataclass
class VerificationOutcome:
    kind: OutcomeKind
    counterexample: Optional[Environment] = None
    reason: str = ""
    exact: bool = True

    @property
    def is_valid(self) -> bool:
        return self.kind is OutcomeKind.VALID

    @property
    def is_counterexample(self) -> bool:
        return self.kind is OutcomeKind.COUNTEREXAMPLE


def candidate_definitions(problem: SyGuSProblem, candidate: Solution) -> Dict[str, Lambda]:
    return {decl.name: Lambda(decl.params, candidate.body(decl.name)) for decl in problem.synth_funs}


class Verifier:
    def __init__(self, config: SolverConfig, stats: Optional[SolverStats] = None):
        """
        Initialize verifier

        Args:
            config: Bounds for the fallback tier and LIA limits
            stats: Shared counters
        """
        self.config = config
        self.stats = stats or SolverStats()

    def check_candidate(self, problem: SyGuSProblem, candidate: Solution) -> VerificationOutcome:
        """
        Check a candidate against every constraint

        Args:
            problem: Problem whose constraints are checked
            candidate: Body per synth-fun, no HOLE

        Returns:
            VerificationOutcome: Valid, a counterexample over the universal variables, or Unknown
        """
        formula = beta_reduce(problem.specification(), candidate_definitions(problem, candidate))
        return self.check_formula(formula, problem.universal_vars, problem.string_alphabet())

    def check_formula(self, formula: Term, variables: Sequence[Term],
                      alphabet: Sequence[str] = ()) -> VerificationOutcome:
        """
        Validity of a closed-form formula over universally quantified variables

        Args:
            formula: Bool term without synth-fun calls
            variables: Variables the formula may mention
            alphabet: Characters of the problem, used by bounded string search

        Returns:
            VerificationOutcome: see check_candidate
        """
        self.stats.increment("verifier_calls")
        used = free_vars(formula)
        if not used:
            if holds(formula, {}):
                return VerificationOutcome(OutcomeKind.VALID)
            return self._counterexample({}, variables)

        if is_lia(formula):
            try:
                result = qf_lia_sat(mk_not(formula), self.config.branch_depth, self.config.max_assignments)
            except NonLinearError as error:
                logging.debug(f"LIA tier rejected formula: {error}")
                result = None
            if result is not None and result.status is LiaStatus.UNSAT:
                return VerificationOutcome(OutcomeKind.VALID)
            if result is not None and result.status is LiaStatus.SAT:
                return self._counterexample(result.model, variables)
            if result is not None:
                logging.debug(f"LIA tier inconclusive ({result.reason}); using bounded search")

        return self._bounded(formula, used, variables, alphabet)

    def _bounded(self, formula: Term, used: Sequence[Term], variables: Sequence[Term],
                 alphabet: Sequence[str]) -> VerificationOutcome:
        domain = BoundedDomain(sorted(used, key=lambda v: v.name), self.config, alphabet_for(alphabet))
        for env in domain:
            if not holds(formula, env):
                return self._counterexample(env, variables)
        if domain.exhaustive:
            return VerificationOutcome(OutcomeKind.VALID)
        if self.config.accept_bounded:
            return VerificationOutcome(OutcomeKind.VALID, reason="bounded", exact=False)
        return VerificationOutcome(OutcomeKind.UNKNOWN, reason="bounded", exact=False)

    def _counterexample(self, env: Dict, variables: Sequence[Term]) -> VerificationOutcome:
        self.stats.increment("counterexamples")
        full = complete_environment(env, variables)
        return VerificationOutcome(OutcomeKind.COUNTEREXAMPLE, full)
