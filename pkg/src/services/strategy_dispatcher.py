"""
Strategy selection and engine coordination
"""

import logging
from enum import Enum
from typing import Dict, List, Optional

from handlers.stats_handler import SolverStats
from models.problem import SyGuSProblem
from models.solution import SolveResult, Verdict
from models.solver_config import SolverConfig
from services.base_service import Budget, SynthesisService
from services.cegis_service import CegisService, enumeration_context
from services.invariant_service import InvariantService
from services.lia_solver import is_lia
from services.pbe_service import PBEInstance, PbeService, is_pbe
from services.single_invocation_service import SingleInvocationService
from services.verifier import Verifier
from utils.rewriter import configure_rewriter


class Strategy(Enum):
    """Strategy names accepted by --strategy"""
    AUTO = "auto"
    FAST = "fast"
    SI = "si"
    UNIF = "unif"


class Engine(Enum):
    """Engines a strategy plan is made of"""
    CEGIS = "cegis"
    PBE_PREFILL = "cegis-pbe"
    SINGLE_INVOCATION = "si"
    PBE_UNIFICATION = "unif"
    INVARIANT_FAST = "inv-fast"
    INVARIANT_UNIF = "inv-unif"


class StrategyDispatcher:
    def __init__(self, config: SolverConfig, stats: Optional[SolverStats] = None):
        """
        Initialize dispatcher

        Args:
            config: Validated solver configuration
            stats: Counters shared by every engine of this run
        """
        self.config = config
        self.stats = stats or SolverStats()
        configure_rewriter(config.rule_budget)
        self.verifier = Verifier(config, self.stats)

        cegis = CegisService(config, self.stats, self.verifier)
        self.services: Dict[Engine, SynthesisService] = {
            Engine.CEGIS: cegis,
            Engine.PBE_PREFILL: cegis,
            Engine.SINGLE_INVOCATION: SingleInvocationService(config, self.stats, self.verifier),
            Engine.PBE_UNIFICATION: PbeService(config, self.stats, self.verifier),
            Engine.INVARIANT_FAST: InvariantService(config, self.stats, self.verifier, mode="fast"),
            Engine.INVARIANT_UNIF: InvariantService(config, self.stats, self.verifier, mode="unif"),
        }

    def plan(self, problem: SyGuSProblem, strategy: Strategy) -> List[Engine]:
        """
        Engines to run in order for a problem under a strategy

        Returns:
            List[Engine]: later engines run only when earlier ones answer unknown
        """
        pbe = isinstance(is_pbe(problem), PBEInstance)
        if problem.is_invariant_problem:
            if strategy is Strategy.UNIF:
                return [Engine.INVARIANT_UNIF]
            if strategy is Strategy.SI:
                logging.warning("Strategy si does not apply to invariant problems; using fast")
            return [Engine.INVARIANT_FAST]

        if strategy is Strategy.SI:
            if self.services[Engine.SINGLE_INVOCATION].applies_to(problem):
                return [Engine.SINGLE_INVOCATION, Engine.CEGIS]
            logging.warning("Problem is not single-invocation linear arithmetic; using fast")
            return [Engine.CEGIS]
        if strategy is Strategy.UNIF:
            if pbe:
                return [Engine.PBE_UNIFICATION]
            logging.warning("Strategy unif needs examples or an invariant problem; using fast")
            return [Engine.CEGIS]
        if strategy is Strategy.FAST:
            return [Engine.PBE_PREFILL] if pbe else [Engine.CEGIS]

        if pbe:
            return [Engine.PBE_PREFILL, Engine.PBE_UNIFICATION]
        if self.services[Engine.SINGLE_INVOCATION].applies_to(problem):
            return [Engine.SINGLE_INVOCATION, Engine.CEGIS]
        return [Engine.CEGIS]

    def dispatch(self, problem: SyGuSProblem, strategy: Strategy = Strategy.AUTO) -> SolveResult:
        """
        Solve a problem with the engines of the selected strategy

        Args:
            problem: Parsed, expanded problem
            strategy: Strategy from the command line or configuration

        Returns:
            SolveResult: solutions are re-verified before being returned
        """
        if len(problem.synth_funs) != 1:
            logging.warning(f"{len(problem.synth_funs)} synth-funs; only single-function synthesis "
                            f"is supported")
            return self._finish(SolveResult.unknown("multiple synth-funs"))

        steps = self.plan(problem, strategy)
        self.stats.strategy = ",".join(step.value for step in steps)
        logging.info(f"Strategy {strategy.value}: {self.stats.strategy} "
                     f"(logic {problem.logic}, LIA spec: {is_lia(problem.specification())})")
        budget = Budget.from_config(self.config)
        result = SolveResult.unknown("budget")

        for position, step in enumerate(steps):
            if budget.expired():
                break
            last = position == len(steps) - 1
            result = self._run(step, problem, budget, last)
            if result.verdict is not Verdict.UNKNOWN:
                break
            if not last:
                logging.info(f"Engine {step.value} answered unknown ({result.reason}); "
                             f"continuing with {steps[position + 1].value}")

        if result.is_solved and not self.verifier.check_candidate(problem, result.solution).is_valid:
            logging.error("Final re-verification failed; withholding the solution")
            result = SolveResult.unknown("re-verification failed")
        return self._finish(result)

    def _run(self, step: Engine, problem: SyGuSProblem, budget: Budget, last: bool) -> SolveResult:
        service = self.services[step]
        if step is Engine.PBE_PREFILL:
            instance = is_pbe(problem)
            if instance.contradictory:
                return SolveResult.infeasible("contradictory examples")
            candidates = budget.max_candidates - budget.candidates
            if not last:
                candidates = min(candidates, self.config.prefill_candidates)
            share = Budget(budget.remaining_ms(), max(1, candidates))
            ctx = enumeration_context(problem, service, share,
                                      points=instance.points(problem.synth_fun.params), observational=True)
            result = service.solve_cegis(problem, ctx, share)
        else:
            share = budget.split(1.0)
            result = service.solve(problem, share)
        budget.absorb(share)
        return result

    def _finish(self, result: SolveResult) -> SolveResult:
        self.stats.verdict = result.verdict.value
        if result.verdict is Verdict.UNKNOWN:
            logging.info(f"Result unknown: {result.reason}")
        return result
