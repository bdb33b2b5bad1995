"""
Single-invocation conjectures: detection, counterexample-guided quantifier
instantiation over linear integer arithmetic, and solution construction
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from models.datatype import DatatypeGrammar, EmbeddedTerm
from models.problem import SyGuSProblem
from models.solution import Provenance, Solution, SolveResult
from models.term import (INT, Term, TermKind, find_calls, free_vars, iter_subterms, mk_and, mk_app,
                         mk_int, mk_not, mk_var, rebuild, substitute, transform)
from services.base_service import Budget, SynthesisService
from services.cegis_service import CegisService, RefinementState, enumeration_context, problem_grammar
from services.enumerator import Exhausted, next_candidate
from services.lia_solver import (LiaStatus, LinearAtom, is_lia, lift_ite, negate_atom, normalize_atom,
                                 qf_lia_sat)
from services.verifier import Verifier
from utils.evaluator import evaluate
from utils.rewriter import LinearForm, build_linear, rewrite

OUTPUT_VAR = "#y"
EXAMPLE_VAR = "#e"


@dataclass
class SingleInvocationProperty:
    """
    Constraint body Q[x, y] with y standing for the single invocation f(x).

    skolems replace x inside the instantiation loop; instances collects the
    chosen terms t_1..t_p over the skolems.
    """
    q_body: Term
    params: Tuple[Term, ...]
    output: Term
    skolems: Tuple[Term, ...]
    instances: List[Term] = field(default_factory=list)

    def instantiate(self, value: Term, over_skolems: bool = True) -> Term:
        """Q[k, value] (or Q[x, value] when over_skolems is False)"""
        mapping: Dict[Term, Term] = {self.output: value}
        if over_skolems:
            mapping.update(zip(self.params, self.skolems))
        return substitute(self.q_body, mapping)

    def to_params(self, term: Term) -> Term:
        return substitute(term, dict(zip(self.skolems, self.params)))


@dataclass(frozen=True)
class NotSingleInvocation:
    reason: str


@dataclass(frozen=True)
class CegqiResult:
    status: str
    instances: Tuple[Term, ...] = ()
    reason: str = ""


def _conjuncts(term: Term) -> List[Term]:
    if term.is_apply and term.op == "and":
        result: List[Term] = []
        for child in term.children:
            result.extend(_conjuncts(child))
        return result
    return [term]


def detect_single_invocation(problem: SyGuSProblem) -> Union[SingleInvocationProperty, NotSingleInvocation]:
    """
    Check that every conjunct invokes the synth-fun on one tuple of distinct variables

    Args:
        problem: Problem with exactly one synth-fun

    Returns:
        SingleInvocationProperty with the renamed body, or NotSingleInvocation
    """
    if len(problem.synth_funs) != 1:
        return NotSingleInvocation("several synth-funs")
    decl = problem.synth_fun
    params = decl.params
    output = mk_var(OUTPUT_VAR, decl.return_sort)
    canonical_call = None
    bodies: List[Term] = []

    for constraint in problem.constraints:
        for conjunct in _conjuncts(constraint):
            calls = find_calls(conjunct, decl.name)
            if not calls:
                if free_vars(conjunct):
                    return NotSingleInvocation("conjunct without invocation mentions variables")
                bodies.append(conjunct)
                continue
            args = calls[0].children
            if any(c.children != args for c in calls):
                return NotSingleInvocation("different invocation arguments")
            if not all(a.is_var for a in args) or len(set(args)) != len(args):
                return NotSingleInvocation("invocation arguments are not distinct variables")
            extra = [v for v in free_vars(conjunct) if v not in args]
            if extra:
                return NotSingleInvocation(f"variable {extra[0].name} is not an invocation argument")
            call = calls[0]

            def visit(node: Term, children) -> Term:
                if node is call:
                    return output
                return rebuild(node, children)

            replaced = transform(conjunct, visit)
            if find_calls(replaced):
                return NotSingleInvocation("nested invocation")
            bodies.append(substitute(replaced, dict(zip(args, params))))
            canonical_call = call

    if canonical_call is None:
        return NotSingleInvocation("synth-fun never invoked")
    skolems = tuple(mk_var(f"#k{i}", p.sort) for i, p in enumerate(params))
    return SingleInvocationProperty(mk_and(*bodies), params, output, skolems)


# ---------------------------------------------------------------------------
# Instantiation


def _literal_atoms(term: Term, model: Dict[str, int]) -> List[LinearAtom]:
    """Linear literals of term that hold in the model, in syntactic order"""
    found: List[LinearAtom] = []
    for sub in iter_subterms(lift_ite(term)):
        if not sub.is_apply or sub.op not in ("<=", "<", ">=", ">", "="):
            continue
        if sub.children[0].sort != INT:
            continue
        atom = normalize_atom(sub.op, sub.children[0], sub.children[1])
        if atom.holds(model):
            found.append(atom)
        elif not atom.is_equality:
            found.extend(a for a in negate_atom(atom) if a.holds(model))
    return found


def _bound_term(atom: LinearAtom, var: str) -> Optional[Tuple[str, Term]]:
    """
    Solve an atom for var

    Returns:
        ("lower" | "upper" | "equal", term) or None when var is absent or division is inexact
    """
    coeffs = dict(atom.coeffs)
    a = coeffs.pop(var, 0)
    if a == 0:
        return None
    # a*var + rest <= 0 (or = 0): var relates to -rest/a
    rest = LinearForm({mk_var(name, INT): c for name, c in coeffs.items()}, atom.constant)
    if any(c % a for c in rest.coeffs.values()) or rest.constant % a:
        return None
    bound = build_linear(LinearForm({t: -c // a for t, c in rest.coeffs.items()}, -rest.constant // a))
    if atom.is_equality:
        return "equal", bound
    return ("upper", bound) if a > 0 else ("lower", bound)


def select_instantiation(model: Dict[str, int], q_instance: Term, example: Term) -> Term:
    """
    Bound-based selection function for linear integer arithmetic

    Args:
        model: Model of the current constraint set including Q[k, e]
        q_instance: Q[k, e]
        example: The variable e

    Returns:
        Term: greatest true lower bound, else least true upper bound, else the model value of e
    """
    lowers: List[Tuple[int, Term]] = []
    uppers: List[Tuple[int, Term]] = []
    for atom in _literal_atoms(q_instance, model):
        solved = _bound_term(atom, example.name)
        if solved is None:
            continue
        kind, term = solved
        value = evaluate(term, model)
        if kind in ("lower", "equal"):
            lowers.append((value, term))
        if kind == "upper":
            uppers.append((value, term))
    if lowers:
        best = max(v for v, _ in lowers)
        return next(t for v, t in lowers if v == best)
    if uppers:
        best = min(v for v, _ in uppers)
        return next(t for v, t in uppers if v == best)
    return mk_int(model.get(example.name, 0))


def cegqi_solve(sip: SingleInvocationProperty, max_iterations: int, budget: Optional[Budget] = None,
                branch_depth: int = 200, max_assignments: int = 1 << 22, stats=None) -> CegqiResult:
    """
    Grow the instance set until the negated instances are unsatisfiable

    Returns:
        CegqiResult: status "closed" with the instances, "infeasible", or "unknown" with a reason
    """
    if not is_lia(sip.instantiate(mk_var(EXAMPLE_VAR, sip.output.sort))) or sip.output.sort != INT:
        return CegqiResult("unknown", reason="theory")
    example = mk_var(EXAMPLE_VAR, INT)
    q_example = sip.instantiate(example)
    seen: List[Term] = []

    for iteration in range(max_iterations):
        if budget is not None and budget.expired():
            return CegqiResult("unknown", reason="budget")
        if stats is not None:
            stats.increment("cegqi_iterations")
        closure = mk_and(*[mk_not(sip.instantiate(t)) for t in sip.instances])
        if sip.instances:
            result = qf_lia_sat(closure, branch_depth, max_assignments)
            if result.status is LiaStatus.UNSAT:
                logging.info(f"Instantiation closed after {iteration} iterations with "
                             f"{len(sip.instances)} instances")
                return CegqiResult("closed", tuple(sip.instances))
            if result.status is LiaStatus.UNKNOWN:
                return CegqiResult("unknown", reason=result.reason)
        model_result = qf_lia_sat(mk_and(closure, q_example), branch_depth, max_assignments)
        if model_result.status is LiaStatus.UNSAT:
            logging.info("Some input admits no output: conjecture is infeasible")
            return CegqiResult("infeasible")
        if model_result.status is LiaStatus.UNKNOWN:
            return CegqiResult("unknown", reason=model_result.reason)
        model = model_result.model
        term = select_instantiation(model, q_example, example)
        key = rewrite(term)
        if key in seen:
            term = mk_int(model.get(example.name, 0))
            key = rewrite(term)
            if key in seen:
                return CegqiResult("unknown", reason="no progress")
        logging.debug(f"Instance {len(sip.instances) + 1}: {term}")
        seen.append(key)
        sip.instances.append(term)
    return CegqiResult("unknown", reason="iteration limit")


def build_ite_solution(instances: Tuple[Term, ...], sip: SingleInvocationProperty, simplify: bool = True) -> Term:
    """ite(Q[x, t_p], t_p, ... ite(Q[x, t_2], t_2, t_1)) over the synth-fun parameters"""
    terms = [sip.to_params(t) for t in instances]
    solution = terms[0]
    for term in terms[1:]:
        solution = mk_app("ite", sip.instantiate(term, over_skolems=False), term, solution)
    return rewrite(solution) if simplify else solution


# ---------------------------------------------------------------------------
# Reconstruction


def _unify(template: Term, term: Term, holes: Tuple[Term, ...], binding: Dict[Term, Term]) -> bool:
    if template in holes:
        bound = binding.get(template)
        if bound is None:
            binding[template] = term
            return True
        return bound is term
    if template.kind is not term.kind or template.sort != term.sort:
        return False
    if template.kind in (TermKind.VAR, TermKind.CONST):
        return template is term
    if template.op != term.op or len(template.children) != len(term.children):
        return False
    return all(_unify(a, b, holes, binding) for a, b in zip(template.children, term.children))


def match_grammar(term: Term, grammar: DatatypeGrammar, symbol: Optional[str] = None,
                  visiting: Optional[set] = None) -> Optional[EmbeddedTerm]:
    """Top-down syntactic match of a term against the productions of a nonterminal"""
    symbol = symbol or grammar.start
    visiting = visiting or set()
    if (symbol, term) in visiting:
        return None
    visiting = visiting | {(symbol, term)}
    for ctor in grammar.constructors.get(symbol, ()):
        if ctor.is_constant_slot:
            if term.is_const and term.sort == ctor.production.constant_sort:
                return EmbeddedTerm(ctor, (), term.value)
            continue
        binding: Dict[Term, Term] = {}
        if not _unify(ctor.template, term, ctor.production.holes, binding):
            continue
        children = []
        for hole, child_symbol in zip(ctor.production.holes, ctor.field_symbols):
            child = match_grammar(binding[hole], grammar, child_symbol, visiting)
            if child is None:
                break
            children.append(child)
        else:
            return EmbeddedTerm(ctor, children)
    return None


class SingleInvocationService(SynthesisService):
    """Refutation-based synthesis for single-invocation LIA conjectures"""

    def __init__(self, config, stats=None, verifier: Optional[Verifier] = None):
        super().__init__(config, stats)
        self.verifier = verifier or Verifier(config, self.stats)
        self.cegis = CegisService(config, self.stats, self.verifier)

    def applies_to(self, problem: SyGuSProblem) -> bool:
        if len(problem.synth_funs) != 1 or problem.is_invariant_problem:
            return False
        sip = detect_single_invocation(problem)
        if isinstance(sip, NotSingleInvocation):
            return False
        return sip.output.sort == INT and is_lia(sip.instantiate(mk_var(EXAMPLE_VAR, INT)))

    def solve(self, problem: SyGuSProblem, budget: Budget) -> SolveResult:
        sip = detect_single_invocation(problem)
        if isinstance(sip, NotSingleInvocation):
            return SolveResult.unknown(sip.reason)
        outcome = cegqi_solve(sip, self.config.max_cegqi_iterations, budget, self.config.branch_depth,
                              self.config.max_assignments, self.stats)
        if outcome.status == "infeasible":
            return SolveResult.infeasible("no output for some input")
        if outcome.status != "closed":
            return SolveResult.unknown(outcome.reason)

        raw = build_ite_solution(outcome.instances, sip, simplify=False)
        solution = rewrite(raw)
        decl = problem.synth_fun
        check = self.verifier.check_candidate(problem, Solution({decl.name: solution}))
        if not check.is_valid:
            logging.error(f"Instantiation solution {solution} failed verification")
            return SolveResult.unknown("solution rejected by verifier")
        logging.info(f"Single-invocation solution: {solution}")
        return self.reconstruct_in_grammar(solution, problem, budget, raw)

    def reconstruct_in_grammar(self, solution: Term, problem: SyGuSProblem, budget: Budget,
                               original: Optional[Term] = None) -> SolveResult:
        """
        Find a grammar term equivalent to a verified solution

        Returns:
            SolveResult: the solution itself when no grammar restricts it or it matches
            syntactically, an enumerated equivalent, or unknown
        """
        decl = problem.synth_fun
        if decl.grammar is None:
            return SolveResult.solved(Solution({decl.name: solution}, Provenance.SINGLE_INVOCATION))
        grammar = problem_grammar(problem)
        for variant in (original or solution, solution):
            matched = match_grammar(variant, grammar)
            if matched is not None:
                logging.info("Solution matches the grammar syntactically")
                return SolveResult.solved(Solution({decl.name: matched.term}, Provenance.SINGLE_INVOCATION))

        ctx = enumeration_context(problem, self, budget, grammar=grammar)
        expected = tuple(evaluate(solution, env) for env in ctx.points)
        repairs = RefinementState()
        while not budget.expired():
            candidate = next_candidate(ctx)
            if isinstance(candidate, Exhausted):
                break
            budget.tick()
            if candidate.has_hole:
                filled, _ = self.cegis.repair_constants(problem, candidate, repairs, budget)
                if filled is not None:
                    logging.info(f"Reconstructed solution in grammar by constant repair: {filled.term}")
                    return SolveResult.solved(Solution({decl.name: filled.term}, Provenance.SINGLE_INVOCATION))
                continue
            if ctx.signature(candidate) != expected:
                continue
            body = candidate.term
            if self.verifier.check_candidate(problem, Solution({decl.name: body})).is_valid:
                logging.info(f"Reconstructed solution in grammar: {body}")
                return SolveResult.solved(Solution({decl.name: body}, Provenance.SINGLE_INVOCATION))
        return SolveResult.unknown("reconstruction failed")
