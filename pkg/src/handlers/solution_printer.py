"""
Solution output in SMT-LIB define-fun form
"""

from typing import List

from models.problem import SyGuSProblem, SynthFunDecl
from models.solution import SolveResult, Verdict
from models.term import Term


def format_define_fun(decl: SynthFunDecl, body: Term) -> str:
    """
    Render one definition

    Args:
        decl: Synth-fun being defined
        body: Solution body over decl.params

    Returns:
        str: (define-fun name ((arg sort)...) sort body)
    """
    args = " ".join(f"({p.name} {p.sort})" for p in decl.params)
    return f"(define-fun {decl.name} ({args}) {decl.return_sort} {body})"


def print_solution(problem: SyGuSProblem, result: SolveResult) -> str:
    """Text printed on stdout for a verdict, newline terminated"""
    if result.verdict is Verdict.INFEASIBLE:
        return "infeasible\n"
    if result.verdict is Verdict.UNKNOWN or result.solution is None:
        return "unknown\n"
    lines: List[str] = [format_define_fun(decl, result.solution.body(decl.name))
                        for decl in problem.synth_funs]
    return "\n".join(lines) + "\n"
