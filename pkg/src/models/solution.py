"""
Solver verdicts and solutions
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from models.term import Lambda, Term


class Verdict(Enum):
    SOLVED = "solved"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


class Provenance(Enum):
    """Engine that produced a solution"""
    ENUMERATIVE = "fast"
    CONSTANT_REPAIR = "repair"
    SINGLE_INVOCATION = "si"
    PBE_UNIFICATION = "unif"
    INVARIANT_UNIFICATION = "unif-pi"


@dataclass(frozen=True)
class Solution:
    """One body per synth-fun, over that synth-fun's parameter variables"""
    bodies: Dict[str, Term]
    provenance: Provenance = Provenance.ENUMERATIVE

    def definitions(self, params: Dict[str, tuple]) -> Dict[str, Lambda]:
        return {name: Lambda(params[name], body) for name, body in self.bodies.items()}

    def body(self, name: str) -> Term:
        return self.bodies[name]


@dataclass
class SolveResult:
    verdict: Verdict
    solution: Optional[Solution] = None
    reason: str = ""

    @classmethod
    def solved(cls, solution: Solution) -> "SolveResult":
        return cls(Verdict.SOLVED, solution)

    @classmethod
    def infeasible(cls, reason: str = "") -> "SolveResult":
        return cls(Verdict.INFEASIBLE, None, reason)

    @classmethod
    def unknown(cls, reason: str = "") -> "SolveResult":
        return cls(Verdict.UNKNOWN, None, reason)

    @property
    def is_solved(self) -> bool:
        return self.verdict is Verdict.SOLVED

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict is Verdict.UNKNOWN else 0
