# src/services/base_service.py
"""
Base service interface for synthesis engines
"""

import time
from abc import ABC, abstractmethod
from typing import Optional

from handlers.stats_handler import SolverStats
from models.problem import SyGuSProblem
from models.solution import SolveResult
from models.solver_config import SolverConfig


class Budget:
    """Wall-clock deadline plus a candidate allowance"""

    def __init__(self, timeout_ms: int, max_candidates: int):
        self.deadline = time.monotonic() + timeout_ms / 1000.0
        self.max_candidates = max_candidates
        self.candidates = 0

    @classmethod
    def from_config(cls, config: SolverConfig) -> "Budget":
        return cls(config.timeout_ms, config.max_candidates)

    def tick(self, count: int = 1) -> None:
        self.candidates += count

    def remaining_ms(self) -> int:
        return max(0, int((self.deadline - time.monotonic()) * 1000))

    def expired(self) -> bool:
        return self.candidates >= self.max_candidates or time.monotonic() >= self.deadline

    def split(self, fraction: float) -> "Budget":
        """Child budget owning a fraction of what is left"""
        child = Budget(int(self.remaining_ms() * fraction),
                       max(1, int((self.max_candidates - self.candidates) * fraction)))
        return child

    def absorb(self, child: "Budget") -> None:
        self.candidates += child.candidates


class SynthesisService(ABC):
    def __init__(self, config: SolverConfig, stats: Optional[SolverStats] = None):
        """
        Initialize engine

        Args:
            config: Validated solver configuration
            stats: Shared counters for --stats
        """
        self.config = config
        self.stats = stats or SolverStats()

    @abstractmethod
    def applies_to(self, problem: SyGuSProblem) -> bool:
        """
        Whether this engine can attempt the problem

        Returns:
            bool: False sends the dispatcher to its fallback
        """
        pass

    @abstractmethod
    def solve(self, problem: SyGuSProblem, budget: Budget) -> SolveResult:
        """
        Attempt the problem within the budget

        Args:
            problem: Parsed, expanded problem
            budget: Time and candidate allowance

        Returns:
            SolveResult: verdict with a verified solution when solved
        """
        pass
