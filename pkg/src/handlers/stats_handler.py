"""
Run statistics reported by --stats
"""

from collections import Counter
from typing import List


class SolverStats:
    """Named counters shared by the engines of one solve session"""

    KEYS = (
        "candidates_enumerated",
        "candidates_pruned",
        "symmetry_pruned",
        "fast_rejections",
        "verifier_calls",
        "counterexamples",
        "cegqi_iterations",
        "repair_rounds",
        "refinement_lemmas",
        "pool_terms",
    )

    def __init__(self):
        self.counters: Counter = Counter({key: 0 for key in self.KEYS})
        self.strategy = ""
        self.verdict = ""

    def increment(self, key: str, amount: int = 1) -> None:
        self.counters[key] += amount

    def __getitem__(self, key: str) -> int:
        return self.counters[key]

    def as_lines(self) -> List[str]:
        """key=value lines in sorted key order"""
        items = dict(self.counters)
        if self.strategy:
            items["strategy"] = self.strategy
        if self.verdict:
            items["verdict"] = self.verdict
        return [f"{key}={items[key]}" for key in sorted(items)]
