"""
Shared fixtures; package imports are top-level, so src/ goes on sys.path
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from handlers.stats_handler import SolverStats  # noqa: E402
from handlers.sygus_parser import load_problem  # noqa: E402
from models.solver_config import SolverConfig  # noqa: E402

BENCHMARKS = ROOT / "benchmarks"


@pytest.fixture
def config() -> SolverConfig:
    return SolverConfig(timeout_ms=30_000)


@pytest.fixture
def stats() -> SolverStats:
    return SolverStats()


@pytest.fixture
def benchmark():
    """Loader for problems in the benchmark corpus"""
    def load(name: str):
        return load_problem((BENCHMARKS / name).read_text(encoding="utf-8"))
    return load
