"""
Validated solver configuration
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

STRATEGIES = ("auto", "fast", "si", "unif")


class SolverConfig(BaseModel):
    """Budgets, verification bounds and strategy for one solve session"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    strategy: Literal["auto", "fast", "si", "unif"] = "auto"
    timeout_ms: int = Field(60_000, gt=0)
    max_candidates: int = Field(1_000_000, gt=0)
    max_size: int = Field(12, gt=0)
    seed: int = 0

    # bounded verification domain
    int_bound: int = Field(32, gt=0)
    string_max_length: int = Field(6, ge=0)
    bv_exhaustive_width: int = Field(8, gt=0)
    bv_samples: int = Field(10_000, gt=0)
    max_points: int = Field(200_000, gt=0)
    accept_bounded: bool = False

    samples_per_arg: int = Field(5, gt=0)
    symmetry_breaking: bool = True

    branch_depth: int = Field(200, gt=0)
    max_assignments: int = Field(1 << 22, gt=0)

    rule_budget: int = Field(10_000, gt=0)

    pool_chunk: int = Field(1_000, gt=0)
    prefill_candidates: int = Field(2_000, ge=0)

    max_cegqi_iterations: int = Field(64, gt=0)
    max_repair_rounds: int = Field(32, gt=0)

    debug_log: bool = False
    verbose_log: bool = False
    quiet: bool = False
    logfile: str = ""
