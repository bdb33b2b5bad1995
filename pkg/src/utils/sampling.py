"""
Sample points for the enumerator and bounded domains for the verifier
"""

import itertools
import random
from typing import Iterator, List, Optional, Sequence

from models.solver_config import SolverConfig
from models.term import BitVecVal, Environment, Sort, SortKind, Term, Value

FRESH_CHAR = "z"
MAX_SAMPLE_POINTS = 256


def alphabet_for(chars: Sequence[str]) -> List[str]:
    """Problem characters plus one character not occurring in the problem"""
    result = list(dict.fromkeys(chars))
    for candidate in FRESH_CHAR + "qxyabc0123456789":
        if candidate not in result:
            result.append(candidate)
            break
    return result


def corner_values(sort: Sort, alphabet: Sequence[str] = (), int_literals: Sequence[int] = ()) -> List[Value]:
    """Small hand-picked values of a sort, most interesting first"""
    if sort.kind is SortKind.INT:
        values: List[Value] = [0, 1, -1]
        for v in int_literals:
            for w in (v, v + 1, v - 1):
                if w not in values:
                    values.append(w)
        return values
    if sort.kind is SortKind.BOOL:
        return [False, True]
    if sort.kind is SortKind.STRING:
        return [""] + [ch for ch in alphabet[:3]]
    if sort.kind is SortKind.BITVEC:
        top = (1 << sort.width) - 1
        return list(dict.fromkeys(BitVecVal(sort.width, v) for v in (0, 1, top, top >> 1, (top >> 1) + 1)))
    return []


def random_value(sort: Sort, rng: random.Random, config: SolverConfig, alphabet: Sequence[str]) -> Value:
    if sort.kind is SortKind.INT:
        return rng.randint(-config.int_bound, config.int_bound)
    if sort.kind is SortKind.BOOL:
        return rng.random() < 0.5
    if sort.kind is SortKind.STRING:
        length = rng.randint(0, config.string_max_length)
        return "".join(rng.choice(alphabet) for _ in range(length)) if alphabet else ""
    if sort.kind is SortKind.BITVEC:
        return BitVecVal(sort.width, rng.getrandbits(sort.width))
    raise ValueError(f"no values for sort {sort}")


def is_exhaustive_sort(sort: Sort, config: SolverConfig) -> bool:
    """Finite domains the bounded search covers completely"""
    return sort.kind is SortKind.BOOL or \
        (sort.kind is SortKind.BITVEC and sort.width <= config.bv_exhaustive_width)


def domain_size(sort: Sort, config: SolverConfig, alphabet: Sequence[str]) -> int:
    if sort.kind is SortKind.INT:
        return 2 * config.int_bound + 1
    if sort.kind is SortKind.BOOL:
        return 2
    if sort.kind is SortKind.STRING:
        n = max(len(alphabet), 1)
        return sum(n ** k for k in range(config.string_max_length + 1))
    return 1 << sort.width


def domain_values(sort: Sort, config: SolverConfig, alphabet: Sequence[str]) -> Iterator[Value]:
    """Every value of the bounded domain, smallest first"""
    if sort.kind is SortKind.INT:
        yield 0
        for v in range(1, config.int_bound + 1):
            yield v
            yield -v
    elif sort.kind is SortKind.BOOL:
        yield False
        yield True
    elif sort.kind is SortKind.STRING:
        for length in range(config.string_max_length + 1):
            for chars in itertools.product(alphabet, repeat=length):
                yield "".join(chars)
    elif sort.kind is SortKind.BITVEC:
        for v in range(1 << sort.width):
            yield BitVecVal(sort.width, v)


def sample_points(variables: Sequence[Term], config: SolverConfig, alphabet: Sequence[str] = (),
                  int_literals: Sequence[int] = ()) -> List[Environment]:
    """
    Deterministic evaluation points for signature computation

    Args:
        variables: Synth-fun parameters
        config: Seed and samples_per_arg
        alphabet: String characters to draw from
        int_literals: Problem literals added to the Int corners

    Returns:
        List[Environment]: at most MAX_SAMPLE_POINTS points
    """
    if not variables:
        return [{}]
    rng = random.Random(config.seed)
    columns: List[List[Value]] = []
    for var in variables:
        values = corner_values(var.sort, alphabet, int_literals)
        attempts = 0
        while len(values) < len(corner_values(var.sort, alphabet, int_literals)) + config.samples_per_arg \
                and attempts < 8 * config.samples_per_arg:
            attempts += 1
            value = random_value(var.sort, rng, config, alphabet)
            if value not in values:
                values.append(value)
        columns.append(values)

    total = 1
    for column in columns:
        total *= len(column)
    if total <= MAX_SAMPLE_POINTS:
        rows = list(itertools.product(*columns))
    else:
        width = max(len(c) for c in columns)
        rows = [tuple(c[i % len(c)] for c in columns) for i in range(width)]
        seen = set(rows)
        while len(rows) < MAX_SAMPLE_POINTS:
            row = tuple(rng.choice(c) for c in columns)
            if row not in seen:
                seen.add(row)
                rows.append(row)
    return [{var.name: value for var, value in zip(variables, row)} for row in rows]


class BoundedDomain:
    """
    Points searched by the bounded verification tier.

    The domain is enumerated completely when its size is at most max_points,
    otherwise corner combinations are followed by seeded random samples.
    """

    def __init__(self, variables: Sequence[Term], config: SolverConfig, alphabet: Sequence[str]):
        self.variables = tuple(variables)
        self.config = config
        self.alphabet = list(alphabet)
        size = 1
        for var in self.variables:
            size *= domain_size(var.sort, config, self.alphabet)
            if size > config.max_points:
                break
        self.size: Optional[int] = size if size <= config.max_points else None
        self.exhaustive = self.size is not None and all(is_exhaustive_sort(v.sort, config)
                                                        for v in self.variables)

    def __iter__(self) -> Iterator[Environment]:
        names = [v.name for v in self.variables]
        if self.size is not None:
            columns = [list(domain_values(v.sort, self.config, self.alphabet)) for v in self.variables]
            for row in itertools.product(*columns):
                yield dict(zip(names, row))
            return
        corners = [corner_values(v.sort, self.alphabet) for v in self.variables]
        for row in itertools.product(*corners):
            yield dict(zip(names, row))
        rng = random.Random(self.config.seed)
        for _ in range(self.config.bv_samples):
            yield {v.name: random_value(v.sort, rng, self.config, self.alphabet) for v in self.variables}
