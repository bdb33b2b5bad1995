"""
Quantifier-free linear integer arithmetic satisfiability.

Boolean structure is explored by enumerating atom truth assignments over a
negation normal form; each conjunction of atoms is decided by a general
simplex over rationals with branch and bound for integrality.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

from models.exceptions import NonLinearError
from models.term import (BOOL, INT, SortKind, Term, iter_subterms, mk_and, mk_not, mk_or, rebuild,
                         transform)
from utils.evaluator import evaluate
from utils.rewriter import LinearForm, linearize

DEFAULT_BRANCH_DEPTH = 200
DEFAULT_MAX_ASSIGNMENTS = 1 << 22
MAX_BRANCH_NODES = 20_000

_INT_ATOM_OPS = ("<=", "<", ">=", ">")


class LiaStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class LiaResult:
    status: LiaStatus
    model: Dict[str, Union[int, bool]] = field(default_factory=dict)
    reason: str = ""

    @property
    def is_sat(self) -> bool:
        return self.status is LiaStatus.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is LiaStatus.UNSAT


@dataclass(frozen=True)
class LinearAtom:
    """sum(coeffs) + constant <= 0, or = 0 when is_equality"""
    coeffs: Tuple[Tuple[str, int], ...]
    constant: int
    is_equality: bool = False

    def holds(self, model: Dict[str, int]) -> bool:
        total = self.constant + sum(c * model.get(name, 0) for name, c in self.coeffs)
        return total == 0 if self.is_equality else total <= 0


# ---------------------------------------------------------------------------
# Fragment checks and normalization

def is_lia(term: Term) -> bool:
    """True when term uses only Bool connectives, Int variables and linear arithmetic"""
    for sub in iter_subterms(term):
        if sub.is_call:
            return False
        if sub.is_var and sub.sort not in (INT, BOOL):
            return False
        if sub.is_const and sub.sort not in (INT, BOOL):
            return False
        if sub.is_apply:
            if sub.op in ("+", "-", "*", "ite", "and", "or", "not", "=>") or sub.op in _INT_ATOM_OPS:
                continue
            if sub.op == "=" and sub.children[0].sort in (INT, BOOL):
                continue
            return False
    return True


def _linear_form(term: Term) -> LinearForm:
    form = linearize(term)
    for atom in form.coeffs:
        if not atom.is_var:
            raise NonLinearError("not a linear integer term", str(atom))
    return form


def normalize_atom(op: str, left: Term, right: Term) -> LinearAtom:
    """
    Linear constraint equivalent to (op left right) over the integers

    Strict bounds are tightened by one and coefficients are divided by their
    gcd with the constant rounded toward the feasible side.
    """
    diff = _linear_form(left).add(_linear_form(right), -1)
    if op in (">=", ">"):
        diff = diff.scale(-1)
    constant = diff.constant + (1 if op in ("<", ">") else 0)
    coeffs = {a.name: c for a, c in diff.coeffs.items()}
    is_equality = op == "="
    g = 0
    for c in coeffs.values():
        g = gcd(g, abs(c))
    if g > 1:
        coeffs = {name: c // g for name, c in coeffs.items()}
        if is_equality:
            if constant % g:
                return LinearAtom((), 1, False)
            constant //= g
        else:
            # sum <= -constant  becomes  sum/g <= floor(-constant/g)
            constant = -((-constant) // g)
    return LinearAtom(tuple(sorted(coeffs.items())), constant, is_equality)


def negate_atom(atom: LinearAtom) -> List[LinearAtom]:
    """Disjuncts equivalent to the negation of an inequality or equation"""
    flipped = tuple((n, -c) for n, c in atom.coeffs)
    if atom.is_equality:
        return [LinearAtom(atom.coeffs, atom.constant + 1), LinearAtom(flipped, -atom.constant + 1)]
    return [LinearAtom(flipped, -atom.constant + 1)]


def _replace(term: Term, target: Term, replacement: Term) -> Term:
    def visit(node: Term, children) -> Term:
        if node is target:
            return replacement
        return rebuild(node, children)

    return transform(term, visit)


def _first_int_ite(term: Term) -> Optional[Term]:
    for sub in iter_subterms(term):
        if sub.is_apply and sub.op == "ite" and sub.sort == INT:
            return sub
    return None


def lift_ite(term: Term) -> Term:
    """Move Int-sorted ite out of atoms into the Boolean structure"""
    if term.sort != BOOL:
        return term
    if term.is_apply and (term.op in _INT_ATOM_OPS or (term.op == "=" and term.children[0].sort == INT)):
        ite = _first_int_ite(term)
        if ite is None:
            return term
        cond, then, other = ite.children
        cond = lift_ite(cond)
        return mk_or(mk_and(cond, lift_ite(_replace(term, ite, then))),
                     mk_and(mk_not(cond), lift_ite(_replace(term, ite, other))))
    if term.is_apply:
        return rebuild(term, [lift_ite(c) for c in term.children])
    return term


# NNF nodes: ("and", [...]) / ("or", [...]) / ("atom", index) / ("bool", name, polarity) / ("const", bool)
_Node = tuple
_Found = Tuple["LiaResult", Dict[str, bool]]


class _Builder:
    def __init__(self):
        self.atoms: List[LinearAtom] = []
        self.atom_index: Dict[LinearAtom, int] = {}
        self.bool_vars: List[str] = []

    def atom(self, atom: LinearAtom) -> _Node:
        if not atom.coeffs:
            value = atom.constant == 0 if atom.is_equality else atom.constant <= 0
            return ("const", value)
        if atom not in self.atom_index:
            self.atom_index[atom] = len(self.atoms)
            self.atoms.append(atom)
        return ("atom", self.atom_index[atom])

    def nnf(self, term: Term, positive: bool = True) -> _Node:
        if term.is_const:
            return ("const", bool(term.value) == positive)
        if term.is_var:
            if term.name not in self.bool_vars:
                self.bool_vars.append(term.name)
            return ("bool", term.name, positive)
        op = term.op
        children = term.children
        if op == "not":
            return self.nnf(children[0], not positive)
        if op in ("and", "or"):
            kind = op if positive else ("or" if op == "and" else "and")
            return (kind, [self.nnf(c, positive) for c in children])
        if op == "=>":
            return self.nnf(mk_or(mk_not(children[0]), children[1]), positive)
        if op == "ite":
            cond, then, other = children
            return self.nnf(mk_or(mk_and(cond, then), mk_and(mk_not(cond), other)), positive)
        if op == "=" and children[0].sort == BOOL:
            a, b = children
            return self.nnf(mk_or(mk_and(a, b), mk_and(mk_not(a), mk_not(b))), positive)
        if op == "=" or op in _INT_ATOM_OPS:
            atom = normalize_atom(op, children[0], children[1])
            if positive:
                if atom.is_equality:
                    # split into two inequalities
                    flipped = tuple((n, -c) for n, c in atom.coeffs)
                    return ("and", [self.atom(LinearAtom(atom.coeffs, atom.constant)),
                                    self.atom(LinearAtom(flipped, -atom.constant))])
                return self.atom(atom)
            return ("or", [self.atom(a) for a in negate_atom(atom)])
        raise NonLinearError(f"operator '{op}' outside linear integer arithmetic", str(term))


def _evaluate3(node: _Node, atoms: Dict[int, bool], bools: Dict[str, bool]) -> Optional[bool]:
    kind = node[0]
    if kind == "const":
        return node[1]
    if kind == "atom":
        return atoms.get(node[1])
    if kind == "bool":
        value = bools.get(node[1])
        return None if value is None else value == node[2]
    unknown = False
    if kind == "and":
        for child in node[1]:
            value = _evaluate3(child, atoms, bools)
            if value is False:
                return False
            if value is None:
                unknown = True
        return None if unknown else True
    for child in node[1]:
        value = _evaluate3(child, atoms, bools)
        if value is True:
            return True
        if value is None:
            unknown = True
    return None if unknown else False


# ---------------------------------------------------------------------------
# Simplex

class Simplex:
    """
    General simplex over rationals.

    Variables 0..n-1 are the problem variables, one slack per constraint
    follows; each constraint row fixes slack = sum(coeff * var) with an
    upper bound. Pivoting uses Bland's rule.
    """

    def __init__(self, num_vars: int, rows: Sequence[Dict[int, int]], uppers: Sequence[int],
                 lower: Optional[Dict[int, int]] = None, upper: Optional[Dict[int, int]] = None):
        self.num_vars = num_vars
        self.lower: Dict[int, Fraction] = {v: Fraction(b) for v, b in (lower or {}).items()}
        self.upper: Dict[int, Fraction] = {v: Fraction(b) for v, b in (upper or {}).items()}
        self.value: Dict[int, Fraction] = {}
        for v in range(num_vars):
            if v in self.lower and self.lower[v] > 0:
                self.value[v] = self.lower[v]
            elif v in self.upper and self.upper[v] < 0:
                self.value[v] = self.upper[v]
            else:
                self.value[v] = Fraction(0)
        self.tableau: Dict[int, Dict[int, Fraction]] = {}
        for i, (row, bound) in enumerate(zip(rows, uppers)):
            slack = num_vars + i
            self.tableau[slack] = {v: Fraction(c) for v, c in row.items() if c}
            self.upper[slack] = Fraction(bound)
            self.value[slack] = sum((c * self.value[v] for v, c in self.tableau[slack].items()), Fraction(0))

    def _violated(self) -> Optional[int]:
        for basic in sorted(self.tableau):
            value = self.value[basic]
            if (basic in self.lower and value < self.lower[basic]) or \
                    (basic in self.upper and value > self.upper[basic]):
                return basic
        return None

    def _pivot_and_update(self, basic: int, nonbasic: int, target: Fraction) -> None:
        row = self.tableau[basic]
        coeff = row[nonbasic]
        theta = (target - self.value[basic]) / coeff
        self.value[basic] = target
        self.value[nonbasic] += theta
        for other, other_row in self.tableau.items():
            if other != basic and nonbasic in other_row:
                self.value[other] += other_row[nonbasic] * theta
        # basic = coeff*nonbasic + rest  =>  nonbasic = (basic - rest)/coeff
        new_row = {basic: Fraction(1) / coeff}
        for var, c in row.items():
            if var != nonbasic:
                new_row[var] = -c / coeff
        del self.tableau[basic]
        for other, other_row in self.tableau.items():
            factor = other_row.pop(nonbasic, None)
            if factor is None:
                continue
            for var, c in new_row.items():
                total = other_row.get(var, Fraction(0)) + factor * c
                if total:
                    other_row[var] = total
                else:
                    other_row.pop(var, None)
        self.tableau[nonbasic] = new_row

    def check(self) -> bool:
        """Restore bound feasibility; False when the constraints are infeasible"""
        while True:
            basic = self._violated()
            if basic is None:
                return True
            row = self.tableau[basic]
            value = self.value[basic]
            increase = basic in self.lower and value < self.lower[basic]
            chosen = None
            for var in sorted(row):
                c = row[var]
                can_up = var not in self.upper or self.value[var] < self.upper[var]
                can_down = var not in self.lower or self.value[var] > self.lower[var]
                if increase and ((c > 0 and can_up) or (c < 0 and can_down)):
                    chosen = var
                    break
                if not increase and ((c < 0 and can_up) or (c > 0 and can_down)):
                    chosen = var
                    break
            if chosen is None:
                return False
            target = self.lower[basic] if increase else self.upper[basic]
            self._pivot_and_update(basic, chosen, target)

    def solution(self) -> List[Fraction]:
        return [self.value[v] for v in range(self.num_vars)]


def solve_conjunction(atoms: Sequence[LinearAtom], variables: Sequence[str],
                      branch_depth: int = DEFAULT_BRANCH_DEPTH) -> LiaResult:
    """
    Integer feasibility of a conjunction of <= constraints

    Args:
        atoms: Inequalities sum + constant <= 0
        variables: Variable names (model keys)
        branch_depth: Maximum branch-and-bound depth

    Returns:
        LiaResult: SAT with an integer model, UNSAT, or UNKNOWN past the depth limit
    """
    index = {name: i for i, name in enumerate(variables)}
    rows: List[Dict[int, int]] = []
    uppers: List[int] = []
    for atom in atoms:
        if not atom.coeffs:
            if atom.constant > 0:
                return LiaResult(LiaStatus.UNSAT)
            continue
        rows.append({index[name]: c for name, c in atom.coeffs})
        uppers.append(-atom.constant)

    nodes = 0

    def branch(lower: Dict[int, int], upper: Dict[int, int], depth: int) -> LiaResult:
        nonlocal nodes
        nodes += 1
        if nodes > MAX_BRANCH_NODES:
            return LiaResult(LiaStatus.UNKNOWN, reason="branch node limit")
        simplex = Simplex(len(variables), rows, uppers, lower, upper)
        if not simplex.check():
            return LiaResult(LiaStatus.UNSAT)
        values = simplex.solution()
        fractional = next((i for i, v in enumerate(values) if v.denominator != 1), None)
        if fractional is None:
            return LiaResult(LiaStatus.SAT, {name: int(values[i]) for name, i in index.items()})
        if depth >= branch_depth:
            return LiaResult(LiaStatus.UNKNOWN, reason="branch depth")
        v = values[fractional]
        down = dict(upper)
        down[fractional] = min(floor(v), upper.get(fractional, floor(v)))
        left = branch(lower, down, depth + 1)
        if left.is_sat:
            return left
        up = dict(lower)
        up[fractional] = max(ceil(v), lower.get(fractional, ceil(v)))
        right = branch(up, upper, depth + 1)
        if right.is_sat:
            return right
        if left.status is LiaStatus.UNKNOWN or right.status is LiaStatus.UNKNOWN:
            return LiaResult(LiaStatus.UNKNOWN, reason="branch depth")
        return LiaResult(LiaStatus.UNSAT)

    return branch({}, {}, 0)


# ---------------------------------------------------------------------------
# Entry point

def qf_lia_sat(phi: Term, branch_depth: int = DEFAULT_BRANCH_DEPTH,
               max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> LiaResult:
    """
    Decide a quantifier-free linear integer formula

    Args:
        phi: Bool term over Int and Bool variables
        branch_depth: Branch-and-bound depth limit
        max_assignments: Cap on explored atom assignments

    Returns:
        LiaResult: SAT with a model satisfying phi, UNSAT, or UNKNOWN

    Raises:
        NonLinearError: if phi leaves the linear integer fragment
    """
    if phi.sort != BOOL:
        raise NonLinearError("formula is not Bool", str(phi))
    for var in iter_subterms(phi):
        if var.is_var and var.sort.kind not in (SortKind.INT, SortKind.BOOL):
            raise NonLinearError(f"variable {var.name} is not Int or Bool", str(phi))
    builder = _Builder()
    root = builder.nnf(lift_ite(phi))
    int_vars = sorted({v.name for v in iter_subterms(phi) if v.is_var and v.sort == INT})
    atoms = builder.atoms
    bool_vars = builder.bool_vars

    explored = 0
    theory_cache: Dict[frozenset, LiaResult] = {}
    saw_unknown = False

    def theory(chosen: frozenset) -> LiaResult:
        cached = theory_cache.get(chosen)
        if cached is None:
            cached = solve_conjunction([atoms[i] for i in sorted(chosen)], int_vars, branch_depth)
            theory_cache[chosen] = cached
        return cached

    def search(atom_values: Dict[int, bool], bool_values: Dict[str, bool]) -> Optional[_Found]:
        nonlocal explored, saw_unknown
        explored += 1
        if explored > max_assignments:
            raise _AssignmentLimit()
        verdict = _evaluate3(root, atom_values, bool_values)
        if verdict is False:
            return None
        chosen = frozenset(i for i, v in atom_values.items() if v)
        result = theory(chosen)
        if result.status is LiaStatus.UNSAT:
            return None
        if verdict is True:
            if result.status is LiaStatus.UNKNOWN:
                saw_unknown = True
                return None
            return result, bool_values
        for name in bool_vars:
            if name not in bool_values:
                for value in (True, False):
                    found = search(atom_values, {**bool_values, name: value})
                    if found is not None:
                        return found
                return None
        for i in range(len(atoms)):
            if i not in atom_values:
                for value in (True, False):
                    found = search({**atom_values, i: value}, bool_values)
                    if found is not None:
                        return found
                return None
        return None

    try:
        found = search({}, {})
    except _AssignmentLimit:
        logging.debug(f"LIA assignment limit reached on {len(atoms)} atoms")
        return LiaResult(LiaStatus.UNKNOWN, reason="assignment limit")
    if found is None:
        if saw_unknown or any(r.status is LiaStatus.UNKNOWN for r in theory_cache.values()):
            return LiaResult(LiaStatus.UNKNOWN, reason="branch depth")
        return LiaResult(LiaStatus.UNSAT)

    theory_result, bool_values = found
    model: Dict[str, Union[int, bool]] = {name: 0 for name in int_vars}
    model.update(theory_result.model)
    for name in bool_vars:
        model[name] = bool_values.get(name, False)
    if not evaluate(phi, model):
        logging.error(f"LIA model check failed for {phi}")
        return LiaResult(LiaStatus.UNKNOWN, reason="model check")
    return LiaResult(LiaStatus.SAT, model)


class _AssignmentLimit(Exception):
    pass

