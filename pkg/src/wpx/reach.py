"""Path-oriented bounded reachability for linear hybrid automata.

Each concrete transition path is encoded as one linear-constraint
feasibility problem over entry/exit valuations and dwell times, then decided
exactly over the rationals.  The decision procedure is a phase-I simplex
with exact rational pivoting and Bland's anti-cycling rule, preceded by an
equality presolve (rate equalities, Keep resets and point constraints pin
most valuation variables, leaving systems in roughly the dwell variables
only) and a sign-based quick infeasibility check that resolves the common
"resource budget exceeded" pattern without pivoting.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .graph import ResourceCapExceeded
from .model import (
    HybridAutomaton,
    LinearConstraint,
    LinearExpression,
    Plan,
    PlanningProblem,
    Polyhedron,
    Rational,
    Relation,
    ResetKind,
    RunSegment,
    WitnessRun,
)

DEFAULT_PATH_CAP = 1 << 22


@dataclass(frozen=True)
class ConcretePath:
    """Transition-level walk: locations[i] --transitions[i]--> locations[i+1]."""

    locations: Tuple[int, ...]
    transitions: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.transitions)


@dataclass(frozen=True)
class LpProblem:
    variables: Tuple[str, ...]
    constraints: Tuple[LinearConstraint, ...]


@dataclass(frozen=True)
class Verdict:
    status: str  # "SAT" | "UNSAT"
    witness: Optional[Tuple[Tuple[str, Rational], ...]]
    paths_checked: int
    path: Optional[ConcretePath] = None

    @property
    def is_sat(self) -> bool:
        return self.status == "SAT"

    def witness_dict(self) -> Dict[str, Rational]:
        return dict(self.witness or ())


def enumerate_concrete_paths(
    automaton: HybridAutomaton, source: int, goal_loc: int, depth: int
) -> Iterator[ConcretePath]:
    """Every transition-level walk of length <= depth from source to
    goal_loc, BFS by length with transition-id tie-break (which refines the
    location-id order because transitions are declared per edge)."""
    succ: Dict[int, List[Tuple[int, int]]] = {}
    for t in automaton.transitions:
        succ.setdefault(t.source, []).append((t.id, t.target))
    for v in succ:
        succ[v].sort()

    # Reverse shortest distances for pruning.
    pred: Dict[int, List[int]] = {}
    for t in automaton.transitions:
        pred.setdefault(t.target, []).append(t.source)
    dist = {goal_loc: 0}
    frontier = [goal_loc]
    while frontier:
        nxt = []
        for v in frontier:
            for u in pred.get(v, ()):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    missing = depth + 1
    if dist.get(source, missing) > depth:
        return

    def exact(locs: List[int], trans: List[int], edges_left: int) -> Iterator[ConcretePath]:
        vertex = locs[-1]
        if edges_left == 0:
            if vertex == goal_loc:
                yield ConcretePath(tuple(locs), tuple(trans))
            return
        for tid, nxt_loc in succ.get(vertex, ()):
            if dist.get(nxt_loc, missing) <= edges_left - 1:
                locs.append(nxt_loc)
                trans.append(tid)
                yield from exact(locs, trans, edges_left - 1)
                locs.pop()
                trans.pop()

    for length in range(depth + 1):
        if dist.get(source, missing) <= length:
            yield from exact([source], [], length)


def _var_in(var: str, pos: int) -> str:
    return "%s@%din" % (var, pos)


def _var_out(var: str, pos: int) -> str:
    return "%s@%dout" % (var, pos)


def _dwell(pos: int) -> str:
    return "d%d" % pos


def _shift_constraint(c: LinearConstraint, rename: Dict[str, str]) -> LinearConstraint:
    coeffs = {rename[v]: k for v, k in c.expression.coefficients}
    return LinearConstraint(
        LinearExpression.build(coeffs, c.expression.constant), c.relation
    )


def encode_path(problem: PlanningProblem, path: ConcretePath) -> LpProblem:
    """Encode one concrete path as a feasibility system.

    Variables per position i: entry value ``x@iin`` and exit value
    ``x@iout`` for every automaton variable x, and the dwell ``di``.
    Constraints: init region at position 0; invariant at both endpoints of
    every position; dwell nonnegativity; interval rate displacement bounds;
    guard at the exit of each transition's source; Keep/interval reset
    linking; goal region and goal-location invariant at the final exit.
    """
    automaton = problem.domain
    init_loc, init_region = problem.init
    if path.locations[0] != init_loc or path.locations[-1] != problem.goal.location:
        raise ValueError("path endpoints do not match the problem")

    variables: List[str] = []
    constraints: List[LinearConstraint] = []
    n = len(path.locations)

    for i, loc_id in enumerate(path.locations):
        for var in automaton.variables:
            variables.append(_var_in(var, i))
            variables.append(_var_out(var, i))
        variables.append(_dwell(i))

    def add_region(region: Polyhedron, pos: int, which: str) -> None:
        rename = {v: ("%s@%d%s" % (v, pos, which)) for v in automaton.variables}
        for c in region.constraints:
            constraints.append(_shift_constraint(c, rename))

    add_region(init_region, 0, "in")

    for i, loc_id in enumerate(path.locations):
        loc = automaton.location(loc_id)
        add_region(loc.invariant, i, "in")
        add_region(loc.invariant, i, "out")
        # d_i >= 0  encoded as  -d_i <= 0
        constraints.append(
            LinearConstraint(LinearExpression.build({_dwell(i): -1}), Relation.LE)
        )
        for var in automaton.variables:
            iv = loc.rates.interval(var)
            if iv is None:
                continue
            vin, vout, d = _var_in(var, i), _var_out(var, i), _dwell(i)
            if iv.lower == iv.upper:
                # exact rate: out - in - r*d = 0
                constraints.append(
                    LinearConstraint(
                        LinearExpression.build({vout: 1, vin: -1, d: -iv.lower}),
                        Relation.EQ,
                    )
                )
            else:
                constraints.append(
                    LinearConstraint(
                        LinearExpression.build({vout: -1, vin: 1, d: iv.lower}),
                        Relation.LE,
                    )
                )
                constraints.append(
                    LinearConstraint(
                        LinearExpression.build({vout: 1, vin: -1, d: -iv.upper}),
                        Relation.LE,
                    )
                )

    for i, tid in enumerate(path.transitions):
        trans = automaton.transitions[tid]
        add_region(trans.guard, i, "out")
        for var in automaton.variables:
            act = trans.reset.action(var)
            vin_next = _var_in(var, i + 1)
            if act.kind is ResetKind.KEEP:
                constraints.append(
                    LinearConstraint(
                        LinearExpression.build({vin_next: 1, _var_out(var, i): -1}),
                        Relation.EQ,
                    )
                )
            else:
                if act.lower == act.upper:
                    constraints.append(
                        LinearConstraint(
                            LinearExpression.build({vin_next: 1}, -act.lower),
                            Relation.EQ,
                        )
                    )
                else:
                    constraints.append(
                        LinearConstraint(
                            LinearExpression.build({vin_next: -1}, act.lower),
                            Relation.LE,
                        )
                    )
                    constraints.append(
                        LinearConstraint(
                            LinearExpression.build({vin_next: 1}, -act.upper),
                            Relation.LE,
                        )
                    )

    add_region(problem.goal.region, n - 1, "out")
    add_region(automaton.location(problem.goal.location).invariant, n - 1, "out")

    return LpProblem(variables=tuple(variables), constraints=tuple(constraints))


# --- exact feasibility ----------------------------------------------------


def _substitute(
    coeffs: Dict[str, Rational],
    constant: Rational,
    solved: Dict[str, Tuple[Dict[str, Rational], Rational]],
) -> Tuple[Dict[str, Rational], Rational]:
    """Fully substitute solved variables into (coeffs, constant)."""
    pending = True
    while pending:
        pending = False
        for var in list(coeffs):
            if var in solved:
                factor = coeffs.pop(var)
                sub_coeffs, sub_const = solved[var]
                for v, k in sub_coeffs.items():
                    coeffs[v] = coeffs.get(v, Fraction(0)) + factor * k
                constant += factor * sub_const
                pending = True
        coeffs = {v: k for v, k in coeffs.items() if k != 0}
    return coeffs, constant


def _presolve(
    lp: LpProblem,
) -> Optional[
    Tuple[List[Tuple[Dict[str, Rational], Rational]], Dict[str, Tuple[Dict[str, Rational], Rational]]]
]:
    """Eliminate equality constraints by Gaussian substitution.

    Returns (rows, solved) where rows is a list of (coeffs, bound) meaning
    sum(coeffs * x) <= bound over the remaining variables, and solved maps
    an eliminated variable to (coeffs, constant) over remaining variables.
    Returns None when an equality is contradictory on its own.
    """
    solved: Dict[str, Tuple[Dict[str, Rational], Rational]] = {}
    rows: List[Tuple[Dict[str, Rational], Rational]] = []
    inequalities: List[Tuple[Dict[str, Rational], Rational]] = []

    for c in lp.constraints:
        coeffs = dict(c.expression.coefficients)
        constant = c.expression.constant
        if c.relation is Relation.EQ:
            coeffs, constant = _substitute(coeffs, constant, solved)
            if not coeffs:
                if constant != 0:
                    return None
                continue
            # Deterministic pivot: first variable in sorted order.
            pivot = sorted(coeffs)[0]
            pk = coeffs.pop(pivot)
            expr = {v: -k / pk for v, k in coeffs.items()}
            const = -constant / pk
            # Re-normalize earlier solutions that mention the pivot.
            for var, (scoeffs, sconst) in list(solved.items()):
                if pivot in scoeffs:
                    factor = scoeffs.pop(pivot)
                    for v, k in expr.items():
                        scoeffs[v] = scoeffs.get(v, Fraction(0)) + factor * k
                    sconst += factor * const
                    solved[var] = ({v: k for v, k in scoeffs.items() if k != 0}, sconst)
            solved[pivot] = (expr, const)
        elif c.relation is Relation.LE:
            inequalities.append((coeffs, constant))
        else:  # GE: expr >= 0  ->  -expr <= 0
            inequalities.append(({v: -k for v, k in coeffs.items()}, -constant))

    for coeffs, constant in inequalities:
        coeffs, constant = _substitute(dict(coeffs), constant, solved)
        # expr + constant <= 0  ->  expr <= -constant
        rows.append((coeffs, -constant))
    return rows, solved


def _phase_one_simplex(
    variables: List[str], rows: List[Tuple[Dict[str, Rational], Rational]]
) -> Optional[Dict[str, Rational]]:
    """Decide feasibility of {sum(coeffs*x) <= bound} with free variables.

    Free variables are split into nonnegative pairs; phase-I minimizes the
    sum of artificial variables with Bland's rule.  Returns a satisfying
    assignment or None.
    """
    n = len(variables)
    index = {v: i for i, v in enumerate(variables)}
    m = len(rows)
    # Columns: 0..n-1 positive parts, n..2n-1 negative parts,
    # 2n..2n+m-1 slacks, then artificials.
    ncols = 2 * n + m
    tableau: List[List[Rational]] = []
    rhs: List[Rational] = []
    basis: List[int] = []
    artificial_cols: List[int] = []

    for r, (coeffs, bound) in enumerate(rows):
        row = [Fraction(0)] * ncols
        for v, k in coeffs.items():
            row[index[v]] = k
            row[n + index[v]] = -k
        row[2 * n + r] = Fraction(1)
        b = bound
        if b < 0:
            row = [-x for x in row]
            b = -b
            col = ncols + len(artificial_cols)
            artificial_cols.append(col)
            basis.append(col)
        else:
            basis.append(2 * n + r)
        tableau.append(row)
        rhs.append(b)

    if not artificial_cols:
        assignment = {v: Fraction(0) for v in variables}
        return assignment

    total_cols = ncols + len(artificial_cols)
    for i, row in enumerate(tableau):
        row.extend(Fraction(0) for _ in range(len(artificial_cols)))
        if basis[i] >= ncols:
            row[basis[i]] = Fraction(1)

    # Objective: minimize sum of artificials; reduced costs start as
    # -(sum of artificial rows) over non-artificial columns.
    cost = [Fraction(0)] * total_cols
    cost_const = Fraction(0)
    for i, b in enumerate(basis):
        if b >= ncols:
            for j in range(total_cols):
                cost[j] -= tableau[i][j]
            cost_const += rhs[i]
    for col in artificial_cols:
        cost[col] += Fraction(1)

    while True:
        entering = -1
        for j in range(total_cols):
            if cost[j] < 0:
                entering = j
                break
        if entering < 0:
            break
        leaving = -1
        best_ratio: Optional[Rational] = None
        for i in range(m):
            a = tableau[i][entering]
            if a > 0:
                ratio = rhs[i] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            # Unbounded phase-I objective cannot happen (bounded below by 0);
            # defensive guard.
            break
        pivot = tableau[leaving][entering]
        prow = tableau[leaving]
        inv = Fraction(1) / pivot
        for j in range(total_cols):
            prow[j] *= inv
        rhs[leaving] *= inv
        for i in range(m):
            if i == leaving:
                continue
            factor = tableau[i][entering]
            if factor != 0:
                row = tableau[i]
                for j in range(total_cols):
                    if prow[j] != 0:
                        row[j] -= factor * prow[j]
                rhs[i] -= factor * rhs[leaving]
        factor = cost[entering]
        if factor != 0:
            for j in range(total_cols):
                if prow[j] != 0:
                    cost[j] -= factor * prow[j]
            cost_const -= factor * rhs[leaving]
        basis[leaving] = entering

    # Optimum value of sum(artificials) is -cost_const ... track via basis:
    objective = Fraction(0)
    for i, b in enumerate(basis):
        if b >= ncols:
            objective += rhs[i]
    if objective != 0:
        return None

    values = [Fraction(0)] * total_cols
    for i, b in enumerate(basis):
        values[b] = rhs[i]
    assignment = {}
    for v, i in index.items():
        assignment[v] = values[i] - values[n + i]
    return assignment


def _solve_rows(
    rows: List[Tuple[Dict[str, Rational], Rational]]
) -> Optional[Dict[str, Rational]]:
    """Decide {sum(coeffs*x) <= bound} over free rational variables.

    Pipeline: single-variable rows become bounds, an interval-arithmetic
    pass refutes rows whose smallest possible left side already exceeds the
    bound (which settles the common exhausted-budget pattern without any
    pivoting), lower-bounded variables are shifted to nonnegative ones, and
    a phase-I simplex decides the rest.  Returns an assignment covering
    every variable that appears in any row, or None when infeasible.
    """
    lower: Dict[str, Rational] = {}
    upper: Dict[str, Rational] = {}
    general: List[Tuple[Dict[str, Rational], Rational]] = []
    all_vars: set = set()
    for coeffs, bound in rows:
        all_vars.update(coeffs)
        if not coeffs:
            if bound < 0:
                return None
            continue
        if len(coeffs) == 1:
            (var, k), = coeffs.items()
            b = bound / k
            if k > 0:
                if var not in upper or b < upper[var]:
                    upper[var] = b
            else:
                if var not in lower or b > lower[var]:
                    lower[var] = b
            continue
        general.append((coeffs, bound))

    for var, lo in lower.items():
        if var in upper and lo > upper[var]:
            return None

    # Interval propagation: minimal possible left side vs the bound.
    for coeffs, bound in general:
        minimum = Fraction(0)
        for var, k in coeffs.items():
            if k > 0:
                if var not in lower:
                    break
                minimum += k * lower[var]
            else:
                if var not in upper:
                    break
                minimum += k * upper[var]
        else:
            if minimum > bound:
                return None

    # Shift lower-bounded variables to nonnegative ones: x = lo + x'.
    shifted_rows: List[Tuple[Dict[str, Rational], Rational]] = []
    remaining_vars: set = set()
    for coeffs, bound in general:
        nb = bound
        for var, k in coeffs.items():
            if var in lower:
                nb -= k * lower[var]
            remaining_vars.add(var)
        shifted_rows.append((dict(coeffs), nb))
    for var, ub in upper.items():
        nb = ub - lower[var] if var in lower else ub
        shifted_rows.append(({var: Fraction(1)}, nb))
        remaining_vars.add(var)

    var_order = sorted(remaining_vars)
    # Shifted variables carry an explicit nonnegativity row; the simplex
    # splits every variable, which is sound either way.
    solver_rows = list(shifted_rows)
    for v in var_order:
        if v in lower:
            solver_rows.append(({v: Fraction(-1)}, Fraction(0)))

    assignment = _phase_one_simplex(var_order, solver_rows)
    if assignment is None:
        return None

    full: Dict[str, Rational] = {}
    for v in var_order:
        full[v] = assignment[v] + lower.get(v, Fraction(0))
    # Variables only seen in bound rows sit at a bound-respecting value.
    for v in all_vars:
        if v not in full:
            if v in lower:
                full[v] = lower[v]
            elif v in upper:
                full[v] = min(upper[v], Fraction(0))
            else:
                full[v] = Fraction(0)
    return full


def lp_feasible(lp: LpProblem) -> Verdict:
    """Exact SAT/UNSAT decision with witness extraction."""
    pres = _presolve(lp)
    if pres is None:
        return Verdict(status="UNSAT", witness=None, paths_checked=0)
    rows, solved = pres

    full = _solve_rows(rows)
    if full is None:
        return Verdict(status="UNSAT", witness=None, paths_checked=0)

    for v in lp.variables:
        if v not in full and v not in solved:
            full[v] = Fraction(0)
    # Back-substitute eliminated variables (solutions reference only
    # remaining variables after presolve re-normalization).
    for var, (coeffs, const) in solved.items():
        value = const
        for v, k in coeffs.items():
            value += k * full[v]
        full[var] = value

    witness = tuple(sorted((v, full[v]) for v in lp.variables))
    valuation = dict(witness)
    for c in lp.constraints:
        if not c.holds(valuation):
            raise AssertionError("internal error: witness fails a constraint")
    return Verdict(status="SAT", witness=witness, paths_checked=0)


# --- interval pre-analysis ------------------------------------------------
#
# A step-indexed box (interval) abstraction of the path semantics.  Each
# box maps a variable to closed rational bounds (None = unbounded).  Every
# operation overapproximates the LP semantics, so an empty goal box at
# every step proves UNSAT without enumerating a single path; any nonempty
# goal box is merely inconclusive and falls through to the exact check.

_Box = Dict[str, Tuple[Optional[Rational], Optional[Rational]]]


def _box_from_region(region: Polyhedron, variables: Sequence[str]) -> Optional[_Box]:
    """Relax a polyhedron to per-variable bounds; multi-variable
    constraints are dropped (sound for overapproximation)."""
    box: _Box = {v: (None, None) for v in variables}
    for c in region.constraints:
        coeffs = c.expression.coefficients
        if len(coeffs) != 1:
            continue
        (var, k), = coeffs
        # k*x + const REL 0
        bound = -c.expression.constant / k
        lo, hi = box[var]
        if c.relation is Relation.EQ:
            relations = (Relation.LE, Relation.GE)
        else:
            relations = (c.relation,)
        for rel in relations:
            at_most = (rel is Relation.LE) == (k > 0)
            if at_most:
                if hi is None or bound < hi:
                    hi = bound
            else:
                if lo is None or bound > lo:
                    lo = bound
        box[var] = (lo, hi)
    return box


def _box_intersect(a: Optional[_Box], b: Optional[_Box]) -> Optional[_Box]:
    if a is None or b is None:
        return None
    out: _Box = {}
    for v in a:
        alo, ahi = a[v]
        blo, bhi = b[v]
        lo = alo if blo is None else (blo if alo is None else max(alo, blo))
        hi = ahi if bhi is None else (bhi if ahi is None else min(ahi, bhi))
        if lo is not None and hi is not None and lo > hi:
            return None
        out[v] = (lo, hi)
    return out


def _box_join(a: Optional[_Box], b: Optional[_Box]) -> Optional[_Box]:
    if a is None:
        return b
    if b is None:
        return a
    out: _Box = {}
    for v in a:
        alo, ahi = a[v]
        blo, bhi = b[v]
        lo = None if alo is None or blo is None else min(alo, blo)
        hi = None if ahi is None or bhi is None else max(ahi, bhi)
        out[v] = (lo, hi)
    return out


def _box_dwell(
    entry: _Box,
    rates,
    variables: Sequence[str],
    exit_box: Optional[_Box],
) -> Optional[_Box]:
    """Possible exit valuations after some dwell t >= 0 whose endpoint lies
    in ``exit_box``; per-variable dwell coupling is relaxed to a shared
    dwell interval."""
    if exit_box is None:
        return None
    t_lo = Fraction(0)
    t_hi: Optional[Rational] = None

    def tighten(const: Rational, slope: Rational) -> bool:
        # Require const + slope*t <= 0 for some t in [t_lo, t_hi].
        nonlocal t_lo, t_hi
        if slope == 0:
            return const <= 0
        bound = -const / slope
        if slope > 0:
            if t_hi is None or bound < t_hi:
                t_hi = bound
        else:
            if bound > t_lo:
                t_lo = bound
        return True

    for var in variables:
        iv = rates.interval(var)
        if iv is None:
            continue
        a_lo, a_hi = entry[var]
        e_lo, e_hi = exit_box[var]
        # Reachable band at dwell t: [a_lo + lower*t, a_hi + upper*t].
        if e_hi is not None and a_lo is not None:
            if not tighten(a_lo - e_hi, iv.lower):
                return None
        if e_lo is not None and a_hi is not None:
            if not tighten(e_lo - a_hi, -iv.upper):
                return None
    if t_hi is not None and t_lo > t_hi:
        return None

    out: _Box = {}
    for var in variables:
        iv = rates.interval(var)
        if iv is None:
            out[var] = entry[var]
            continue
        a_lo, a_hi = entry[var]
        if a_lo is None:
            lo = None
        elif iv.lower >= 0:
            lo = a_lo + iv.lower * t_lo
        else:
            lo = None if t_hi is None else a_lo + iv.lower * t_hi
        if a_hi is None:
            hi = None
        elif iv.upper <= 0:
            hi = a_hi + iv.upper * t_lo
        else:
            hi = None if t_hi is None else a_hi + iv.upper * t_hi
        out[var] = (lo, hi)
    return _box_intersect(out, exit_box)


def _interval_unreachable(problem: PlanningProblem) -> bool:
    """True when the box abstraction proves no bounded run reaches the
    goal; False is inconclusive."""
    automaton = problem.domain
    variables = automaton.variables
    init_loc, init_region = problem.init
    goal_loc = problem.goal.location

    inv_box = {
        loc.id: _box_from_region(loc.invariant, variables)
        for loc in automaton.locations
    }
    goal_box = _box_intersect(
        _box_from_region(problem.goal.region, variables), inv_box[goal_loc]
    )

    def goal_hit(entry: Optional[_Box]) -> bool:
        if entry is None:
            return False
        # The goal is tested at the exit of a final dwell in the goal
        # location.
        loc = automaton.location(goal_loc)
        exit_box = _box_dwell(entry, loc.rates, variables, inv_box[goal_loc])
        return _box_intersect(exit_box, goal_box) is not None

    current: Dict[int, Optional[_Box]] = {
        init_loc: _box_intersect(
            _box_from_region(init_region, variables), inv_box[init_loc]
        )
    }
    if init_loc == goal_loc and goal_hit(current.get(init_loc)):
        return False
    for _ in range(problem.depth):
        nxt: Dict[int, Optional[_Box]] = {}
        for loc_id, entry in current.items():
            if entry is None:
                continue
            loc = automaton.location(loc_id)
            for trans in automaton.transitions:
                if trans.source != loc_id:
                    continue
                exit_req = _box_intersect(
                    inv_box[loc_id], _box_from_region(trans.guard, variables)
                )
                exit_box = _box_dwell(entry, loc.rates, variables, exit_req)
                if exit_box is None:
                    continue
                landed: _Box = {}
                for var in variables:
                    act = trans.reset.action(var)
                    if act.kind is ResetKind.KEEP:
                        landed[var] = exit_box[var]
                    else:
                        landed[var] = (act.lower, act.upper)
                landed2 = _box_intersect(landed, inv_box[trans.target])
                if landed2 is None:
                    continue
                nxt[trans.target] = _box_join(nxt.get(trans.target), landed2)
        current = nxt
        if not current:
            break
        if goal_hit(current.get(goal_loc)):
            return False
    return True


# --- bounded reachability -------------------------------------------------


_Expr = Tuple[Dict[str, Rational], Rational]


def _encode_reduced(
    problem: PlanningProblem, path: ConcretePath
) -> Tuple[List[Tuple[Dict[str, Rational], Rational]], Dict[str, _Expr]]:
    """Encode a path with exact rates and Keep resets substituted away.

    Semantically identical to ``encode_path`` + equality presolve, but
    built in one forward pass: the valuation at each point is tracked as an
    affine expression over the surviving variables (dwells, interval-rate
    exits, interval-reset entries).  Returns the inequality rows and, for
    every variable of the full encoding, its expression over the survivors
    so the complete witness can be reconstructed.
    """
    automaton = problem.domain
    init_loc, init_region = problem.init
    if path.locations[0] != init_loc or path.locations[-1] != problem.goal.location:
        raise ValueError("path endpoints do not match the problem")

    rows: List[Tuple[Dict[str, Rational], Rational]] = []
    symbolic: Dict[str, _Expr] = {}
    # Current value of each automaton variable as (coeffs, const).
    state: Dict[str, _Expr] = {}
    for var in automaton.variables:
        name = _var_in(var, 0)
        state[var] = ({name: Fraction(1)}, Fraction(0))

    def emit_region(region: Polyhedron) -> None:
        for c in region.constraints:
            coeffs: Dict[str, Rational] = {}
            const = c.expression.constant
            for var, k in c.expression.coefficients:
                scoeffs, sconst = state[var]
                for v, sk in scoeffs.items():
                    coeffs[v] = coeffs.get(v, Fraction(0)) + k * sk
                const += k * sconst
            coeffs = {v: k for v, k in coeffs.items() if k != 0}
            # expr REL 0  ->  rows of the form coeffs*x <= bound
            if c.relation is Relation.LE:
                rows.append((coeffs, -const))
            elif c.relation is Relation.GE:
                rows.append(({v: -k for v, k in coeffs.items()}, const))
            else:
                rows.append((dict(coeffs), -const))
                rows.append(({v: -k for v, k in coeffs.items()}, const))

    emit_region(init_region)

    for i, loc_id in enumerate(path.locations):
        loc = automaton.location(loc_id)
        for var in automaton.variables:
            symbolic[_var_in(var, i)] = state[var]
        emit_region(loc.invariant)
        d = _dwell(i)
        symbolic[d] = ({d: Fraction(1)}, Fraction(0))
        rows.append(({d: Fraction(-1)}, Fraction(0)))  # d_i >= 0
        for var in automaton.variables:
            iv = loc.rates.interval(var)
            if iv is None:
                continue
            coeffs, const = state[var]
            if iv.lower == iv.upper:
                ncoeffs = dict(coeffs)
                ncoeffs[d] = ncoeffs.get(d, Fraction(0)) + iv.lower
                state[var] = ({v: k for v, k in ncoeffs.items() if k != 0}, const)
            else:
                out = _var_out(var, i)
                # lower*d <= out - in <= upper*d
                lo_row = dict(coeffs)
                lo_row[out] = lo_row.get(out, Fraction(0)) - 1
                lo_row[d] = lo_row.get(d, Fraction(0)) + iv.lower
                rows.append(({v: k for v, k in lo_row.items() if k != 0}, -const))
                hi_row = {v: -k for v, k in coeffs.items()}
                hi_row[out] = hi_row.get(out, Fraction(0)) + 1
                hi_row[d] = hi_row.get(d, Fraction(0)) - iv.upper
                rows.append(({v: k for v, k in hi_row.items() if k != 0}, const))
                state[var] = ({out: Fraction(1)}, Fraction(0))
        for var in automaton.variables:
            symbolic[_var_out(var, i)] = state[var]
        emit_region(loc.invariant)

        if i < len(path.transitions):
            trans = automaton.transitions[path.transitions[i]]
            emit_region(trans.guard)
            for var in automaton.variables:
                act = trans.reset.action(var)
                if act.kind is ResetKind.KEEP:
                    continue
                if act.lower == act.upper:
                    state[var] = ({}, act.lower)
                else:
                    fresh = _var_in(var, i + 1)
                    rows.append(({fresh: Fraction(-1)}, -act.lower))
                    rows.append(({fresh: Fraction(1)}, act.upper))
                    state[var] = ({fresh: Fraction(1)}, Fraction(0))

    emit_region(problem.goal.region)
    emit_region(automaton.location(problem.goal.location).invariant)
    return rows, symbolic


def _check_path(problem: PlanningProblem, path: ConcretePath) -> Verdict:
    rows, symbolic = _encode_reduced(problem, path)
    full = _solve_rows(rows)
    if full is None:
        return Verdict(status="UNSAT", witness=None, paths_checked=0)
    witness_vals: Dict[str, Rational] = {}
    for name, (coeffs, const) in symbolic.items():
        value = const
        for v, k in coeffs.items():
            value += k * full.get(v, Fraction(0))
        witness_vals[name] = value
    witness = tuple(sorted(witness_vals.items()))
    # Safety net: replay the witness through the full per-path encoding.
    valuation = dict(witness)
    for c in encode_path(problem, path).constraints:
        if not c.holds(valuation):
            raise AssertionError("internal error: witness fails a constraint")
    return Verdict(status="SAT", witness=witness, paths_checked=0)


def _chunk_worker(args) -> List[Tuple[int, str, Optional[Tuple[Tuple[str, Rational], ...]]]]:
    problem, paths = args
    out = []
    for idx, path in paths:
        verdict = _check_path(problem, path)
        out.append((idx, verdict.status, verdict.witness))
    return out


def bounded_reachable(
    problem: PlanningProblem,
    cap: int = DEFAULT_PATH_CAP,
    parallel: int = 1,
    dump_dir: Optional[str] = None,
) -> Verdict:
    """SAT iff some concrete path's LP is feasible; first SAT in enumeration
    order wins regardless of parallelism.

    ``dump_dir`` writes one plain-text constraint listing per checked path.
    """
    # The box pre-analysis can prove UNSAT without enumerating; skip it
    # when per-path dumps were requested, since those require enumeration.
    if dump_dir is None and _interval_unreachable(problem):
        return Verdict(status="UNSAT", witness=None, paths_checked=0)

    init_loc, _ = problem.init
    paths = enumerate_concrete_paths(
        problem.domain, init_loc, problem.goal.location, problem.depth
    )
    checked = 0

    if dump_dir is not None:
        import os

        os.makedirs(dump_dir, exist_ok=True)

    def dump(idx: int, path: ConcretePath) -> None:
        if dump_dir is None:
            return
        import os

        from .textio import format_rational

        lp = encode_path(problem, path)
        lines = ["# path %d" % idx]
        lines.append(
            "# locations: "
            + " ".join(problem.domain.location(l).name for l in path.locations)
        )
        for c in lp.constraints:
            terms = " + ".join(
                "%s*%s" % (format_rational(k), v) for v, k in c.expression.coefficients
            )
            lines.append(
                "%s + %s %s 0" % (terms, format_rational(c.expression.constant), c.relation.value)
            )
        with open(os.path.join(dump_dir, "path_%05d.lp" % idx), "w") as fh:
            fh.write("\n".join(lines) + "\n")

    if parallel <= 1:
        for idx, path in enumerate(paths):
            if idx >= cap:
                raise ResourceCapExceeded("concrete path enumeration", cap)
            dump(idx, path)
            verdict = _check_path(problem, path)
            checked += 1
            if verdict.is_sat:
                return Verdict(
                    status="SAT",
                    witness=verdict.witness,
                    paths_checked=checked,
                    path=path,
                )
        return Verdict(status="UNSAT", witness=None, paths_checked=checked)

    chunk_size = 32
    indexed = enumerate(paths)
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        while True:
            batch: List[List[Tuple[int, ConcretePath]]] = []
            batch_paths: Dict[int, ConcretePath] = {}
            for _ in range(parallel):
                chunk = list(itertools.islice(indexed, chunk_size))
                if not chunk:
                    break
                for idx, path in chunk:
                    if idx >= cap:
                        raise ResourceCapExceeded("concrete path enumeration", cap)
                    dump(idx, path)
                    batch_paths[idx] = path
                batch.append(chunk)
            if not batch:
                break
            results = pool.map(_chunk_worker, [(problem, chunk) for chunk in batch])
            flat = [item for sub in results for item in sub]
            flat.sort(key=lambda item: item[0])
            for idx, status, witness in flat:
                checked += 1
                if status == "SAT":
                    return Verdict(
                        status="SAT",
                        witness=witness,
                        paths_checked=checked,
                        path=batch_paths[idx],
                    )
    return Verdict(status="UNSAT", witness=None, paths_checked=checked)


def extract_witness(
    problem: PlanningProblem, verdict: Verdict, path: Optional[ConcretePath] = None
) -> Tuple[WitnessRun, Plan]:
    """Rebuild the run and plan from a SAT verdict's LP assignment."""
    if not verdict.is_sat:
        raise ValueError("cannot extract a witness from an UNSAT verdict")
    path = path or verdict.path
    if path is None:
        raise ValueError("verdict carries no path")
    automaton = problem.domain
    values = verdict.witness_dict()
    segments: List[RunSegment] = []
    for i, loc_id in enumerate(path.locations):
        entry = tuple(
            (v, values[_var_in(v, i)]) for v in automaton.variables
        )
        exit_ = tuple(
            (v, values[_var_out(v, i)]) for v in automaton.variables
        )
        segments.append(
            RunSegment(location=loc_id, entry=entry, dwell=values[_dwell(i)], exit=exit_)
        )
    run = WitnessRun(segments=tuple(segments), transitions=path.transitions)

    steps: List[Tuple[Rational, str]] = []
    elapsed = Fraction(0)
    for i, tid in enumerate(path.transitions):
        elapsed += segments[i].dwell
        steps.append((elapsed, automaton.transitions[tid].label))
    makespan = elapsed + segments[-1].dwell
    plan = Plan(steps=tuple(steps), makespan=makespan)
    return run, plan
