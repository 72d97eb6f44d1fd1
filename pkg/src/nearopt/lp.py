"""Linear programming kernel: bounded-variable programs, exact solves, MPS export.

The solver is a dense bounded-variable revised simplex (see ``simplex.py``)
with a fixed, deterministic pivoting rule: two solves of the same program
return bitwise-identical variable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import simplex

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LESS_EQUAL = "<="
GREATER_EQUAL = ">="
EQUAL = "="

_RELATIONS = (LESS_EQUAL, GREATER_EQUAL, EQUAL)


class LpError(Exception):
    """Base class for LP construction and solve errors."""


class UnknownVariableError(LpError):
    """A coefficient references a variable id that was never declared."""


class NumericalInstabilityError(LpError):
    """Residuals exceeded tolerance even after refactorisation."""


@dataclass(frozen=True)
class Variable:
    """Decision variable with finite lower bound and optional upper bound."""

    id: str
    lower: float = 0.0
    upper: float = math.inf

    def __post_init__(self) -> None:
        if not math.isfinite(self.lower):
            raise LpError(f"variable {self.id!r}: lower bound must be finite")
        if self.upper < self.lower:
            raise LpError(
                f"variable {self.id!r}: lower bound {self.lower} exceeds upper bound {self.upper}"
            )


@dataclass(frozen=True)
class Constraint:
    """Linear constraint ``sum(coeffs[v] * v) relation rhs``."""

    coeffs: Mapping[str, float]
    relation: str
    rhs: float
    name: str = ""

    def __post_init__(self) -> None:
        if self.relation not in _RELATIONS:
            raise LpError(f"unknown relation {self.relation!r}")


@dataclass(frozen=True)
class LinearProgram:
    """Immutable minimisation program over bounded variables.

    Maximisation is expressed by negating objective coefficients. Safe to
    share across concurrent solves; every solve uses private working storage.
    """

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: Mapping[str, float]
    name: str = "lp"

    def __post_init__(self) -> None:
        ids = [v.id for v in self.variables]
        known = set(ids)
        if len(known) != len(ids):
            raise LpError("duplicate variable ids")
        for c in self.constraints:
            for vid in c.coeffs:
                if vid not in known:
                    raise UnknownVariableError(
                        f"constraint {c.name!r} references undeclared variable {vid!r}"
                    )
        for vid in self.objective:
            if vid not in known:
                raise UnknownVariableError(f"objective references undeclared variable {vid!r}")

    def variable_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables)


@dataclass(frozen=True)
class LpSolution:
    """Outcome of a solve.

    ``values`` and ``objective`` are meaningful only for status ``optimal``.
    ``state`` carries the optimal basis for warm starts on programs derived
    by appending constraints (see :func:`nearopt.lp.extend_state_for_new_rows`).
    """

    status: str
    values: dict[str, float] = field(default_factory=dict)
    objective: float = math.nan
    state: simplex.BasisState | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def add_constraint(lp: LinearProgram, c: Constraint) -> LinearProgram:
    """Return a program with one extra constraint; ``lp`` is unmodified."""
    known = set(lp.variable_ids())
    for vid in c.coeffs:
        if vid not in known:
            raise UnknownVariableError(f"constraint references undeclared variable {vid!r}")
    return LinearProgram(lp.variables, lp.constraints + (c,), lp.objective, lp.name)


def with_objective(lp: LinearProgram, objective: Mapping[str, float]) -> LinearProgram:
    """Return a program with the same feasible set and a new objective."""
    return LinearProgram(lp.variables, lp.constraints, dict(objective), lp.name)


def solve(lp: LinearProgram, warm: simplex.BasisState | None = None) -> LpSolution:
    """Solve to an optimal basic solution, or report infeasible/unbounded.

    Deterministic: the pivoting rule is fixed, so the returned vertex is
    reproducible even when the optimal face is not a point.
    """
    tab = simplex.Tableau.from_program(lp)
    try:
        status, x, state = tab.solve(warm)
    except simplex.SimplexError as exc:
        raise NumericalInstabilityError(str(exc)) from exc
    if status != OPTIMAL:
        return LpSolution(status=status)
    values = {v.id: float(x[j]) for j, v in enumerate(lp.variables)}
    obj = sum(coef * values[vid] for vid, coef in lp.objective.items())
    return LpSolution(status=OPTIMAL, values=values, objective=float(obj), state=state)


def extend_state_for_new_rows(state: simplex.BasisState, n_new_rows: int) -> simplex.BasisState:
    """Adapt an optimal basis to a program with ``n_new_rows`` appended rows.

    Each appended row's slack joins the basis, which keeps the basis square
    and non-singular. Feasibility of the warm start is re-checked by the
    solver and fails over to a cold start when violated.
    """
    return simplex.extend_basis(state, n_new_rows)


def objective_value(lp: LinearProgram, values: Mapping[str, float]) -> float:
    """Evaluate the objective of ``lp`` at a point."""
    return float(sum(coef * values[vid] for vid, coef in lp.objective.items()))


def _mps_num(x: float) -> str:
    return f"{x:.12g}"


def write_mps(lp: LinearProgram) -> str:
    """Render the program in fixed-column MPS layout (UTF-8 text).

    Row senses map to L/G/E, the objective is row ``COST``, and variable
    bounds appear in a single ``BND`` set. Intended for cross-checking the
    kernel against external solvers.
    """
    rows: list[str] = []
    rows.append(f"NAME          {lp.name.upper()[:8] or 'LP'}")
    rows.append("ROWS")
    rows.append(" N  COST")
    row_names: list[str] = []
    for i, c in enumerate(lp.constraints):
        rname = c.name or f"R{i + 1}"
        row_names.append(rname)
        sense = {LESS_EQUAL: "L", GREATER_EQUAL: "G", EQUAL: "E"}[c.relation]
        rows.append(f" {sense}  {rname}")
    rows.append("COLUMNS")
    for v in lp.variables:
        entries: list[tuple[str, float]] = []
        if v.id in lp.objective and lp.objective[v.id] != 0.0:
            entries.append(("COST", lp.objective[v.id]))
        for rname, c in zip(row_names, lp.constraints):
            if v.id in c.coeffs and c.coeffs[v.id] != 0.0:
                entries.append((rname, c.coeffs[v.id]))
        for rname, coef in entries:
            rows.append(f"    {v.id:<10}{rname:<10}{_mps_num(coef)}")
    rows.append("RHS")
    for rname, c in zip(row_names, lp.constraints):
        if c.rhs != 0.0:
            rows.append(f"    RHS       {rname:<10}{_mps_num(c.rhs)}")
    rows.append("BOUNDS")
    for v in lp.variables:
        if v.lower == v.upper:
            rows.append(f" FX BND       {v.id:<10}{_mps_num(v.lower)}")
            continue
        if v.lower != 0.0:
            rows.append(f" LO BND       {v.id:<10}{_mps_num(v.lower)}")
        if math.isfinite(v.upper):
            rows.append(f" UP BND       {v.id:<10}{_mps_num(v.upper)}")
    rows.append("ENDATA")
    return "\n".join(rows) + "\n"


def export_mps(lp: LinearProgram, path: str) -> None:
    """Write one program per file in MPS layout."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_mps(lp))


def feasibility_residual(lp: LinearProgram, values: Mapping[str, float]) -> float:
    """Worst relative constraint residual of a candidate point."""
    worst = 0.0
    for c in lp.constraints:
        lhs = sum(coef * values[vid] for vid, coef in c.coeffs.items())
        scale = max(1.0, abs(c.rhs))
        if c.relation == EQUAL:
            r = abs(lhs - c.rhs) / scale
        elif c.relation == LESS_EQUAL:
            r = max(0.0, lhs - c.rhs) / scale
        else:
            r = max(0.0, c.rhs - lhs) / scale
        worst = max(worst, r)
    return worst


def validate_solution(lp: LinearProgram, sol: LpSolution, rel_tol: float = 1e-7) -> None:
    """Raise when an optimal solution violates bounds or constraints."""
    if not sol.is_optimal:
        return
    for v in lp.variables:
        x = sol.values[v.id]
        if x < v.lower - 1e-9 or x > v.upper + 1e-9:
            raise NumericalInstabilityError(f"variable {v.id!r} out of bounds: {x}")
    r = feasibility_residual(lp, sol.values)
    if r > rel_tol:
        raise NumericalInstabilityError(f"constraint residual {r:.3e} exceeds {rel_tol:.1e}")


def iter_nonzero(mapping: Mapping[str, float]) -> Iterable[tuple[str, float]]:
    for k, v in mapping.items():
        if v != 0.0:
            yield k, v
