"""LP kernel tests: worked examples, oracle equivalence, determinism."""

import math

import numpy as np
import pytest

from nearopt import lp

from oracles import brute_force_lp_min


def make_lp(variables, constraints, objective, name="lp"):
    vs = tuple(lp.Variable(vid, lo, up) for vid, lo, up in variables)
    cs = tuple(lp.Constraint(co, rel, rhs) for co, rel, rhs in constraints)
    return lp.LinearProgram(vs, cs, objective, name)


def test_corner_solution():
    prog = make_lp(
        [("x", 0, math.inf), ("y", 0, math.inf)],
        [({"x": 1, "y": 1}, "<=", 1.0), ({"x": 1}, "<=", 0.6)],
        {"x": -1.0, "y": -2.0},
    )
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    assert sol.values["x"] == pytest.approx(0.0, abs=1e-9)
    assert sol.values["y"] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective == pytest.approx(-2.0, abs=1e-9)


def test_contradictory_bounds_infeasible():
    prog = make_lp(
        [("x", 0, math.inf)],
        [({"x": 1}, ">=", 3.0), ({"x": 1}, "<=", 2.0)],
        {"x": 1.0},
    )
    assert lp.solve(prog).status == "infeasible"


def test_binding_constraint():
    prog = make_lp(
        [("x1", 0, 1), ("x2", 0, 1)],
        [({"x1": 1, "x2": 1}, ">=", 1.0)],
        {"x1": 1.0, "x2": 1.0},
    )
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-9)


def test_unbounded_detected():
    prog = make_lp(
        [("x", 0, math.inf)],
        [({"x": 1}, ">=", 1.0)],
        {"x": -1.0},
    )
    assert lp.solve(prog).status == "unbounded"


def test_equality_constraints():
    prog = make_lp(
        [("x", 0, 10), ("y", 0, 10)],
        [({"x": 1, "y": 2}, "=", 4.0), ({"x": 1, "y": -1}, "<=", 1.0)],
        {"x": 3.0, "y": 1.0},
    )
    sol = lp.solve(prog)
    assert sol.status == "optimal"
    # y as large as possible: x=0, y=2
    assert sol.values["x"] == pytest.approx(0.0, abs=1e-9)
    assert sol.values["y"] == pytest.approx(2.0, abs=1e-9)


def random_program(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 5))
    lower = rng.uniform(-5.0, 0.0, size=n)
    upper = lower + rng.uniform(0.5, 6.0, size=n)
    A = rng.uniform(-3.0, 3.0, size=(m, n))
    # pick rhs around a random interior-ish point so many instances are feasible
    mid = (lower + upper) / 2.0
    b = A @ mid + rng.uniform(-2.0, 4.0, size=m)
    rel = rng.choice(["<=", ">="], size=m)
    c = rng.uniform(-2.0, 2.0, size=n)
    names = [f"x{j}" for j in range(n)]
    prog = make_lp(
        [(names[j], float(lower[j]), float(upper[j])) for j in range(n)],
        [
            ({names[j]: float(A[i, j]) for j in range(n)}, str(rel[i]), float(b[i]))
            for i in range(m)
        ],
        {names[j]: float(c[j]) for j in range(n)},
    )
    A_ub, b_ub = [], []
    for i in range(m):
        if rel[i] == "<=":
            A_ub.append(A[i])
            b_ub.append(b[i])
        else:
            A_ub.append(-A[i])
            b_ub.append(-b[i])
    return prog, (c, A_ub, b_ub, [], [], lower, upper)


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(20240811)
    solved = 0
    for _ in range(100):
        prog, data = random_program(rng)
        status, ref = brute_force_lp_min(*data)
        sol = lp.solve(prog)
        assert sol.status == status
        if status == "optimal":
            solved += 1
            assert sol.objective == pytest.approx(ref, rel=1e-7, abs=1e-9)
    assert solved >= 50  # the generator must actually exercise the solver


def test_determinism_bitwise():
    rng = np.random.default_rng(7)
    prog, _ = random_program(rng)
    a = lp.solve(prog)
    b = lp.solve(prog)
    assert a.values == b.values  # exact float equality, not approx
    assert a.objective == b.objective


def test_relaxation_never_increases_objective():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 20:
        prog, _ = random_program(rng)
        full = lp.solve(prog)
        if full.status != "optimal" or len(prog.constraints) < 2:
            continue
        relaxed = lp.LinearProgram(
            prog.variables, prog.constraints[:-1], prog.objective
        )
        rsol = lp.solve(relaxed)
        assert rsol.status == "optimal"
        assert rsol.objective <= full.objective + 1e-7 * max(1.0, abs(full.objective))
        checked += 1


def test_add_constraint_returns_new_program():
    prog = make_lp(
        [("x1", 0, 10), ("x2", 0, 10)],
        [({"x1": 1}, "<=", 5.0), ({"x2": 1}, "<=", 5.0)],
        {"x1": 1.0},
    )
    grown = lp.add_constraint(prog, lp.Constraint({"x1": 1.0}, "<=", 5.0))
    assert len(grown.constraints) == 3
    assert len(prog.constraints) == 2


def test_add_constraint_unknown_variable():
    prog = make_lp([("x1", 0, 1)], [], {"x1": 1.0})
    with pytest.raises(lp.UnknownVariableError):
        lp.add_constraint(prog, lp.Constraint({"zz": 1.0}, "<=", 1.0))


def test_cost_cap_constraint_respected():
    prog = make_lp(
        [("x", 0, 4), ("y", 0, 4)],
        [({"x": 1, "y": 1}, ">=", 2.0)],
        {"x": 1.0, "y": 3.0},
    )
    base = lp.solve(prog)
    capped = lp.add_constraint(
        prog, lp.Constraint(dict(prog.objective), "<=", 1.5 * base.objective)
    )
    # maximize y under the cost cap
    probe = lp.with_objective(capped, {"y": -1.0})
    sol = lp.solve(probe)
    realised = lp.objective_value(prog, sol.values)
    assert realised <= 1.5 * base.objective + 1e-9


def test_warm_start_after_row_append():
    prog = make_lp(
        [("x", 0, 4), ("y", 0, 4)],
        [({"x": 1, "y": 1}, ">=", 2.0)],
        {"x": 1.0, "y": 3.0},
    )
    base = lp.solve(prog)
    capped = lp.add_constraint(
        prog, lp.Constraint(dict(prog.objective), "<=", 1.2 * base.objective)
    )
    warm = lp.extend_state_for_new_rows(base.state, 1)
    cold = lp.solve(lp.with_objective(capped, {"y": -1.0}))
    warmed = lp.solve(lp.with_objective(capped, {"y": -1.0}), warm=warm)
    assert warmed.status == "optimal"
    assert warmed.objective == pytest.approx(cold.objective, rel=1e-9, abs=1e-12)


def test_variable_bound_validation():
    with pytest.raises(lp.LpError):
        lp.Variable("x", 2.0, 1.0)
    with pytest.raises(lp.LpError):
        lp.Variable("x", -math.inf, 1.0)


def test_fixed_variable_and_free_row():
    prog = make_lp(
        [("x", 2, 2), ("y", 0, 5)],
        [({"x": 1, "y": 1}, "<=", 6.0)],
        {"y": -1.0},
    )
    sol = lp.solve(prog)
    assert sol.values["x"] == pytest.approx(2.0, abs=1e-12)
    assert sol.values["y"] == pytest.approx(4.0, abs=1e-9)


def test_mps_export_layout():
    prog = make_lp(
        [("x1", 0, 4), ("x2", 1, math.inf)],
        [({"x1": 1, "x2": 2}, "<=", 14.0), ({"x1": 3, "x2": -1}, ">=", 0.0)],
        {"x1": -2.0, "x2": -3.0},
        name="tiny",
    )
    text = lp.write_mps(prog)
    lines = text.splitlines()
    assert lines[0].startswith("NAME")
    assert "ROWS" in lines and "COLUMNS" in lines and "RHS" in lines
    assert " L  R1" in lines
    assert " G  R2" in lines
    assert "    x1        COST      -2" in lines
    assert "    x1        R1        1" in lines
    assert " UP BND       x1        4" in lines
    assert " LO BND       x2        1" in lines
    assert lines[-1] == "ENDATA"
