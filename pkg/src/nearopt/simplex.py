"""Bounded-variable revised simplex engine (dense, two-phase).

Pivoting is deterministic: Dantzig pricing with first-index tie-breaks,
falling back to Bland's rule after a run of degenerate steps so termination
is guaranteed. The basis inverse is maintained by product-form updates and
refactorised periodically. Dense arithmetic is sufficient at the intended
scale (a few thousand variables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Reduced-cost optimality tolerance, scaled by the objective's magnitude.
OPT_TOL = 1e-9
# Relative feasibility tolerance on row residuals.
FEAS_TOL = 1e-7
# Smallest usable pivot element.
PIVOT_TOL = 1e-9
# Degenerate steps tolerated before switching to Bland's rule.
DEGENERATE_STREAK = 24
# Pivots between basis refactorisations.
REFACTOR_EVERY = 64

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2


class SimplexError(Exception):
    """Numerical failure: singular basis, stall, or residual blow-up."""


@dataclass(frozen=True)
class BasisState:
    """Opaque snapshot of an optimal basis for warm starts.

    Column indices refer to the program's structural-plus-slack columns in
    construction order, so a state stays valid for programs derived by
    appending constraints.
    """

    basic: tuple[int, ...]
    at_upper: tuple[int, ...]
    n_rows: int
    n_cols: int


def extend_basis(state: BasisState, n_new_rows: int) -> BasisState:
    """Basis for a program with appended rows: each new row's slack enters."""
    new_slack = tuple(state.n_cols + k for k in range(n_new_rows))
    return BasisState(
        basic=state.basic + new_slack,
        at_upper=state.at_upper,
        n_rows=state.n_rows + n_new_rows,
        n_cols=state.n_cols + n_new_rows,
    )


class Tableau:
    """Private working storage for one solve.

    Columns are laid out as ``[structural | one slack per inequality row |
    one artificial per row]``. Artificial columns are pinned to zero except
    while phase 1 is running.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray,
                 lower: np.ndarray, upper: np.ndarray, n_struct: int) -> None:
        m, n_real = A.shape
        self.m = m
        self.n_real = n_real
        self.n_struct = n_struct
        # Artificial signs depend only on the deterministic cold-start point.
        x0 = lower.copy()
        resid = b - A @ x0
        art_sign = np.where(resid >= 0.0, 1.0, -1.0)
        self.A = np.hstack([A, np.diag(art_sign)]) if m else A.copy()
        self.n = self.A.shape[1]
        self.b = b
        self.c = np.concatenate([c, np.zeros(m)])
        self.lower = np.concatenate([lower, np.zeros(m)])
        self.upper = np.concatenate([upper, np.zeros(m)])
        self.scale_b = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)

    @classmethod
    def from_program(cls, lp) -> "Tableau":
        n_struct = len(lp.variables)
        index = {v.id: j for j, v in enumerate(lp.variables)}
        m = len(lp.constraints)
        n_slack = sum(1 for c in lp.constraints if c.relation != "=")
        n = n_struct + n_slack
        A = np.zeros((m, n))
        b = np.zeros(m)
        lower = np.zeros(n)
        upper = np.full(n, math.inf)
        for j, v in enumerate(lp.variables):
            lower[j] = v.lower
            upper[j] = v.upper
        slack = n_struct
        for i, con in enumerate(lp.constraints):
            for vid, coef in con.coeffs.items():
                A[i, index[vid]] += coef
            b[i] = con.rhs
            if con.relation == "<=":
                A[i, slack] = 1.0
                slack += 1
            elif con.relation == ">=":
                A[i, slack] = -1.0
                slack += 1
        c = np.zeros(n)
        for vid, coef in lp.objective.items():
            c[index[vid]] += coef
        return cls(A, b, c, lower, upper, n_struct)

    # -- basis bookkeeping ----------------------------------------------------

    def _refactor(self) -> None:
        B = self.A[:, self.basic]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis") from exc
        self._recompute_xb()

    def _recompute_xb(self) -> None:
        x = np.where(self.status == AT_UPPER, np.minimum(self.upper, 1e300), self.lower)
        nb = self.status != BASIC
        rhs = self.b - self.A[:, nb] @ x[nb]
        x[self.basic] = self.Binv @ rhs
        self.x = x

    # -- core iteration ---------------------------------------------------------

    def _iterate(self, c: np.ndarray) -> str:
        """Minimise ``c`` from the current basis; 'optimal' or 'unbounded'."""
        opt_tol = OPT_TOL * max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
        movable = (self.upper - self.lower) > 0.0
        degenerate_streak = 0
        pivots_since_refactor = 0
        max_iter = 200 * (self.m + self.n) + 2000
        for _ in range(max_iter):
            y = c[self.basic] @ self.Binv
            d = c - y @ self.A
            eligible = movable & (
                ((self.status == AT_LOWER) & (d < -opt_tol))
                | ((self.status == AT_UPPER) & (d > opt_tol))
            )
            idx = np.flatnonzero(eligible)
            if idx.size == 0:
                return "optimal"
            if degenerate_streak >= DEGENERATE_STREAK:
                q = int(idx[0])  # Bland's rule: lowest index
            else:
                q = int(idx[int(np.argmax(np.abs(d[idx])))])
            sense = 1.0 if self.status[q] == AT_LOWER else -1.0
            w = self.Binv @ self.A[:, q]
            step, leave_row, leave_to = self._ratio_test(q, sense, w)
            if step is None:
                return "unbounded"
            degenerate_streak = degenerate_streak + 1 if step <= 1e-12 else 0
            if leave_row is None:
                # bound flip: q jumps to its other bound, basis unchanged
                self.x[self.basic] -= sense * step * w
                if self.status[q] == AT_LOWER:
                    self.x[q] = self.upper[q]
                    self.status[q] = AT_UPPER
                else:
                    self.x[q] = self.lower[q]
                    self.status[q] = AT_LOWER
                continue
            p = self.basic[leave_row]
            self.x[self.basic] -= sense * step * w
            self.x[q] = (self.lower[q] if sense > 0 else self.upper[q]) + sense * step
            self.x[p] = self.lower[p] if leave_to == AT_LOWER else self.upper[p]
            self.status[p] = leave_to
            self.status[q] = BASIC
            self.basic[leave_row] = q
            self._update_binv(leave_row, w)
            pivots_since_refactor += 1
            if pivots_since_refactor >= REFACTOR_EVERY:
                self._refactor()
                pivots_since_refactor = 0
        raise SimplexError("iteration limit exceeded")

    def _ratio_test(self, q: int, sense: float, w: np.ndarray):
        """Largest feasible step for entering column ``q``.

        Returns (step, leaving_row, leaving_status); leaving_row None means a
        bound flip, step None means unbounded in this direction.
        """
        xb = self.x[self.basic]
        lo = self.lower[self.basic]
        up = self.upper[self.basic]
        delta = sense * w
        ratios = np.full(self.m, math.inf)
        pos = delta > PIVOT_TOL
        ratios[pos] = (xb[pos] - lo[pos]) / delta[pos]
        neg = (delta < -PIVOT_TOL) & np.isfinite(up)
        ratios[neg] = (xb[neg] - up[neg]) / delta[neg]
        ratios = np.maximum(ratios, 0.0)
        best = float(np.min(ratios)) if self.m else math.inf
        span = self.upper[q] - self.lower[q]
        if span <= best:
            return (None, None, None) if math.isinf(span) else (span, None, None)
        if math.isinf(best):
            return None, None, None
        cand = np.flatnonzero(ratios <= best + 1e-10)
        # lowest basic-variable index among ties: deterministic, and the
        # choice Bland's anti-cycling argument requires
        leave_row = int(cand[int(np.argmin(self.basic[cand]))])
        leave_to = AT_LOWER if delta[leave_row] > 0 else AT_UPPER
        return best, leave_row, leave_to

    def _update_binv(self, r: int, w: np.ndarray) -> None:
        piv = w[r]
        if abs(piv) < PIVOT_TOL:
            raise SimplexError("pivot too small")
        row = self.Binv[r] / piv
        self.Binv -= np.outer(w, row)
        self.Binv[r] = row

    # -- driver -------------------------------------------------------------------

    def solve(self, warm: BasisState | None = None):
        """Two-phase solve; returns (status, structural values, basis state)."""
        if self.m == 0:
            if np.any((self.c[: self.n_real] < 0) & ~np.isfinite(self.upper[: self.n_real])):
                return "unbounded", None, None
            x = self.lower[: self.n_real].copy()
            neg = self.c[: self.n_real] < 0
            x[neg] = self.upper[: self.n_real][neg]
            at_up = tuple(int(j) for j in np.flatnonzero(neg))
            return "optimal", x[: self.n_struct], BasisState((), at_up, 0, self.n_real)

        if warm is None or not self._try_warm(warm):
            if not self._phase_one():
                return "infeasible", None, None

        status = self._iterate(self.c)
        if status == "unbounded":
            return "unbounded", None, None
        self._refactor()  # clean residual drift before reporting
        self._check_residuals()
        self._polish()
        x = self.x[: self.n_struct].copy()
        if any(j >= self.n_real for j in self.basic):
            state = None  # degenerate artificial stuck in basis: not reusable
        else:
            state = BasisState(
                basic=tuple(int(j) for j in self.basic),
                at_upper=tuple(int(j) for j in np.flatnonzero(self.status[: self.n_real] == AT_UPPER)),
                n_rows=self.m,
                n_cols=self.n_real,
            )
        return "optimal", x, state

    def _try_warm(self, warm: BasisState) -> bool:
        if warm.n_rows != self.m or warm.n_cols != self.n_real or len(warm.basic) != self.m:
            return False
        self.status = np.full(self.n, AT_LOWER, dtype=np.int8)
        self.status[list(warm.at_upper)] = AT_UPPER
        self.basic = np.asarray(warm.basic, dtype=int)
        self.status[self.basic] = BASIC
        try:
            self._refactor()
        except SimplexError:
            return False
        tol = 1e-9 * self.scale_b
        xb = self.x[self.basic]
        lo = self.lower[self.basic]
        up = np.minimum(self.upper[self.basic], 1e300)
        return bool(np.all(xb >= lo - tol) and np.all(xb <= up + tol))

    def _phase_one(self) -> bool:
        """Drive artificial variables to zero from the deterministic cold start."""
        n, m = self.n_real, self.m
        arts = np.arange(n, n + m)
        self.upper[arts] = math.inf
        self.status = np.full(self.n, AT_LOWER, dtype=np.int8)
        self.basic = arts.copy()
        self.status[arts] = BASIC
        self.Binv = np.diag(1.0 / np.diag(self.A[:, arts]))
        self._recompute_xb()
        c1 = np.zeros(self.n)
        c1[arts] = 1.0
        self._iterate(c1)
        infeas = float(np.sum(self.x[arts]))
        self.upper[arts] = 0.0
        if infeas > FEAS_TOL * self.scale_b:
            return False
        self._purge_artificials()
        return True

    def _purge_artificials(self) -> None:
        """Pivot zero-valued basic artificials out wherever a real column can
        replace them; redundant rows keep theirs, pinned at zero."""
        n = self.n_real
        for row in range(self.m):
            p = self.basic[row]
            if p < n:
                continue
            e = self.Binv[row] @ self.A[:, :n]
            nonbasic_real = self.status[:n] != BASIC
            cand = np.flatnonzero(nonbasic_real & (np.abs(e) > 1e-7))
            if cand.size == 0:
                continue
            q = int(cand[0])
            w = self.Binv @ self.A[:, q]
            self.status[p] = AT_LOWER
            self.status[q] = BASIC
            self.basic[row] = q
            self._update_binv(row, w)
        self._recompute_xb()

    def _check_residuals(self) -> None:
        resid = self.A @ self.x - self.b
        worst = float(np.max(np.abs(resid))) if resid.size else 0.0
        if worst > FEAS_TOL * self.scale_b:
            raise SimplexError(f"residual {worst:.3e} exceeds tolerance after refinement")

    def _polish(self) -> None:
        """Clip round-off bound violations; interior values stay untouched."""
        tol = FEAS_TOL * self.scale_b
        below = self.x < self.lower
        above = np.isfinite(self.upper) & (self.x > self.upper)
        worst = 0.0
        if below.any():
            worst = float(np.max(self.lower[below] - self.x[below]))
        if above.any():
            worst = max(worst, float(np.max((self.x - self.upper)[above])))
        if worst > tol:
            raise SimplexError(f"bound violation {worst:.3e} exceeds tolerance")
        self.x[below] = self.lower[below]
        self.x[above] = self.upper[above]
