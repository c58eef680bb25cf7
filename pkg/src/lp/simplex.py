"""
Dense bounded-variable primal simplex.

Problems have the form  min/max c'x  s.t.  A_eq x = b_eq,  lower <= x <= upper
with infinite bounds allowed. Every LP in this project is small and dense,
so the full tableau is kept and refactored from the basis periodically.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..utils.errors import DimensionMismatchError

PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    SOLVER_ERROR = "solver_error"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sense: str = "minimize"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        n = c.shape[0]
        A = np.asarray(self.A_eq, dtype=float)
        if A.ndim < 2:
            # a 2-D array keeps its row count even with zero columns
            A = A.reshape(0, n) if A.size == 0 else A.reshape(1, -1)
        b = np.atleast_1d(np.asarray(self.b_eq, dtype=float)).reshape(-1)
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()

        if A.shape[1] != n:
            raise DimensionMismatchError(f"A_eq has {A.shape[1]} columns, objective has {n} entries")
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatchError(f"A_eq has {A.shape[0]} rows, b_eq has {b.shape[0]} entries")
        if np.any(lower > upper):
            raise ValueError("Variable lower bound exceeds upper bound")
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"Unknown sense '{self.sense}'")

        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A_eq", A)
        object.__setattr__(self, "b_eq", b)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def num_vars(self):
        return self.objective.shape[0]

    @property
    def num_rows(self):
        return self.A_eq.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    objective_value: float
    point: np.ndarray
    iterations: int = 0

    @property
    def ok(self):
        return self.status == LpStatus.OPTIMAL


class _Tableau:
    """Working state of one simplex run over  A y = b,  0 <= y <= ub."""

    def __init__(self, A, b, ub):
        m, N = A.shape
        sign = np.where(b < 0, -1.0, 1.0)
        A = A * sign[:, None]
        b = b * sign
        self.num_structural = N
        self.A_full = np.hstack([A, np.eye(m)])
        self.b = b
        self.T = self.A_full.copy()
        self.ub = np.concatenate([ub, np.full(m, np.inf)])
        self.x = np.concatenate([np.zeros(N), b])
        self.basis = list(range(N, N + m))
        self.at_upper = np.zeros(N + m, dtype=bool)

    @property
    def m(self):
        return len(self.basis)

    def pivot(self, r, j):
        T = self.T
        T[r] = T[r] / T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j

    def refactor(self):
        """Rebuilds the tableau and basic values from the current basis."""
        if self.m == 0:
            return True
        B = self.A_full[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.A_full)
            nonbasic = np.ones(self.A_full.shape[1], dtype=bool)
            nonbasic[self.basis] = False
            rhs = self.b - self.A_full[:, nonbasic] @ self.x[nonbasic]
            self.x[self.basis] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            return False
        return True

    def drop_rows(self, rows):
        keep = [r for r in range(self.m) if r not in set(rows)]
        self.A_full = self.A_full[keep]
        self.b = self.b[keep]
        self.T = self.T[keep]
        self.basis = [self.basis[r] for r in keep]


class SimplexSolver:
    """
    Two-phase bounded-variable simplex with Dantzig pricing and a Bland
    fallback once a phase has run 5 * (number of variables) iterations.

    One instance per caller: it keeps counters across solves.
    """

    def __init__(self, tol_feas=1e-9, tol_opt=1e-8, max_iter=None):
        self.tol_feas = tol_feas
        self.tol_opt = tol_opt
        self.max_iter = max_iter
        self.logger = logging.getLogger("Simplex")
        self.solves = 0
        self.total_iterations = 0
        self.bland_switches = 0

    def solve(self, lp):
        self.solves += 1
        c = lp.objective if lp.sense == "minimize" else -lp.objective
        A, b = lp.A_eq, lp.b_eq

        # 1. Shift/split variables so every column lives in [0, ub]
        offset = np.zeros(lp.num_vars)
        col_orig, col_sign, col_ub = [], [], []
        for j in range(lp.num_vars):
            lo, hi = lp.lower[j], lp.upper[j]
            if np.isfinite(lo):
                offset[j] = lo
                col_orig.append(j); col_sign.append(1.0); col_ub.append(hi - lo)
            elif np.isfinite(hi):
                offset[j] = hi
                col_orig.append(j); col_sign.append(-1.0); col_ub.append(np.inf)
            else:
                col_orig.extend([j, j]); col_sign.extend([1.0, -1.0]); col_ub.extend([np.inf, np.inf])
        col_orig = np.array(col_orig, dtype=int)
        col_sign = np.array(col_sign, dtype=float)
        col_ub = np.array(col_ub, dtype=float)

        A_std = A[:, col_orig] * col_sign if col_orig.size else np.zeros((A.shape[0], 0))
        c_std = c[col_orig] * col_sign if col_orig.size else np.zeros(0)
        b_std = b - A @ offset

        status, y, iterations = self._solve_standard(A_std, b_std, c_std, col_ub)
        self.total_iterations += iterations
        if status != LpStatus.OPTIMAL:
            return LpSolution(status, np.nan, np.full(lp.num_vars, np.nan), iterations)

        x = offset.copy()
        np.add.at(x, col_orig, col_sign * y)
        x = np.clip(x, lp.lower, lp.upper)

        scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
        residual = float(np.max(np.abs(A @ x - b), initial=0.0))
        if residual > self.tol_feas * scale:
            self.logger.warning(f"Equality residual {residual:.3e} above tolerance after refinement")
            return LpSolution(LpStatus.SOLVER_ERROR, np.nan, x, iterations)

        return LpSolution(LpStatus.OPTIMAL, float(lp.objective @ x), x, iterations)

    def _solve_standard(self, A, b, c, ub):
        m, N = A.shape
        tab = _Tableau(A, b, ub)
        allowed = np.ones(N + m, dtype=bool)
        iterations = 0

        # 2. Phase 1: drive the artificial columns to zero
        if m > 0:
            cost1 = np.concatenate([np.zeros(N), np.ones(m)])
            status, it = self._iterate(tab, cost1, allowed)
            iterations += it
            if status == LpStatus.SOLVER_ERROR:
                return status, None, iterations
            infeasibility = float(np.sum(tab.x[N:]))
            if infeasibility > self.tol_feas * max(1.0, float(np.max(np.abs(b)))):
                return LpStatus.INFEASIBLE, None, iterations

            redundant = []
            for r in range(tab.m):
                if tab.basis[r] < N:
                    continue
                row = np.abs(tab.T[r, :N]).copy()
                row[[k for k in tab.basis if k < N]] = 0.0
                j = int(np.argmax(row)) if N else -1
                if N and row[j] > PIVOT_TOL:
                    tab.pivot(r, j)
                else:
                    redundant.append(r)
            if redundant:
                tab.drop_rows(redundant)
            tab.x[N:] = 0.0
            tab.at_upper[N:] = False
            allowed[N:] = False
            if not tab.refactor():
                return LpStatus.SOLVER_ERROR, None, iterations

        # 3. Phase 2 on the original objective
        cost2 = np.concatenate([c, np.zeros(m)])
        status, it = self._iterate(tab, cost2, allowed)
        iterations += it
        if status != LpStatus.OPTIMAL:
            return status, None, iterations
        if not tab.refactor():
            return LpStatus.SOLVER_ERROR, None, iterations

        y = tab.x[:N]
        bound_tol = self.tol_feas * max(1.0, float(np.max(np.abs(b), initial=0.0)))
        if np.any(y < -bound_tol) or np.any(y > ub + bound_tol):
            return LpStatus.SOLVER_ERROR, None, iterations
        return LpStatus.OPTIMAL, np.clip(y, 0.0, ub), iterations

    def _iterate(self, tab, cost, allowed):
        total = tab.T.shape[1]
        bland_after = 5 * total
        max_iter = self.max_iter or 50 * (total + tab.m + 10)
        use_bland = False
        it = 0

        while True:
            if it >= max_iter:
                self.logger.warning(f"Iteration limit {max_iter} reached")
                return LpStatus.SOLVER_ERROR, it
            if not use_bland and it >= bland_after:
                use_bland = True
                self.bland_switches += 1
                self.logger.warning(f"Switching to Bland's rule after {it} iterations")

            basis = tab.basis
            d = cost - cost[basis] @ tab.T
            is_basic = np.zeros(total, dtype=bool)
            is_basic[basis] = True
            improving = allowed & ~is_basic & (tab.ub > 0) & (
                (~tab.at_upper & (d < -self.tol_opt)) | (tab.at_upper & (d > self.tol_opt)))
            if not improving.any():
                return LpStatus.OPTIMAL, it

            candidates = np.flatnonzero(improving)
            j = int(candidates[0]) if use_bland else int(candidates[np.argmax(np.abs(d[candidates]))])
            s = -1.0 if tab.at_upper[j] else 1.0
            delta = -s * tab.T[:, j]

            xb = tab.x[basis]
            ubb = tab.ub[basis]
            ratios = np.full(tab.m, np.inf)
            dec = delta < -PIVOT_TOL
            inc = (delta > PIVOT_TOL) & np.isfinite(ubb)
            ratios[dec] = xb[dec] / -delta[dec]
            ratios[inc] = (ubb[inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            r_min = float(ratios.min()) if tab.m else np.inf
            t_flip = tab.ub[j]

            if not np.isfinite(min(r_min, t_flip)):
                return LpStatus.UNBOUNDED, it

            if t_flip <= r_min:
                tab.x[basis] = xb + delta * t_flip
                tab.x[j] = tab.ub[j] if s > 0 else 0.0
                tab.at_upper[j] = s > 0
            else:
                ties = np.flatnonzero(ratios <= r_min + 1e-12)
                if use_bland:
                    r = int(min(ties, key=lambda k: basis[k]))
                else:
                    r = int(ties[np.argmax(np.abs(delta[ties]))])
                t = ratios[r]
                leaving = basis[r]
                hits_upper = delta[r] > 0
                tab.x[basis] = xb + delta * t
                tab.x[j] += s * t
                tab.x[leaving] = tab.ub[leaving] if hits_upper else 0.0
                tab.at_upper[leaving] = hits_upper
                tab.at_upper[j] = False
                tab.pivot(r, j)

            it += 1
            if it % REFACTOR_EVERY == 0 and not tab.refactor():
                return LpStatus.SOLVER_ERROR, it


def solve(lp, solver=None):
    """Solves one LinearProgram with a fresh (or the given) solver."""
    return (solver or SimplexSolver()).solve(lp)
