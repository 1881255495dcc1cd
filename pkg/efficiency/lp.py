"""
Dense two-phase primal simplex with bounded variables, and a depth-first
branch-and-bound layer for binary variables.

Every program is stated as ``max c'x  s.t.  Ax = b,  lower <= x <= upper``.
Inequalities are turned into equalities by the caller with explicit slack
columns.

Optimal solutions are basic (vertices). Solving the RAM program this way can
therefore return an intensity vector that is *not* maximal: a vertex hides the
other optima of a degenerate face. That is why reference sets are identified
by the programs in ``grs`` instead of by reading the RAM solution.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.db.models import TextChoices

from .conf import get_setting
from .exceptions import DimensionMismatch, NodeLimitExceeded, SolverFailure

logger = logging.getLogger(__name__)

REDUCED_COST_EPS = 1e-9
# bound relaxation of the first pass of the ratio test, in original units
HARRIS_EPS = 1e-9


class LpStatus(TextChoices):
    OPTIMAL = 'optimal', 'Optimal'
    INFEASIBLE = 'infeasible', 'Infeasible'
    UNBOUNDED = 'unbounded', 'Unbounded'


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """
    max c'x subject to Ax = b and lower <= x <= upper.

    ``lower`` defaults to 0 and must be finite; ``upper`` defaults to +inf.
    """
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(len(b), len(c))
        lower = np.zeros(len(c)) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        upper = np.full(len(c), np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if A.ndim != 2 or A.shape != (len(b), len(c)):
            raise DimensionMismatch(
                f"constraint matrix has shape {A.shape}, expected ({len(b)}, {len(c)})"
            )
        if len(lower) != len(c) or len(upper) != len(c):
            raise DimensionMismatch(f"bounds must have length {len(c)}")
        if not np.all(np.isfinite(lower)):
            raise DimensionMismatch("lower bounds must be finite")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise DimensionMismatch("program data must be finite")
        for name, value in (('c', c), ('A', A), ('b', b), ('lower', lower), ('upper', upper)):
            object.__setattr__(self, name, value)

    @property
    def num_rows(self):
        return self.A.shape[0]

    @property
    def num_cols(self):
        return self.A.shape[1]

    def with_bounds(self, lower, upper):
        return replace(self, lower=lower, upper=upper)

    def residual(self, x):
        """Infinity norm of Ax - b."""
        if self.num_rows == 0:
            return 0.0
        return float(np.max(np.abs(self.A @ x - self.b)))


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = None
    objective_value: float = None
    iterations: int = 0
    nodes: int = 0
    # optimum of the root relaxation, set by branch-and-bound
    bound: float = None

    @property
    def is_optimal(self):
        return self.status == LpStatus.OPTIMAL


@dataclass(frozen=True, eq=False)
class MixedIntegerProgram:
    """
    A LinearProgram some of whose variables are restricted to {0, 1}
    """
    base: LinearProgram
    binary_indices: tuple = field(default_factory=tuple)

    def __post_init__(self):
        indices = tuple(int(k) for k in self.binary_indices)
        object.__setattr__(self, 'binary_indices', indices)
        for k in indices:
            if not 0 <= k < self.base.num_cols:
                raise DimensionMismatch(f"binary index {k} out of range")
            if self.base.lower[k] != 0 or self.base.upper[k] != 1:
                raise DimensionMismatch(f"binary variable {k} must have bounds [0, 1]")


def _geometric_middle(magnitude, axis):
    largest = magnitude.max(axis=axis)
    smallest = np.where(magnitude > 0, magnitude, np.inf).min(axis=axis)
    return np.where(largest > 0, np.sqrt(largest * np.where(np.isfinite(smallest), smallest, 1.0)), 1.0)


def equilibrate(A, passes=4):
    """
    Row and column scale factors (powers of two) that bring the nonzero
    magnitudes of ``A`` close to 1. All-zero rows and columns keep scale 1.
    """
    rows, cols = A.shape
    row_scale = np.ones(rows)
    col_scale = np.ones(cols)
    if A.size == 0:
        return row_scale, col_scale
    magnitude = np.abs(A)
    for _ in range(passes):
        row_scale /= _geometric_middle(magnitude * row_scale[:, None] * col_scale, axis=1)
        col_scale /= _geometric_middle(magnitude * row_scale[:, None] * col_scale, axis=0)
    return np.exp2(np.round(np.log2(row_scale))), np.exp2(np.round(np.log2(col_scale)))


class SimplexSolver:
    """
    Single-use solver for one LinearProgram.

    Revised simplex on the equilibrated program. The basis inverse is updated
    in product form after each pivot and recomputed from the original columns
    every ``REFACTOR_INTERVAL`` pivots and before optimality is declared.
    Phase 1 minimizes the sum of one artificial column per row; phase 2 keeps
    the artificial columns fixed at zero, so redundant rows need no special
    handling. Pricing is Dantzig's rule until 5 * (rows + cols) degenerate
    steps have been taken in a phase, then Bland's rule. Outside Bland's rule
    the leaving row comes from a Harris two-pass ratio test.
    """

    def __init__(self, lp, tol, pivot_eps=None, max_iterations=None):
        self.lp = lp
        self.tol = tol
        self.pivot_eps = pivot_eps if pivot_eps is not None else get_setting('PIVOT_EPS')
        self.refactor_interval = get_setting('REFACTOR_INTERVAL')
        rows, cols = lp.num_rows, lp.num_cols
        self.max_iterations = max_iterations or 50 * (rows + cols) + 1000
        self.iterations = 0

    def solve(self):
        lp = self.lp
        rows, n = lp.num_rows, lp.num_cols
        width = lp.upper - lp.lower
        if np.any(width < -self.tol.feasibility_eps):
            return LpSolution(LpStatus.INFEASIBLE)
        width = np.maximum(width, 0.0)

        rhs = lp.b - lp.A @ lp.lower
        sign = np.where(rhs < 0, -1.0, 1.0)
        self.row_scale, self.col_scale = equilibrate(lp.A)
        self.A1 = lp.A * (sign * self.row_scale)[:, None] * self.col_scale
        self.b1 = rhs * sign * self.row_scale

        self.full = np.hstack([self.A1, np.eye(rows)])
        self.ub = np.concatenate([width / self.col_scale, np.full(rows, np.inf)])
        self.basis = np.arange(n, n + rows)
        self.Binv = np.eye(rows)
        self.beta = self.b1.copy()
        self.at_upper = np.zeros(n + rows, dtype=bool)
        self.updates = 0

        eligible = np.concatenate([width > 0, np.zeros(rows, dtype=bool)])
        phase1_cost = np.concatenate([np.zeros(n), -np.ones(rows)])
        status = self._run(phase1_cost, eligible, 'phase 1')
        if status != LpStatus.OPTIMAL:
            raise SolverFailure(f"phase 1 ended with status {status}")
        # artificial values measured in the units of the original rows
        infeasibility = float(np.max(self._values()[n:] / self.row_scale, initial=0.0))
        scale = max(1.0, float(np.max(np.abs(rhs))) if rows else 1.0)
        if infeasibility > self.tol.feasibility_eps * scale:
            logger.debug("Phase 1 infeasibility %.3e: program infeasible", infeasibility)
            return LpSolution(LpStatus.INFEASIBLE, iterations=self.iterations)

        # artificials stay in the basis matrix, pinned to zero
        self.ub[n:] = 0.0
        phase2_cost = np.concatenate([lp.c * self.col_scale, np.zeros(rows)])
        status = self._run(phase2_cost, eligible, 'phase 2')
        if status == LpStatus.UNBOUNDED:
            return LpSolution(LpStatus.UNBOUNDED, iterations=self.iterations)
        return self._solution()

    def _values(self):
        values = np.where(self.at_upper, self.ub, 0.0)
        values[self.basis] = self.beta
        return values

    def _refactor(self):
        """Recompute the basis inverse and the basic values from the original columns."""
        rows = len(self.basis)
        self.updates = 0
        if rows == 0:
            return
        try:
            self.Binv = np.linalg.inv(self.full[:, self.basis])
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"numerical breakdown: singular basis after {self.iterations} iterations") from exc
        nonbasic = np.where(self.at_upper, self.ub, 0.0)
        nonbasic[self.basis] = 0.0
        self.beta = self.Binv @ (self.b1 - self.full @ nonbasic)

    def _ratio_test(self, direction, bland):
        """Leaving row and step length for a move along ``-direction``, or (None, inf)."""
        rows = len(self.basis)
        if rows == 0:
            return None, math.inf
        pivot_tol = self.pivot_eps * max(1.0, float(np.max(np.abs(direction))))
        basic_ub = self.ub[self.basis]
        falling = direction > pivot_tol
        rising = (direction < -pivot_tol) & np.isfinite(basic_ub)
        if not (falling.any() or rising.any()):
            return None, math.inf

        ratios = np.full(rows, np.inf)
        ratios[falling] = np.maximum(self.beta[falling], 0.0) / direction[falling]
        ratios[rising] = np.maximum(basic_ub[rising] - self.beta[rising], 0.0) / -direction[rising]
        if bland:
            step = float(ratios.min())
            ties = np.flatnonzero(ratios <= step + 1e-12 * (1.0 + step))
            r = int(ties[np.argmin(self.basis[ties])])
            return r, float(ratios[r])

        # Harris: longest step any row allows with relaxed bounds, then the
        # largest pivot among the rows blocking within that step
        relax = HARRIS_EPS / np.concatenate([self.col_scale, np.ones(rows)])[self.basis]
        relaxed = np.full(rows, np.inf)
        relaxed[falling] = (np.maximum(self.beta[falling], 0.0) + relax[falling]) / direction[falling]
        relaxed[rising] = (np.maximum(basic_ub[rising] - self.beta[rising], 0.0) + relax[rising]) / -direction[rising]
        limit = float(relaxed.min())
        blocking = np.flatnonzero(ratios <= limit)
        r = int(blocking[np.argmax(np.abs(direction[blocking]))])
        return r, float(ratios[r])

    def _run(self, cost, eligible, phase):
        rows, cols = self.full.shape
        threshold = 5 * (rows + cols)
        degenerate = 0
        bland = False
        cost_eps = REDUCED_COST_EPS * max(1.0, float(np.max(np.abs(cost))) if cols else 1.0)

        while True:
            if self.iterations >= self.max_iterations:
                raise SolverFailure(f"simplex iteration limit ({self.max_iterations}) reached in {phase}")
            reduced = cost - (cost[self.basis] @ self.Binv) @ self.full if rows else cost.copy()
            reduced[self.basis] = 0.0
            increase = eligible & ~self.at_upper & (reduced > cost_eps)
            decrease = eligible & self.at_upper & (reduced < -cost_eps)
            candidates = np.flatnonzero(increase | decrease)
            if candidates.size == 0:
                if self.updates == 0:
                    return LpStatus.OPTIMAL
                # optimality is only declared on a freshly factorized basis
                self._refactor()
                continue

            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(reduced[candidates]))])
            sigma = 1.0 if increase[j] else -1.0
            column = self.Binv @ self.full[:, j] if rows else np.zeros(0)
            direction = sigma * column
            r, step = self._ratio_test(direction, bland)

            if math.isinf(step) and math.isinf(self.ub[j]):
                logger.debug("%s: column %d is an unbounded ray", phase, j)
                return LpStatus.UNBOUNDED

            self.iterations += 1
            if self.ub[j] <= step:
                # bound flip, the basis does not change
                step = float(self.ub[j])
                self.beta = self.beta - step * direction
                self.at_upper[j] = not self.at_upper[j]
                self.updates += 1
            else:
                entering_value = self.ub[j] - step if self.at_upper[j] else step
                leaving = int(self.basis[r])
                rising = direction[r] < 0
                self.beta = self.beta - step * direction
                self.at_upper[leaving] = bool(rising)
                self.at_upper[j] = False
                self._pivot(r, j, column)
                self.beta[r] = entering_value
                if self.updates >= self.refactor_interval:
                    self._refactor()

            if step <= self.pivot_eps:
                degenerate += 1
                if not bland and degenerate >= threshold:
                    bland = True
                    logger.debug("%s: %d degenerate steps, switching to Bland's rule", phase, degenerate)

    def _pivot(self, r, j, column):
        pivot = column[r]
        if abs(pivot) < self.pivot_eps:
            raise SolverFailure(f"numerical breakdown: pivot {pivot:.3e} below pivot_eps")
        self.Binv[r] /= pivot
        eta = column.copy()
        eta[r] = 0.0
        self.Binv -= np.outer(eta, self.Binv[r])
        self.basis[r] = j
        self.updates += 1

    def _solution(self):
        lp = self.lp
        n = lp.num_cols
        x = lp.lower + self.col_scale * self._values()[:n]
        residual = lp.residual(x)
        scale = max(1.0, float(np.max(np.abs(lp.A))) if lp.A.size else 1.0, float(np.max(np.abs(lp.b))) if lp.b.size else 1.0)
        if not np.all(np.isfinite(x)) or residual > self.tol.feasibility_eps * scale:
            raise SolverFailure(f"numerical breakdown: residual {residual:.3e} after {self.iterations} iterations")

        eps = self.tol.feasibility_eps
        x = np.where(np.abs(x - lp.lower) <= eps, lp.lower, x)
        finite_upper = np.isfinite(lp.upper)
        x = np.where(finite_upper & (np.abs(x - lp.upper) <= eps), lp.upper, x)
        return LpSolution(
            LpStatus.OPTIMAL,
            x=x,
            objective_value=float(lp.c @ x),
            iterations=self.iterations,
        )


def solve_lp(lp, tol, pivot_eps=None):
    """Solve ``lp`` and return a vertex solution or an Infeasible/Unbounded status."""
    return SimplexSolver(lp, tol, pivot_eps=pivot_eps).solve()


class BranchAndBound:
    """
    Depth-first branch-and-bound over the binary variables of a MixedIntegerProgram.

    Branches on the most fractional binary, exploring the "= 1" child first,
    and prunes nodes whose relaxation cannot beat the incumbent by more than
    objective_eps.
    """

    def __init__(self, program, tol, node_limit=None):
        self.program = program
        self.tol = tol
        self.node_limit = node_limit or get_setting('NODE_LIMIT')
        self.binaries = np.array(program.binary_indices, dtype=int)

    def solve(self):
        base = self.program.base
        stack = [(base.lower.copy(), base.upper.copy())]
        incumbent = None
        best = -math.inf
        root_bound = None
        nodes = 0
        iterations = 0

        while stack:
            lower, upper = stack.pop()
            nodes += 1
            if nodes > self.node_limit:
                raise NodeLimitExceeded(f"branch-and-bound node limit {self.node_limit} exceeded")
            relaxed = solve_lp(base.with_bounds(lower, upper), self.tol)
            iterations += relaxed.iterations
            if relaxed.status == LpStatus.INFEASIBLE:
                continue
            if relaxed.status == LpStatus.UNBOUNDED:
                logger.debug("Relaxation unbounded at node %d", nodes)
                return LpSolution(LpStatus.UNBOUNDED, iterations=iterations, nodes=nodes)
            if root_bound is None:
                root_bound = relaxed.objective_value
            if relaxed.objective_value <= best + self.tol.objective_eps:
                continue

            values = relaxed.x[self.binaries]
            distance = np.minimum(values, 1.0 - values)
            if self.binaries.size == 0 or distance.max() <= self.tol.feasibility_eps:
                x = relaxed.x.copy()
                x[self.binaries] = np.round(values)
                incumbent = LpSolution(LpStatus.OPTIMAL, x=x, objective_value=relaxed.objective_value)
                best = relaxed.objective_value
                continue

            k = int(self.binaries[np.argmax(distance)])
            down_upper = upper.copy()
            down_upper[k] = 0.0
            up_lower = lower.copy()
            up_lower[k] = 1.0
            stack.append((lower, down_upper))
            stack.append((up_lower, upper))

        logger.debug("Branch-and-bound finished after %d nodes", nodes)
        if incumbent is None:
            return LpSolution(LpStatus.INFEASIBLE, iterations=iterations, nodes=nodes)
        incumbent.iterations = iterations
        incumbent.nodes = nodes
        incumbent.bound = root_bound
        return incumbent


def solve_milp(program, tol, node_limit=None):
    """Solve a mixed 0-1 program exactly (within objective_eps)."""
    return BranchAndBound(program, tol, node_limit=node_limit).solve()
