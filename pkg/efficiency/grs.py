"""
Global reference set (GRS) identification.

For an evaluated unit o, the optimal solutions of its RAM program are the
feasible points of a linear system over the RAM-efficient units (built by
``build_system``). The GRS is the support of a maximal element of the
intensity vectors of that system: a member with the largest number of
positive components. The maximal element is found by

* ``solve_support_lp``: maximize 1'alpha + gamma over the homogenized system
  with alpha <= lambda, gamma <= delta and 0 <= alpha, gamma <= 1. Its
  optimum is integral (gamma = 1, alpha binary), so it is as good as the
  mixed 0-1 version, and lambda_max = lambda / delta.
* ``solve_support_milp``: the same program with alpha and gamma binary,
  solved by branch-and-bound.
* ``solve_split_lp``: the same program after substituting
  beta = lambda - alpha and nu = delta - gamma.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .conf import get_setting
from .exceptions import NotInOmega, SolverFailure, TheoremViolation
from .lp import LinearProgram, LpStatus, MixedIntegerProgram, solve_lp, solve_milp
from .models import default_tolerances
from .ram import projection

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OptimalSolutionSystem:
    """
    Linear system whose feasible (lambda, s-, s+) are the optimal solutions
    of the RAM program of unit ``o``, with lambda indexed over E only.

    Rows: X_E lambda + s- = x_o, Y_E lambda - s+ = y_o, 1'lambda = 1 and,
    unless every weight is zero, R-'s- + R+'s+ = rhs_inefficiency.
    ``row_factors`` scales feasibility_eps per row; the weighted-slack row
    inherits error from the RAM solve and is checked more loosely.
    """
    efficient: object
    o: int
    x_o: np.ndarray
    y_o: np.ndarray
    rho: float
    rhs_inefficiency: float
    weights: object
    lambda_block: np.ndarray
    slack_block: np.ndarray
    rhs: np.ndarray
    row_factors: np.ndarray
    has_slack_row: bool

    @property
    def k(self):
        return len(self.efficient.indices)

    @property
    def m(self):
        return len(self.x_o)

    @property
    def s(self):
        return len(self.y_o)

    @property
    def num_rows(self):
        return len(self.rhs)

    def residual(self, lambdas, s_minus, s_plus):
        """Absolute residual of every row."""
        slacks = np.concatenate([s_minus, s_plus])
        return np.abs(self.lambda_block @ lambdas + self.slack_block @ slacks - self.rhs)

    def is_satisfied(self, lambdas, s_minus, s_plus, tol):
        eps = tol.feasibility_eps
        if min(np.min(lambdas, initial=0.0), np.min(s_minus, initial=0.0), np.min(s_plus, initial=0.0)) < -eps:
            return False
        return bool(np.all(self.residual(lambdas, s_minus, s_plus) <= eps * self.row_factors))


@dataclass(frozen=True, eq=False)
class SupportProgramSolution:
    """
    A point of the support-maximizing program, relaxed or binary.

    Vectors indexed over E: lambdas, alpha. Scalars: delta, gamma.
    ``objective`` is 1'alpha + gamma.
    """
    system: OptimalSolutionSystem
    lambdas: np.ndarray
    s_minus: np.ndarray
    s_plus: np.ndarray
    delta: float
    alpha: np.ndarray
    gamma: float
    objective: float


@dataclass(frozen=True, eq=False)
class MaximalElement:
    lambda_max: np.ndarray
    support: tuple
    residual: float = 0.0
    objective: float = None

    @property
    def cardinality(self):
        return len(self.support)


@dataclass(frozen=True, eq=False)
class GrsResult:
    evaluated_id: str
    reference_ids: tuple
    maximal: MaximalElement
    rho: float
    lambda_by_id: dict = field(default_factory=dict)
    # (inputs, outputs) of the frontier point of the RAM optimum
    projection: tuple = None


@dataclass(frozen=True)
class MembershipReport:
    is_member: bool
    # max over rows of |residual| / (feasibility_eps * row factor)
    scaled_violation: float
    residual: float


def build_system(ds, eff, o, ram, w, tol=None):
    """Assemble the optimal-solution system of unit ``o``."""
    ds.check_index(o)
    if ram.o != o:
        raise ValueError(f"RAM result belongs to unit {ram.o}, not {o}")
    tol = tol or default_tolerances()
    m, s, k = ds.m, ds.s, len(eff.indices)

    outside = [
        ds.records[j].id for j in np.flatnonzero(ram.lambdas > tol.support_eps)
        if j not in eff
    ]
    if outside:
        logger.warning(
            "RAM optimum of DMU %s puts weight on non-efficient units %s",
            ds.records[o].id, outside,
        )

    factor = get_setting('SLACK_ROW_TOLERANCE_FACTOR')
    lambda_rows = [eff.X_E, eff.Y_E, np.ones((1, k))]
    slack_rows = [
        np.hstack([np.eye(m), np.zeros((m, s))]),
        np.hstack([np.zeros((s, m)), -np.eye(s)]),
        np.zeros((1, m + s)),
    ]
    rhs = [ds.X[:, o], ds.Y[:, o], [1.0]]
    factors = [np.ones(m + s + 1)]

    has_slack_row = not w.all_degenerate
    if has_slack_row:
        lambda_rows.append(np.zeros((1, k)))
        slack_rows.append(np.concatenate([w.r_minus, w.r_plus])[None, :])
        rhs.append([ram.weighted_slack])
        factors.append([factor])
    else:
        logger.warning(
            "Every data column of the dataset is constant; the weighted-slack row "
            "reduces to 0 = 0 and is dropped for DMU %s", ds.records[o].id,
        )

    return OptimalSolutionSystem(
        efficient=eff,
        o=o,
        x_o=ds.X[:, o].copy(),
        y_o=ds.Y[:, o].copy(),
        rho=ram.rho,
        rhs_inefficiency=ram.weighted_slack,
        weights=w,
        lambda_block=np.vstack(lambda_rows),
        slack_block=np.vstack(slack_rows),
        rhs=np.concatenate([np.asarray(part, dtype=float) for part in rhs]),
        row_factors=np.concatenate([np.asarray(part, dtype=float) for part in factors]),
        has_slack_row=has_slack_row,
    )


def omega_violation(sys, lambdas, tol):
    """
    Measure how far ``lambdas`` is from the optimal set of the system.

    With lambda fixed, solves min t subject to |row residual| <= t * tol_row
    for some slacks s-, s+ >= 0; lambda is a member iff t <= 1.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.shape != (sys.k,):
        raise ValueError(f"lambda must have {sys.k} components")
    if np.any(lambdas < -tol.feasibility_eps):
        return MembershipReport(False, np.inf, float(-lambdas.min()))
    lambdas = np.maximum(lambdas, 0.0)

    p, ms = sys.num_rows, sys.m + sys.s
    row_tol = tol.feasibility_eps * sys.row_factors
    # columns: slacks (m+s), plus (p), minus (p), gap (p), t
    width = ms + 3 * p + 1
    A = np.zeros((2 * p, width))
    A[:p, :ms] = sys.slack_block
    A[:p, ms:ms + p] = np.eye(p)
    A[:p, ms + p:ms + 2 * p] = -np.eye(p)
    A[p:, ms:ms + p] = np.eye(p)
    A[p:, ms + p:ms + 2 * p] = np.eye(p)
    A[p:, ms + 2 * p:ms + 3 * p] = np.eye(p)
    A[p:, -1] = -row_tol
    b = np.concatenate([sys.rhs - sys.lambda_block @ lambdas, np.zeros(p)])
    c = np.zeros(width)
    c[-1] = -1.0

    solution = solve_lp(LinearProgram(c=c, A=A, b=b), tol)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"membership program ended with status {solution.status}")
    x = solution.x
    scaled = float(x[-1])
    residual = float(np.max(x[ms:ms + p] + x[ms + p:ms + 2 * p], initial=0.0))
    return MembershipReport(scaled <= 1.0 + 1e-9, scaled, residual)


def check_omega_membership(sys, lambdas, tol):
    """True iff some slacks make (lambdas, s-, s+) feasible for the system."""
    return omega_violation(sys, lambdas, tol).is_member


class _Columns:
    """Column layout of the support-maximizing program."""

    def __init__(self, sys):
        k, ms = sys.k, sys.m + sys.s
        self.lambdas = slice(0, k)
        self.slacks = slice(k, k + ms)
        self.delta = k + ms
        self.alpha = slice(k + ms + 1, 2 * k + ms + 1)
        self.gamma = 2 * k + ms + 1
        self.alpha_gap = slice(2 * k + ms + 2, 3 * k + ms + 2)
        self.gamma_gap = 3 * k + ms + 2
        self.width = 3 * k + ms + 3


def support_program(sys):
    """
    Homogenized system plus alpha <= lambda and gamma <= delta, maximizing
    1'alpha + gamma with alpha and gamma in [0, 1].
    """
    k, p = sys.k, sys.num_rows
    cols = _Columns(sys)
    A = np.zeros((p + k + 1, cols.width))
    A[:p, cols.lambdas] = sys.lambda_block
    A[:p, cols.slacks] = sys.slack_block
    A[:p, cols.delta] = -sys.rhs
    A[p:p + k, cols.alpha] = np.eye(k)
    A[p:p + k, cols.lambdas] = -np.eye(k)
    A[p:p + k, cols.alpha_gap] = np.eye(k)
    A[p + k, cols.gamma] = 1.0
    A[p + k, cols.delta] = -1.0
    A[p + k, cols.gamma_gap] = 1.0

    c = np.zeros(cols.width)
    c[cols.alpha] = 1.0
    c[cols.gamma] = 1.0
    upper = np.full(cols.width, np.inf)
    upper[cols.alpha] = 1.0
    upper[cols.gamma] = 1.0
    return LinearProgram(c=c, A=A, b=np.zeros(p + k + 1), upper=upper), cols


def _unpack(sys, x, objective, cols):
    slacks = x[cols.slacks]
    return SupportProgramSolution(
        system=sys,
        lambdas=x[cols.lambdas].copy(),
        s_minus=slacks[:sys.m].copy(),
        s_plus=slacks[sys.m:].copy(),
        delta=float(x[cols.delta]),
        alpha=x[cols.alpha].copy(),
        gamma=float(x[cols.gamma]),
        objective=float(objective),
    )


def _check_integrality(alpha, gamma, delta, tol, program):
    eps = tol.feasibility_eps
    if delta is not None and delta <= eps:
        raise TheoremViolation(f"{program}: delta = {delta:.3e} is not positive at the optimum")
    if abs(gamma - 1.0) > eps:
        raise TheoremViolation(f"{program}: gamma = {gamma:.12g} differs from 1 at the optimum")
    distance = np.minimum(np.abs(alpha), np.abs(1.0 - alpha))
    if distance.size and distance.max() > eps:
        j = int(np.argmax(distance))
        raise TheoremViolation(f"{program}: alpha[{j}] = {alpha[j]:.12g} is not binary at the optimum")


def solve_support_lp(sys, tol):
    """Solve the relaxed support program; its optimum is |support| + 1."""
    lp, cols = support_program(sys)
    solution = solve_lp(lp, tol)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"relaxed support program ended with status {solution.status}")
    result = _unpack(sys, solution.x, solution.objective_value, cols)
    _check_integrality(result.alpha, result.gamma, result.delta, tol, 'relaxed support program')
    return result


def solve_support_milp(sys, tol, node_limit=None):
    """
    Solve the support program with binary alpha and gamma by branch-and-bound.

    The optimum must match the relaxation at the root node within
    objective_eps.
    """
    lp, cols = support_program(sys)
    binaries = list(range(cols.alpha.start, cols.alpha.stop)) + [cols.gamma]
    solution = solve_milp(MixedIntegerProgram(base=lp, binary_indices=binaries), tol, node_limit=node_limit)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"binary support program ended with status {solution.status}")
    if abs(solution.objective_value - solution.bound) > tol.objective_eps:
        raise TheoremViolation(
            f"binary optimum {solution.objective_value:.12g} differs from "
            f"relaxed optimum {solution.bound:.12g}"
        )
    result = _unpack(sys, solution.x, solution.objective_value, cols)
    _check_integrality(result.alpha, result.gamma, result.delta, tol, 'binary support program')
    logger.debug("Binary support program solved in %d nodes", solution.nodes)
    return result


def _maximal_from(sys, lambda_max, tol, objective=None):
    lambda_max = np.asarray(lambda_max, dtype=float)
    report = omega_violation(sys, lambda_max, tol)
    if not report.is_member:
        raise NotInOmega(
            f"recovered intensity vector violates the optimal-solution system "
            f"(residual {report.residual:.3e})"
        )
    support = tuple(int(j) for j in np.flatnonzero(lambda_max > tol.support_eps))
    return MaximalElement(lambda_max=lambda_max, support=support, residual=report.residual, objective=objective)


def recover_lambda_max(sol, tol):
    """lambda_max = lambda / delta of an optimal support-program solution."""
    if sol.delta <= tol.feasibility_eps:
        raise TheoremViolation(f"delta = {sol.delta:.3e} is not positive; cannot normalize")
    return _maximal_from(sol.system, sol.lambdas / sol.delta, tol, objective=sol.objective)


def split_program(sys):
    """
    The support program in (alpha, beta, s-, s+, gamma, nu) variables, where
    lambda = alpha + beta and delta = gamma + nu.
    """
    k, ms, p = sys.k, sys.m + sys.s, sys.num_rows
    width = 2 * k + ms + 2
    alpha, beta = slice(0, k), slice(k, 2 * k)
    slacks = slice(2 * k, 2 * k + ms)
    gamma, nu = 2 * k + ms, 2 * k + ms + 1

    A = np.zeros((p, width))
    A[:, alpha] = sys.lambda_block
    A[:, beta] = sys.lambda_block
    A[:, slacks] = sys.slack_block
    A[:, gamma] = -sys.rhs
    A[:, nu] = -sys.rhs
    c = np.zeros(width)
    c[alpha] = 1.0
    c[gamma] = 1.0
    upper = np.full(width, np.inf)
    upper[alpha] = 1.0
    upper[gamma] = 1.0
    return LinearProgram(c=c, A=A, b=np.zeros(p), upper=upper), (alpha, beta, slacks, gamma, nu)


def solve_split_lp(sys, tol):
    """Solve the split program and return lambda_max = (alpha + beta) / (1 + nu)."""
    lp, (alpha, beta, _, gamma, nu) = split_program(sys)
    solution = solve_lp(lp, tol)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"split support program ended with status {solution.status}")
    x = solution.x
    _check_integrality(x[alpha], x[gamma], x[gamma] + x[nu], tol, 'split support program')
    lambda_max = (x[alpha] + x[beta]) / (1.0 + x[nu])
    return _maximal_from(sys, lambda_max, tol, objective=solution.objective_value)


def lift_to_support_milp(sys, lambdas, s_minus, s_plus, tol):
    """
    Turn a member of the optimal set into a feasible point of the binary
    support program with objective n+(lambda) + 1.

    alpha marks the positive components and gamma = 1. Because alpha <= lambda
    must hold, the point is scaled by 1 / min{lambda_j : lambda_j > 0}, which
    keeps the homogenized rows satisfied and makes delta >= 1.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    s_minus = np.asarray(s_minus, dtype=float)
    s_plus = np.asarray(s_plus, dtype=float)
    if not sys.is_satisfied(lambdas, s_minus, s_plus, tol):
        raise NotInOmega("the given point is not feasible for the optimal-solution system")

    positive = lambdas > tol.support_eps
    alpha = positive.astype(float)
    scale = 1.0 / lambdas[positive].min() if positive.any() else 1.0
    lifted = SupportProgramSolution(
        system=sys,
        lambdas=lambdas * scale,
        s_minus=s_minus * scale,
        s_plus=s_plus * scale,
        delta=scale,
        alpha=alpha,
        gamma=1.0,
        objective=float(alpha.sum() + 1.0),
    )
    if not is_support_feasible(lifted, tol):
        raise TheoremViolation("lifted point is not feasible for the binary support program")
    return lifted


def support_vector(sol):
    """Full column vector of a SupportProgramSolution, gap columns included."""
    cols = _Columns(sol.system)
    x = np.zeros(cols.width)
    x[cols.lambdas] = sol.lambdas
    x[cols.slacks] = np.concatenate([sol.s_minus, sol.s_plus])
    x[cols.delta] = sol.delta
    x[cols.alpha] = sol.alpha
    x[cols.gamma] = sol.gamma
    x[cols.alpha_gap] = sol.lambdas - sol.alpha
    x[cols.gamma_gap] = sol.delta - sol.gamma
    return x


def is_support_feasible(sol, tol, binary=True):
    """Check ``sol`` against every row and bound of the support program."""
    lp, cols = support_program(sol.system)
    x = support_vector(sol)
    eps = tol.feasibility_eps
    scale = max(1.0, abs(sol.delta))
    if np.any(x < lp.lower - eps * scale) or np.any(x > lp.upper + eps):
        return False
    row_tol = eps * scale * np.concatenate([sol.system.row_factors, np.ones(sol.system.k + 1)])
    if np.any(np.abs(lp.A @ x - lp.b) > row_tol):
        return False
    if binary:
        values = np.append(sol.alpha, sol.gamma)
        if np.any(np.minimum(np.abs(values), np.abs(1.0 - values)) > eps):
            return False
    return True


def rescale_to_unit_gamma(sol):
    """
    Improve a relaxed solution with 0 < gamma < 1: divide the point by gamma,
    cap alpha at 1 and set gamma to 1. The objective never decreases.
    """
    if not 0 < sol.gamma < 1:
        raise ValueError("gamma must lie strictly between 0 and 1")
    g = sol.gamma
    alpha = np.minimum(1.0, sol.alpha / g)
    return SupportProgramSolution(
        system=sol.system,
        lambdas=sol.lambdas / g,
        s_minus=sol.s_minus / g,
        s_plus=sol.s_plus / g,
        delta=sol.delta / g,
        alpha=alpha,
        gamma=1.0,
        objective=float(alpha.sum() + 1.0),
    )


def extract_grs(ds, eff, maximal, o, ram=None):
    """
    Map the support of lambda_max back to dataset ids, in dataset order.

    With ``ram`` given, the result also carries the projection of unit ``o``.
    """
    ds.check_index(o)
    reference_ids = tuple(ds.records[eff.indices[j]].id for j in maximal.support)
    lambda_by_id = {
        ds.records[j].id: float(value)
        for j, value in zip(eff.indices, maximal.lambda_max)
    }
    return GrsResult(
        evaluated_id=ds.records[o].id,
        reference_ids=reference_ids,
        maximal=maximal,
        rho=eff.scores[o],
        lambda_by_id=lambda_by_id,
        projection=projection(ds, ram) if ram is not None else None,
    )
