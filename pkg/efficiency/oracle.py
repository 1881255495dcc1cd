"""
Brute-force reference implementations.

Nothing here is on the evaluation path: these functions back the tests and the
``verify`` command. They reach the solver only through ``solve_lp`` and build
their own programs directly from the optimal-solution system, so a mistake in
``grs`` cannot be mirrored here.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .conf import get_setting
from .exceptions import OracleSizeExceeded, SolverFailure
from .lp import LinearProgram, LpSolution, LpStatus, solve_lp

logger = logging.getLogger(__name__)

MAX_ENUMERATED_BINARIES = 20


def check_oracle_size(k):
    """Raise OracleSizeExceeded when k efficient units are too many to enumerate."""
    limit = get_setting('ORACLE_MAX_EFFICIENT')
    if k > limit:
        raise OracleSizeExceeded(
            f"{k} efficient units exceed the oracle limit of {limit}; "
            f"verify a smaller dataset or raise EFFICIENCY['ORACLE_MAX_EFFICIENT']"
        )


def _max_intensity(sys, j, tol):
    k = sys.k
    A = np.hstack([sys.lambda_block, sys.slack_block])
    c = np.zeros(A.shape[1])
    c[j] = 1.0
    solution = solve_lp(LinearProgram(c=c, A=A, b=sys.rhs), tol)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"max lambda[{j}] over {k} efficient units ended with status {solution.status}")
    return solution.objective_value


def oracle_support(sys, tol, jobs=1):
    """
    Union of supports over the optimal set: every j whose largest feasible
    lambda_j exceeds support_eps. One LP per efficient unit.
    """
    def evaluate(j):
        return _max_intensity(sys, j, tol)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            maxima = list(pool.map(evaluate, range(sys.k)))
    else:
        maxima = [evaluate(j) for j in range(sys.k)]
    logger.debug("Largest intensities per efficient unit: %s", maxima)
    return frozenset(j for j, value in enumerate(maxima) if value > tol.support_eps)


def _pattern_feasible(sys, alpha, gamma, tol):
    """
    Is there (lambda, s-, s+, delta) >= 0 solving the homogenized system with
    lambda >= alpha and delta >= gamma?
    """
    k, ms = sys.k, sys.m + sys.s
    A = np.hstack([sys.lambda_block, sys.slack_block, -sys.rhs[:, None]])
    lower = np.concatenate([alpha, np.zeros(ms), [gamma]]).astype(float)
    lp = LinearProgram(c=np.zeros(k + ms + 1), A=A, b=np.zeros(sys.num_rows), lower=lower)
    return solve_lp(lp, tol).status == LpStatus.OPTIMAL


def _patterns_by_size(k):
    """Every (alpha, gamma) in {0, 1}^(k+1), largest 1'alpha + gamma first."""
    for size in range(k + 1, -1, -1):
        for ones in itertools.combinations(range(k + 1), size):
            pattern = np.zeros(k + 1)
            pattern[list(ones)] = 1.0
            yield pattern


def brute_force_support_milp(sys, tol):
    """
    Optimum of the binary support program by enumerating (alpha, gamma).

    Patterns are visited by decreasing objective, so the first feasible one is
    optimal. Returns ``(objective, (alpha, gamma))``.
    """
    check_oracle_size(sys.k)
    tried = 0
    for pattern in _patterns_by_size(sys.k):
        tried += 1
        alpha, gamma = pattern[:-1], pattern[-1]
        if _pattern_feasible(sys, alpha, gamma, tol):
            logger.debug("First feasible pattern after %d of %d", tried, 2 ** (sys.k + 1))
            return float(pattern.sum()), (alpha, float(gamma))
    # the all-zero pattern is always feasible
    raise SolverFailure("no feasible (alpha, gamma) pattern, not even the zero pattern")


def brute_force_milp(program, tol):
    """
    Solve a MixedIntegerProgram by fixing every binary assignment and solving the
    continuous rest. Returns the best LpSolution, or an Infeasible one.
    """
    count = len(program.binary_indices)
    if count > MAX_ENUMERATED_BINARIES:
        raise OracleSizeExceeded(f"{count} binaries exceed the enumeration limit of {MAX_ENUMERATED_BINARIES}")
    base = program.base
    binaries = list(program.binary_indices)
    best = None
    for assignment in itertools.product((0.0, 1.0), repeat=count):
        lower = base.lower.copy()
        upper = base.upper.copy()
        lower[binaries] = assignment
        upper[binaries] = assignment
        solution = solve_lp(base.with_bounds(lower, upper), tol)
        if solution.status == LpStatus.UNBOUNDED:
            return solution
        if solution.status == LpStatus.OPTIMAL and (best is None or solution.objective_value > best.objective_value):
            best = solution
    if best is None:
        return LpSolution(LpStatus.INFEASIBLE)
    return best
