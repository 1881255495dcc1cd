"""
Range-adjusted measure (RAM): range weights, per-DMU scores and the set of
RAM-efficient units.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import SolverFailure
from .lp import LinearProgram, LpStatus, solve_lp

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RangeWeights:
    """
    Reciprocal data ranges per input (r_minus) and output (r_plus).

    A constant column has zero range: its weight is 0 and its index is listed
    as degenerate. Its constraint row still takes part in every program.
    """
    r_minus: np.ndarray
    r_plus: np.ndarray
    degenerate_inputs: tuple
    degenerate_outputs: tuple

    @property
    def all_degenerate(self):
        return not np.any(self.r_minus) and not np.any(self.r_plus)


@dataclass(frozen=True, eq=False)
class RamResult:
    """
    One optimal solution of the RAM program for unit ``o``.

    ``weighted_slack`` is the solver's optimum of max R-'s- + R+'s+, i.e.
    (m + s)(1 - rho) before any rounding.
    """
    o: int
    rho: float
    lambdas: np.ndarray
    s_minus: np.ndarray
    s_plus: np.ndarray
    weighted_slack: float


@dataclass(frozen=True, eq=False)
class EfficientSet:
    """
    RAM-efficient units in dataset order, with their data columns
    """
    indices: tuple
    X_E: np.ndarray
    Y_E: np.ndarray
    scores: tuple

    def __len__(self):
        return len(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def ids(self, dataset):
        return [dataset.records[j].id for j in self.indices]


def _column_weights(matrix):
    spread = matrix.max(axis=1) - matrix.min(axis=1) if matrix.size else np.zeros(matrix.shape[0])
    degenerate = tuple(int(i) for i in np.flatnonzero(spread <= 0))
    weights = np.zeros(matrix.shape[0])
    positive = spread > 0
    weights[positive] = 1.0 / spread[positive]
    return weights, degenerate


def compute_range_weights(ds):
    """Weights 1 / (max - min) over all DMUs, 0 for zero-range columns."""
    r_minus, degenerate_inputs = _column_weights(ds.X)
    r_plus, degenerate_outputs = _column_weights(ds.Y)
    if degenerate_inputs or degenerate_outputs:
        logger.info(
            "Zero-range columns get weight 0: inputs %s, outputs %s",
            list(degenerate_inputs), list(degenerate_outputs),
        )
    return RangeWeights(r_minus, r_plus, degenerate_inputs, degenerate_outputs)


def ram_program(ds, o, w):
    """
    The RAM program of unit ``o`` in maximization form over all DMUs.

    Columns are [lambda (n), s- (m), s+ (s)]; rows are X lambda + s- = x_o,
    Y lambda - s+ = y_o and 1'lambda = 1.
    """
    n, m, s = ds.n, ds.m, ds.s
    A = np.zeros((m + s + 1, n + m + s))
    A[:m, :n] = ds.X
    A[:m, n:n + m] = np.eye(m)
    A[m:m + s, :n] = ds.Y
    A[m:m + s, n + m:] = -np.eye(s)
    A[m + s, :n] = 1.0
    b = np.concatenate([ds.X[:, o], ds.Y[:, o], [1.0]])
    c = np.concatenate([np.zeros(n), w.r_minus, w.r_plus])
    return LinearProgram(c=c, A=A, b=b)


def _clamp_score(rho, tol):
    if abs(rho - 1.0) <= tol.objective_eps:
        return 1.0
    if abs(rho) <= tol.objective_eps:
        return 0.0
    return float(min(1.0, max(0.0, rho)))


def solve_ram(ds, o, w, tol):
    """Score unit ``o`` against every DMU of the dataset."""
    ds.check_index(o)
    n, m, s = ds.n, ds.m, ds.s
    solution = solve_lp(ram_program(ds, o, w), tol)
    if solution.status != LpStatus.OPTIMAL:
        # lambda = e_o is always feasible and the slacks are bounded
        raise SolverFailure(
            f"internal error: RAM program of DMU {ds.records[o].id} reported {solution.status}"
        )
    x = solution.x
    weighted_slack = max(0.0, solution.objective_value)
    rho = _clamp_score(1.0 - weighted_slack / (m + s), tol)
    return RamResult(
        o=o,
        rho=rho,
        lambdas=x[:n],
        s_minus=x[n:n + m],
        s_plus=x[n + m:],
        weighted_slack=weighted_slack,
    )


def solve_ram_all(ds, w, tol, jobs=1):
    """Solve the RAM program of every DMU; results come back in dataset order."""

    def evaluate(o):
        try:
            return solve_ram(ds, o, w, tol)
        except SolverFailure as exc:
            raise SolverFailure(f"DMU {ds.records[o].id}: {exc}") from exc

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(evaluate, range(ds.n)))
    return [evaluate(o) for o in range(ds.n)]


def classify_efficient(ds, w, tol, results=None, jobs=1):
    """
    Split the dataset into RAM-efficient and inefficient units.

    ``results`` may carry already computed RAM solutions (one per DMU, in
    dataset order) to avoid solving them again.
    """
    if results is None:
        results = solve_ram_all(ds, w, tol, jobs=jobs)
    m, s = ds.m, ds.s
    threshold = (m + s) * tol.efficiency_eps
    indices = tuple(j for j, result in enumerate(results) if result.weighted_slack <= threshold)
    logger.debug("RAM-efficient units: %s", [ds.records[j].id for j in indices])
    return EfficientSet(
        indices=indices,
        X_E=ds.X[:, list(indices)],
        Y_E=ds.Y[:, list(indices)],
        scores=tuple(result.rho for result in results),
    )


def projection(ds, result):
    """Frontier point of the evaluated unit: (x_o - s-, y_o + s+)."""
    o = result.o
    return ds.X[:, o] - result.s_minus, ds.Y[:, o] + result.s_plus
