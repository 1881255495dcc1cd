"""
End-to-end evaluation used by the management commands.

A ``Preparation`` holds everything shared by the units of one dataset (range
weights, RAM solutions, the efficient set). Units are then evaluated
independently, optionally on a thread pool, and reported in dataset order.
"""
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from django.db.models import TextChoices

from . import grs, oracle
from .exceptions import TheoremViolation
from .ram import classify_efficient, compute_range_weights, solve_ram_all

logger = logging.getLogger(__name__)


class Method(TextChoices):
    RELAXED_LP = 'relaxed-lp', 'Relaxed support LP'
    MILP = 'milp', 'Binary support program (branch-and-bound)'
    SPLIT_LP = 'mehdiloozad-lp', 'Split support LP'


@contextmanager
def _timed(timings, phase):
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[phase] = (time.perf_counter() - start) * 1000.0


@dataclass
class Preparation:
    dataset: object
    weights: object
    results: list
    efficient: object
    timings_ms: dict = field(default_factory=dict)


@dataclass
class UnitReport:
    dmu: str
    rho: float
    method: str
    lambda_max: dict
    grs: list
    projection: dict
    timings_ms: dict
    tolerances: object


@dataclass
class VerifyReport:
    dmu: str
    efficient_count: int
    objectives: dict
    supports: dict
    checks: dict
    max_residual: float
    tolerances: object
    failures: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())


def prepare(ds, tol, jobs=1):
    """Range weights, every RAM solution and the efficient set of ``ds``."""
    timings = {}
    with _timed(timings, 'weights'):
        w = compute_range_weights(ds)
    with _timed(timings, 'classification'):
        results = solve_ram_all(ds, w, tol, jobs=jobs)
        eff = classify_efficient(ds, w, tol, results=results)
    logger.info("%d of %d DMUs are RAM-efficient", len(eff), ds.n)
    return Preparation(dataset=ds, weights=w, results=results, efficient=eff, timings_ms=timings)


def system_for(prep, o, tol):
    return grs.build_system(prep.dataset, prep.efficient, o, prep.results[o], prep.weights, tol)


def find_maximal(sys, method, tol):
    """Run the chosen support program and return its maximal element."""
    if method == Method.RELAXED_LP:
        return grs.recover_lambda_max(grs.solve_support_lp(sys, tol), tol)
    if method == Method.MILP:
        return grs.recover_lambda_max(grs.solve_support_milp(sys, tol), tol)
    if method == Method.SPLIT_LP:
        return grs.solve_split_lp(sys, tol)
    raise ValueError(f"unknown method {method!r}")


def evaluate_unit(prep, o, method, tol, timings=True):
    ds = prep.dataset
    phases = dict(prep.timings_ms)
    with _timed(phases, 'system'):
        sys = system_for(prep, o, tol)
    with _timed(phases, 'solve'):
        maximal = find_maximal(sys, method, tol)
    with _timed(phases, 'extract'):
        result = grs.extract_grs(ds, prep.efficient, maximal, o, ram=prep.results[o])
    inputs, outputs = result.projection
    return UnitReport(
        dmu=result.evaluated_id,
        rho=result.rho,
        method=str(method),
        lambda_max=result.lambda_by_id,
        grs=list(result.reference_ids),
        projection={'inputs': list(inputs), 'outputs': list(outputs)},
        timings_ms=phases if timings else {},
        tolerances=tol,
    )


def _map_units(function, indices, jobs):
    if jobs and jobs > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(function, indices))
    return [function(o) for o in indices]


def evaluate_units(ds, selector, method, tol, jobs=1, timings=True):
    """Evaluate ``'all'`` or one DMU id; reports come back in dataset order."""
    indices = ds.select(selector)
    prep = prepare(ds, tol, jobs=jobs)
    return _map_units(lambda o: evaluate_unit(prep, o, method, tol, timings=timings), indices, jobs)


# ============================================================================
# VERIFICATION
# ============================================================================

def _attempt(failures, name, function, *args):
    try:
        return function(*args)
    except TheoremViolation as exc:
        logger.warning("%s failed: %s", name, exc)
        failures[name] = str(exc)
        return None


def _ids(prep, support):
    if support is None:
        return None
    return [prep.dataset.records[prep.efficient.indices[j]].id for j in sorted(support)]


def verify_unit(prep, o, tol):
    """
    Solve the unit with every program and both oracles, and compare.
    Theorem violations are recorded as failed checks instead of raised.
    """
    sys = system_for(prep, o, tol)
    eps = tol.objective_eps
    failures = {}

    relaxed = _attempt(failures, 'relaxed-lp', grs.solve_support_lp, sys, tol)
    relaxed_max = relaxed and _attempt(failures, 'relaxed-lp recovery', grs.recover_lambda_max, relaxed, tol)
    binary = _attempt(failures, 'milp', grs.solve_support_milp, sys, tol)
    binary_max = binary and _attempt(failures, 'milp recovery', grs.recover_lambda_max, binary, tol)
    split_max = _attempt(failures, 'mehdiloozad-lp', grs.solve_split_lp, sys, tol)
    oracle_set = oracle.oracle_support(sys, tol)
    brute_objective, _ = oracle.brute_force_support_milp(sys, tol)

    lifted = None
    if relaxed_max is not None:
        delta = relaxed.delta
        lifted = _attempt(
            failures, 'lifting', grs.lift_to_support_milp,
            sys, relaxed_max.lambda_max, relaxed.s_minus / delta, relaxed.s_plus / delta, tol,
        )

    supports = {
        'relaxed-lp': relaxed_max and set(relaxed_max.support),
        'milp': binary_max and set(binary_max.support),
        'mehdiloozad-lp': split_max and set(split_max.support),
        'oracle': set(oracle_set),
    }
    objectives = {
        'relaxed-lp': relaxed and relaxed.objective,
        'milp': binary and binary.objective,
        'mehdiloozad-lp': split_max and split_max.objective,
        'brute-force': brute_objective,
    }

    def close(a, b):
        return a is not None and b is not None and abs(a - b) <= eps

    checks = {
        'relaxed_integral': relaxed is not None,
        'milp_matches_relaxed': close(objectives['milp'], objectives['relaxed-lp']),
        'brute_force_matches': close(brute_objective, objectives['relaxed-lp']),
        'supports_agree': all(value == supports['oracle'] for value in supports.values()),
        'oracle_cardinality': close(len(oracle_set) + 1.0, brute_objective),
        'membership': relaxed_max is not None and binary_max is not None and split_max is not None,
        'lifting': lifted is not None and binary is not None and lifted.objective <= binary.objective + eps,
    }
    residuals = [item.residual for item in (relaxed_max, binary_max, split_max) if item is not None]
    report = VerifyReport(
        dmu=prep.dataset.records[o].id,
        efficient_count=len(prep.efficient),
        objectives=objectives,
        supports={name: _ids(prep, value) for name, value in supports.items()},
        checks=checks,
        max_residual=max(residuals, default=0.0),
        tolerances=tol,
        failures=failures,
    )
    if not report.passed:
        logger.warning("Verification of DMU %s failed: %s", report.dmu, sorted(k for k, v in checks.items() if not v))
    return report


def verify_units(ds, selector, tol, jobs=1):
    indices = ds.select(selector)
    prep = prepare(ds, tol, jobs=jobs)
    oracle.check_oracle_size(len(prep.efficient))
    return _map_units(lambda o: verify_unit(prep, o, tol), indices, jobs)


# ============================================================================
# BENCHMARK
# ============================================================================

def bench_dataset(ds, tol):
    """
    Time the binary support program against its relaxation for every DMU of
    ``ds``. Returns per-DMU timings (ms) and whether every optimum agreed.
    """
    prep = prepare(ds, tol)
    milp_ms, relaxed_ms = [], []
    agreement = True
    for o in range(ds.n):
        sys = system_for(prep, o, tol)
        start = time.perf_counter()
        try:
            binary = grs.solve_support_milp(sys, tol)
        except TheoremViolation as exc:
            logger.warning("DMU %s: %s", ds.records[o].id, exc)
            binary = None
        milp_ms.append((time.perf_counter() - start) * 1000.0)

        start = time.perf_counter()
        try:
            relaxed = grs.solve_support_lp(sys, tol)
        except TheoremViolation as exc:
            logger.warning("DMU %s: %s", ds.records[o].id, exc)
            relaxed = None
        relaxed_ms.append((time.perf_counter() - start) * 1000.0)

        if binary is None or relaxed is None or abs(binary.objective - relaxed.objective) > tol.objective_eps:
            agreement = False
    return {
        'efficient': len(prep.efficient),
        'milp_total_ms': float(np.sum(milp_ms)),
        'relaxed_total_ms': float(np.sum(relaxed_ms)),
        'milp_median_ms': statistics.median(milp_ms),
        'relaxed_median_ms': statistics.median(relaxed_ms),
        'agreement': agreement,
    }
