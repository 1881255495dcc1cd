import numpy as np
from django.test import SimpleTestCase, override_settings

from efficiency import grs
from efficiency.exceptions import OracleSizeExceeded
from efficiency.models import default_tolerances
from efficiency.oracle import brute_force_support_milp, check_oracle_size, oracle_support
from efficiency.pipeline import prepare, system_for

from .factories import make_dataset, two_unit_example, worked_example

TOL = default_tolerances()


def system(ds, o):
    prep = prepare(ds, TOL)
    return system_for(prep, o, TOL)


class OracleSupportTests(SimpleTestCase):

    def test_worked_example(self):
        ds = worked_example()
        self.assertEqual(oracle_support(system(ds, 2), TOL), {0, 1})
        self.assertEqual(oracle_support(system(ds, 0), TOL), {0})

    def test_parallel_matches_sequential(self):
        sys = system(worked_example(), 2)
        self.assertEqual(oracle_support(sys, TOL, jobs=2), oracle_support(sys, TOL))

    def test_singleton_efficient_set(self):
        self.assertEqual(oracle_support(system(two_unit_example(), 1), TOL), {0})


class BruteForceTests(SimpleTestCase):

    def test_worked_example(self):
        objective, (alpha, gamma) = brute_force_support_milp(system(worked_example(), 2), TOL)
        self.assertEqual(objective, 3.0)
        np.testing.assert_array_equal(alpha, [1, 1])
        self.assertEqual(gamma, 1.0)

    def test_extreme_efficient_unit(self):
        objective, (alpha, _) = brute_force_support_milp(system(worked_example(), 0), TOL)
        self.assertEqual(objective, 2.0)
        np.testing.assert_array_equal(alpha, [1, 0])

    def test_matches_the_support_programs(self):
        rng = np.random.default_rng(11)
        data = rng.integers(1, 21, size=(7, 3))
        ds = make_dataset([(f"U{j}", *row.tolist()) for j, row in enumerate(data)], m=2, s=1)
        prep = prepare(ds, TOL)
        for o in range(ds.n):
            with self.subTest(o=o):
                sys = system_for(prep, o, TOL)
                objective, _ = brute_force_support_milp(sys, TOL)
                self.assertAlmostEqual(objective, grs.solve_support_lp(sys, TOL).objective, delta=TOL.objective_eps)
                self.assertAlmostEqual(objective, grs.solve_support_milp(sys, TOL).objective, delta=TOL.objective_eps)
                self.assertEqual(objective, len(oracle_support(sys, TOL)) + 1)

    def test_size_guard(self):
        with self.assertRaises(OracleSizeExceeded):
            check_oracle_size(17)
        check_oracle_size(16)

    @override_settings(EFFICIENCY={'ORACLE_MAX_EFFICIENT': 1})
    def test_size_guard_is_configurable(self):
        with self.assertRaises(OracleSizeExceeded):
            brute_force_support_milp(system(worked_example(), 2), TOL)
