from django.test import SimpleTestCase

from efficiency import grs
from efficiency.exceptions import OracleSizeExceeded
from efficiency.models import default_tolerances
from efficiency.oracle import oracle_support
from efficiency.pipeline import Method, bench_dataset, evaluate_units, prepare, system_for, verify_units
from efficiency.synthetic import generate_dataset

from .factories import make_dataset, two_unit_example, worked_example

TOL = default_tolerances()


class EvaluateUnitsTests(SimpleTestCase):

    def test_every_method_finds_the_same_reference_sets(self):
        for method in Method.values:
            with self.subTest(method=method):
                reports = evaluate_units(worked_example(), 'all', method, TOL)
                self.assertEqual([report.dmu for report in reports], ['A', 'B', 'C'])
                self.assertEqual([report.grs for report in reports], [['A'], ['B'], ['A', 'B']])
                self.assertAlmostEqual(reports[2].rho, 0.75, delta=1e-6)
                self.assertEqual(reports[2].method, method)

    def test_single_unit(self):
        [report] = evaluate_units(worked_example(), 'C', Method.RELAXED_LP, TOL)
        self.assertEqual(report.dmu, 'C')
        self.assertAlmostEqual(sum(report.lambda_max.values()), 1.0, delta=1e-7)
        self.assertEqual(set(report.timings_ms), {'weights', 'classification', 'system', 'solve', 'extract'})

    def test_without_timings(self):
        [report] = evaluate_units(two_unit_example(), 'DMU2', Method.RELAXED_LP, TOL, timings=False)
        self.assertEqual(report.timings_ms, {})
        self.assertEqual(report.grs, ['DMU1'])
        self.assertEqual(report.projection, {'inputs': [1.0], 'outputs': [2.0]})

    def test_concurrent_evaluation_keeps_dataset_order(self):
        ds = generate_dataset(12, 2, 2, seed=5)
        sequential = evaluate_units(ds, 'all', Method.RELAXED_LP, TOL, timings=False)
        concurrent = evaluate_units(ds, 'all', Method.RELAXED_LP, TOL, jobs=4, timings=False)
        self.assertEqual([r.dmu for r in concurrent], list(ds.ids))
        self.assertEqual([r.grs for r in concurrent], [r.grs for r in sequential])

    def test_single_dmu_dataset(self):
        [report] = evaluate_units(make_dataset([('ONLY', 3, 7)]), 'all', Method.RELAXED_LP, TOL)
        self.assertEqual(report.rho, 1.0)
        self.assertEqual(report.grs, ['ONLY'])

    def test_constant_column(self):
        ds = make_dataset([('A', 5, 1, 2), ('B', 5, 3, 4), ('C', 5, 2, 1)], m=2, s=1)
        reports = evaluate_units(ds, 'all', Method.MILP, TOL)
        self.assertEqual(len(reports), 3)
        self.assertEqual(reports[0].grs, ['A'])


class RealValuedDataTests(SimpleTestCase):

    def setUp(self):
        self.ds = generate_dataset(30, 2, 2, seed=17)

    def test_support_program_reaches_the_oracle_support(self):
        prep = prepare(self.ds, TOL)
        [o] = self.ds.select('D24')
        sys = system_for(prep, o, TOL)
        relaxed = grs.solve_support_lp(sys, TOL)
        expected = oracle_support(sys, TOL)
        self.assertGreater(relaxed.delta, 0.0)
        self.assertAlmostEqual(relaxed.objective, len(expected) + 1.0, delta=TOL.objective_eps)
        self.assertEqual(set(grs.recover_lambda_max(relaxed, TOL).support), set(expected))

    def test_every_unit_evaluates(self):
        for method in Method.values:
            with self.subTest(method=method):
                reports = evaluate_units(self.ds, 'all', method, TOL, timings=False)
                self.assertEqual([report.dmu for report in reports], list(self.ds.ids))
                self.assertTrue(all(report.grs for report in reports))


class VerifyUnitsTests(SimpleTestCase):

    def test_worked_example_passes(self):
        reports = verify_units(worked_example(), 'all', TOL)
        for report in reports:
            with self.subTest(dmu=report.dmu):
                self.assertTrue(report.passed, report.checks)
                self.assertEqual(report.failures, {})
        self.assertEqual(set(reports[2].supports), {'relaxed-lp', 'milp', 'mehdiloozad-lp', 'oracle'})
        self.assertEqual(reports[2].supports['mehdiloozad-lp'], ['A', 'B'])
        self.assertEqual(reports[2].supports['oracle'], ['A', 'B'])
        self.assertAlmostEqual(reports[2].objectives['brute-force'], 3.0)

    def test_singleton_efficient_set(self):
        reports = verify_units(two_unit_example(), 'all', TOL)
        self.assertTrue(all(report.passed for report in reports))
        self.assertEqual(reports[1].efficient_count, 1)

    def test_too_many_efficient_units(self):
        # every unit lies on the segment x1 + x2 = 21
        ds = make_dataset([(f"E{j}", j, 21 - j, 1) for j in range(1, 21)], m=2, s=1)
        with self.assertRaises(OracleSizeExceeded):
            verify_units(ds, 'all', TOL)


class BenchDatasetTests(SimpleTestCase):

    def test_optima_agree(self):
        row = bench_dataset(generate_dataset(10, 2, 2, seed=7), TOL)
        self.assertTrue(row['agreement'])
        self.assertGreaterEqual(row['efficient'], 1)
        self.assertGreaterEqual(row['milp_total_ms'], row['milp_median_ms'])
