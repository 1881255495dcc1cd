import io
import json
import tempfile
from pathlib import Path

import pandas as pd
from django.apps import apps
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from efficiency.models import load_dataset

from .factories import WORKED_EXAMPLE_CSV


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name)
        self.data = self.write('d3.csv', WORKED_EXAMPLE_CSV)

    def write(self, name, text):
        target = self.path / name
        target.write_text(text, encoding='utf-8')
        return str(target)

    def call(self, *args):
        out, err = io.StringIO(), io.StringIO()
        call_command(*args, stdout=out, stderr=err)
        return out.getvalue()


class EvaluateCommandTests(CommandTestCase):

    def test_single_unit(self):
        [record] = json.loads(self.call('evaluate', '--data', self.data, '--dmu', 'C'))
        self.assertEqual(record['dmu'], 'C')
        self.assertEqual(record['rho'], 0.75)
        self.assertEqual(record['grs'], ['A', 'B'])
        self.assertEqual(record['method'], 'relaxed-lp')
        self.assertEqual(list(record), [
            'dmu', 'rho', 'method', 'lambda_max', 'grs', 'projection', 'timings_ms', 'tolerances',
        ])
        self.assertEqual(record['tolerances']['feasibility_eps'], 1e-7)

    def test_all_units(self):
        records = json.loads(self.call('evaluate', '--data', self.data, '--dmu', 'all', '--method', 'milp'))
        self.assertEqual([r['grs'] for r in records], [['A'], ['B'], ['A', 'B']])

    def test_identical_runs_give_identical_reports(self):
        first = self.call('evaluate', '--data', self.data, '--no-timings', '--method', 'mehdiloozad-lp')
        second = self.call('evaluate', '--data', self.data, '--no-timings', '--method', 'mehdiloozad-lp')
        self.assertEqual(first, second)
        self.assertEqual(json.loads(first)[0]['timings_ms'], {})
        self.assertEqual(json.loads(first)[0]['method'], 'mehdiloozad-lp')

    def test_report_to_file(self):
        target = self.path / 'report.json'
        self.assertEqual(self.call('evaluate', '--data', self.data, '--out', str(target)), '')
        self.assertEqual(len(json.loads(target.read_text(encoding='utf-8'))), 3)

    def test_tolerance_flags(self):
        [record] = json.loads(self.call('evaluate', '--data', self.data, '--dmu', 'A', '--tol-support', '1e-5'))
        self.assertEqual(record['tolerances']['support_eps'], 1e-5)

    def test_unknown_dmu(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('evaluate', '--data', self.data, '--dmu', 'Z')
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('unknown DMU id Z', str(ctx.exception))

    def test_bad_dataset(self):
        data = self.write('bad.csv', "dmu,in:x,out:y\nA,1,-2\n")
        with self.assertRaises(CommandError) as ctx:
            self.call('evaluate', '--data', data)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('row 2, column out:y', str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('evaluate', '--data', str(self.path / 'missing.csv'))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_invalid_tolerance(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('evaluate', '--data', self.data, '--tol-feas', '2')
        self.assertEqual(ctx.exception.returncode, 1)


class VerifyCommandTests(CommandTestCase):

    def test_worked_example(self):
        records = json.loads(self.call('verify', '--data', self.data))
        self.assertTrue(all(record['passed'] for record in records))
        self.assertEqual(records[2]['supports']['milp'], ['A', 'B'])
        self.assertEqual(records[2]['objectives']['relaxed-lp'], 3.0)

    def test_two_unit_dataset(self):
        data = self.write('d2.csv', "dmu,in:x,out:y\nDMU1,1,2\nDMU2,2,1\n")
        records = json.loads(self.call('verify', '--data', data))
        self.assertEqual(records[1]['efficient_count'], 1)

    def test_size_guard(self):
        rows = "".join(f"E{j},{j},{21 - j},1\n" for j in range(1, 21))
        data = self.write('wide.csv', "dmu,in:a,in:b,out:y\n" + rows)
        with self.assertRaises(CommandError) as ctx:
            self.call('verify', '--data', data)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('oracle limit', str(ctx.exception))


class BenchCommandTests(CommandTestCase):

    def test_rows_and_agreement(self):
        table = pd.read_csv(io.StringIO(self.call('bench', '--n', '12', '--m', '2', '--s', '2', '--reps', '3', '--seed', '7')))
        self.assertEqual(len(table), 3)
        self.assertTrue(table['agreement'].all())
        self.assertEqual(table['seed'].tolist(), [7, 8, 9])

    def test_reps_must_be_positive(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('bench', '--reps', '0')
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('reps must be ≥ 1', str(ctx.exception))


class CreateSampleDataCommandTests(CommandTestCase):

    def test_worked_example(self):
        target = self.path / 'example.csv'
        self.call('create_sample_data', '--worked-example', '--out', str(target))
        self.assertEqual(load_dataset(str(target)).ids, ('A', 'B', 'C'))

    def test_same_seed_same_file(self):
        first = self.call('create_sample_data', '--n', '6', '--seed', '99')
        second = self.call('create_sample_data', '--n', '6', '--seed', '99')
        self.assertEqual(first, second)
        self.assertEqual(load_dataset(io.StringIO(first)).n, 6)

    def test_integer_data(self):
        ds = load_dataset(io.StringIO(self.call('create_sample_data', '--integer', '--seed', '1')))
        self.assertTrue((ds.X == ds.X.round()).all())


class ProjectSetupTests(CommandTestCase):

    def test_only_the_serializer_stack_is_installed(self):
        installed = [config.name for config in apps.get_app_configs()]
        self.assertEqual(installed, ['rest_framework', 'efficiency'])

    def test_commands_run_without_database_apps(self):
        [record] = json.loads(self.call('evaluate', '--data', self.data, '--dmu', 'A'))
        self.assertEqual(record['grs'], ['A'])
