from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from efficiency.conf import get_setting
from efficiency.exceptions import EfficiencyError, InputError
from efficiency.models import load_dataset
from efficiency.pipeline import Method
from efficiency.serializers import TolerancesSerializer, validated


class EfficiencyCommand(BaseCommand):
    """
    Shared options and error handling of the efficiency commands.

    Subclasses implement ``run``; every EfficiencyError leaves the command as a
    CommandError carrying the exit code of its family.
    """
    requires_system_checks = []
    dataset_options = True

    def add_arguments(self, parser):
        if self.dataset_options:
            parser.add_argument('--data', required=True, help='CSV dataset (dmu,in:<label>...,out:<label>...)')
            parser.add_argument('--dmu', default='all', help="DMU id to evaluate, or 'all'")
            parser.add_argument(
                '--method',
                choices=Method.values,
                default=get_setting('DEFAULT_METHOD'),
                help='Program used to find the maximal intensity vector',
            )
        parser.add_argument('--out', help='Write the report to this file instead of stdout')
        parser.add_argument('--tol-feas', type=float, dest='feasibility_eps')
        parser.add_argument('--tol-support', type=float, dest='support_eps')
        parser.add_argument('--tol-eff', type=float, dest='efficiency_eps')
        parser.add_argument('--jobs', type=int, default=get_setting('JOBS'), help='Units evaluated concurrently')

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except EfficiencyError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, **options):
        raise NotImplementedError('subclasses of EfficiencyCommand must provide a run() method')

    def tolerances(self, options):
        data = {
            name: options[name]
            for name in ('feasibility_eps', 'support_eps', 'efficiency_eps')
            if options.get(name) is not None
        }
        serializer = TolerancesSerializer(data=data)
        validated(serializer)
        return serializer.save()

    def jobs(self, options):
        jobs = options.get('jobs') or 1
        if jobs < 1:
            raise InputError('jobs must be ≥ 1')
        return jobs

    def dataset(self, options):
        path = options['data']
        try:
            return load_dataset(path)
        except OSError as exc:
            raise InputError(f"cannot read dataset {path}: {exc.strerror or exc}") from None

    def emit(self, text, out=None):
        if out:
            Path(out).write_text(text, encoding='utf-8')
            self.stderr.write(self.style.SUCCESS(f'Report written to {out}'))
        else:
            self.stdout.write(text, ending='')
