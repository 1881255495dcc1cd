from efficiency.pipeline import evaluate_units
from efficiency.serializers import UnitReportSerializer, render_json

from ._base import EfficiencyCommand


class Command(EfficiencyCommand):
    help = 'Score DMUs with the range-adjusted measure and identify their global reference sets'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--no-timings',
            action='store_true',
            help='Leave timings_ms empty so identical runs give identical reports',
        )

    def run(self, **options):
        ds = self.dataset(options)
        reports = evaluate_units(
            ds,
            options['dmu'],
            options['method'],
            self.tolerances(options),
            jobs=self.jobs(options),
            timings=not options['no_timings'],
        )
        data = UnitReportSerializer(reports, many=True).data
        self.emit(render_json(data).decode('utf-8'), options.get('out'))
