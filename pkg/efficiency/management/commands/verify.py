from django.core.management.base import CommandError

from efficiency.exceptions import TheoremViolation
from efficiency.pipeline import verify_units
from efficiency.serializers import VerifyReportSerializer, render_json

from ._base import EfficiencyCommand


class Command(EfficiencyCommand):
    help = 'Cross-check every support program against the brute-force oracles'

    def run(self, **options):
        ds = self.dataset(options)
        reports = verify_units(ds, options['dmu'], self.tolerances(options), jobs=self.jobs(options))
        data = VerifyReportSerializer(reports, many=True).data
        self.emit(render_json(data).decode('utf-8'), options.get('out'))

        failed = [report.dmu for report in reports if not report.passed]
        if failed:
            raise CommandError(
                f"verification failed for DMU(s) {', '.join(failed)}",
                returncode=TheoremViolation.exit_code,
            )
        self.stderr.write(self.style.SUCCESS(f'All checks passed for {len(reports)} DMU(s)'))
