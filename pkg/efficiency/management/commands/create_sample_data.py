import io
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from efficiency.models import Dataset, DmuRecord, dump_dataset
from efficiency.synthetic import generate_dataset

# three units where C is dominated by A and B together
WORKED_EXAMPLE = [('A', 1, 1), ('B', 3, 3), ('C', 2, 1)]


class Command(BaseCommand):
    help = 'Write a sample dataset in the CSV format read by evaluate and verify'

    def add_arguments(self, parser):
        parser.add_argument('--out', help='Target file (stdout when omitted)')
        parser.add_argument('--n', type=int, default=10)
        parser.add_argument('--m', type=int, default=2)
        parser.add_argument('--s', type=int, default=2)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument(
            '--integer',
            action='store_true',
            help='Draw integers instead of reals',
        )
        parser.add_argument(
            '--worked-example',
            action='store_true',
            help='Write the three-unit example (A, B, C) instead of random data',
        )

    def handle(self, *args, **options):
        if options['worked_example']:
            ds = Dataset(
                records=[DmuRecord(id=name, inputs=[x], outputs=[y]) for name, x, y in WORKED_EXAMPLE],
                input_labels=['x'],
                output_labels=['y'],
            )
        else:
            if min(options['n'], options['m'], options['s']) < 1:
                raise CommandError('n, m and s must be ≥ 1')
            if options['seed'] < 0:
                raise CommandError('seed must be an unsigned 64-bit integer')
            ds = generate_dataset(options['n'], options['m'], options['s'], options['seed'], integer=options['integer'])

        if options['out']:
            with Path(options['out']).open('w', encoding='utf-8', newline='') as sink:
                dump_dataset(ds, sink)
            self.stdout.write(self.style.SUCCESS(f'Created {options["out"]} with {ds.n} DMUs'))
        else:
            buffer = io.StringIO()
            dump_dataset(ds, buffer)
            self.stdout.write(buffer.getvalue(), ending='')
