import io

import pandas as pd

from efficiency.pipeline import bench_dataset
from efficiency.serializers import BenchOptionsSerializer, BenchRowSerializer, validated
from efficiency.synthetic import generate_dataset

from ._base import EfficiencyCommand

SEED_MODULUS = 2 ** 64


class Command(EfficiencyCommand):
    help = 'Compare the binary support program with its LP relaxation on synthetic data'
    dataset_options = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--n', type=int, default=30, help='DMUs per dataset')
        parser.add_argument('--m', type=int, default=2, help='Inputs')
        parser.add_argument('--s', type=int, default=2, help='Outputs')
        parser.add_argument('--reps', type=int, default=5, help='Replications (one dataset each)')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the first replication')

    def run(self, **options):
        params = validated(BenchOptionsSerializer(data={
            name: options[name] for name in ('n', 'm', 's', 'reps', 'seed')
        }))
        tol = self.tolerances(options)

        rows = []
        for rep in range(params['reps']):
            seed = (params['seed'] + rep) % SEED_MODULUS
            ds = generate_dataset(params['n'], params['m'], params['s'], seed)
            row = {'rep': rep + 1, 'seed': seed, 'n': ds.n, 'm': ds.m, 's': ds.s}
            row.update(bench_dataset(ds, tol))
            rows.append(BenchRowSerializer(row).data)
            if not row['agreement']:
                self.stderr.write(self.style.ERROR(f'Replication {rep + 1}: optima disagree'))

        buffer = io.StringIO()
        pd.DataFrame(rows, columns=list(BenchRowSerializer().fields)).to_csv(buffer, index=False, lineterminator='\n')
        self.emit(buffer.getvalue(), options.get('out'))
