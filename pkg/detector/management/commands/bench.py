"""
Training and inference throughput of GCN, RGCN and EE-GCN

Usage:
    python manage.py bench --synthetic
    python manage.py bench --config configs/synthetic.ini --set bench_repetitions=50

All three models see the same batch; warmup steps are not timed.
"""

from ...corpus import make_batches
from ...evaluation import bench, speed_ratio
from ...training import build_model
from ...utils import format_table, write_json
from ..experiment import ExperimentCommand

MODELS = (('GCN', 'gcn'), ('RGCN', 'rgcn'), ('EE-GCN', 'eegcn'))


class Command(ExperimentCommand):
    help = 'Benchmark batches per second for training and inference steps'
    ledger_command = 'BENCH'

    def add_command_arguments(self, parser):
        parser.add_argument('--synthetic', action='store_true',
                            help='benchmark on a generated corpus')

    def check(self, config, options):
        if not options['synthetic'] and not (config.train_path and config.dev_path):
            raise self.usage_error('bench needs train_path and dev_path (or --synthetic)')

    def run(self, config, run_dir, options):
        splits = self.corpus_splits(config, options['synthetic'])
        models = {
            name: build_model(self.replace_config(config, architecture=architecture), splits)
            for name, architecture in MODELS
        }
        vocabs = models['EE-GCN'].vocabs
        batch = make_batches(splits.train, vocabs, config.batch_size, config.max_len)[0]
        rows = bench(models, batch, config.bench_repetitions, config.bench_warmup)

        self.stdout.write(format_table(rows, [('model', 'model'), ('phase', 'phase'),
                                              ('batches_per_sec', 'Bat/s')]))
        ratios = {
            'eegcn_over_rgcn_inference': speed_ratio(rows, 'EE-GCN', 'RGCN'),
            'eegcn_over_gcn_inference': speed_ratio(rows, 'EE-GCN', 'GCN'),
        }
        self.stdout.write(
            f"EE-GCN inference is {ratios['eegcn_over_rgcn_inference']:.2f}x RGCN and "
            f"{ratios['eegcn_over_gcn_inference']:.2f}x GCN"
        )
        write_json(run_dir / 'bench.json', {'rows': rows, 'ratios': ratios,
                                             'batch_size': batch.size, 'width': batch.width})
        return ratios
