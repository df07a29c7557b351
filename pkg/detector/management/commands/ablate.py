"""
Ablation study: retrain with parts of the model switched off

Usage:
    python manage.py ablate --synthetic --switch TDL --switch NAEU --switch 'TDL&NAEU'
    python manage.py ablate --config configs/synthetic.ini --switch MDER --workers 4

Each variant is trained with ablation_seeds seeds; the median dev F1 is reported.
"""

from ...training import ABLATIONS, run_ablation
from ...utils import format_table, write_json
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Train the full model and each ablated variant over several seeds'
    ledger_command = 'ABLATE'

    def add_command_arguments(self, parser):
        parser.add_argument('--switch', action='append', default=[], dest='switches',
                            metavar='NAME', help=f"one of {', '.join(ABLATIONS)} (repeatable)")
        parser.add_argument('--synthetic', action='store_true',
                            help='run on a generated corpus')
        parser.add_argument('--workers', type=int, help='process pool size (overrides workers)')

    def check(self, config, options):
        unknown = [s for s in options['switches'] if s not in ABLATIONS]
        if unknown:
            raise self.usage_error(f"unknown switch(es) {unknown}; choose from {', '.join(ABLATIONS)}")
        if not options['synthetic'] and not (config.train_path and config.dev_path):
            raise self.usage_error('ablate needs train_path and dev_path (or --synthetic)')

    def run(self, config, run_dir, options):
        splits = self.corpus_splits(config, options['synthetic'])
        rows = run_ablation(config, options['switches'], splits, workers=options['workers'])
        self.stdout.write(format_table(rows, [('variant', 'variant'), ('seeds', 'seeds'),
                                              ('median_f1', 'median dev F1'),
                                              ('median_test_f1', 'median test F1')]))
        write_json(run_dir / 'ablation.json', rows)
        return {row['variant']: row['median_f1'] for row in rows}
