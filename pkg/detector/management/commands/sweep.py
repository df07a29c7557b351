"""
Sweep edge dimension or layer count

Usage:
    python manage.py sweep --axis edge_dim --synthetic
    python manage.py sweep --axis layers --config configs/synthetic.ini --workers 4

edge_dim covers 1, 20, 40, 50, 60, 80; layers covers 1..10.
"""

from ...training import SWEEP_AXES, sweep
from ...utils import format_table, write_json
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Train one model per value of edge_dim or num_layers and report median F1'
    ledger_command = 'SWEEP'

    def add_command_arguments(self, parser):
        parser.add_argument('--axis', required=True, choices=sorted(SWEEP_AXES))
        parser.add_argument('--values', help='comma list replacing the default values')
        parser.add_argument('--synthetic', action='store_true',
                            help='run on a generated corpus')
        parser.add_argument('--workers', type=int, help='process pool size (overrides workers)')

    def check(self, config, options):
        if options['values']:
            try:
                options['values'] = [int(v) for v in options['values'].split(',') if v.strip()]
            except ValueError as exc:
                raise self.usage_error(f"--values must be integers: {exc}") from exc
            if any(v < 1 for v in options['values']):
                raise self.usage_error('--values must all be >= 1')
        if not options['synthetic'] and not (config.train_path and config.dev_path):
            raise self.usage_error('sweep needs train_path and dev_path (or --synthetic)')

    def run(self, config, run_dir, options):
        splits = self.corpus_splits(config, options['synthetic'])
        rows = sweep(config, options['axis'], splits, values=options['values'] or None,
                     workers=options['workers'])
        self.stdout.write(format_table(rows, [('value', options['axis']), ('seeds', 'seeds'),
                                              ('median_f1', 'median dev F1'),
                                              ('median_test_f1', 'median test F1')]))
        write_json(run_dir / 'sweep.json', rows)
        return {str(row['value']): row['median_f1'] for row in rows}
