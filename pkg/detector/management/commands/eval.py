"""
Score a checkpoint on a corpus

Usage:
    python manage.py eval --checkpoint runs/.../model.ckpt --corpus data/test.jsonl
"""

from pathlib import Path

from ...checkpoint import load_checkpoint
from ...evaluation import evaluate
from ...utils import format_table, write_json
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Score a trained detector (identification, classification and per-type P/R/F1)'
    ledger_command = 'EVAL'

    def add_command_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--corpus', help='JSONL corpus (defaults to test_path)')

    def check(self, config, options):
        if not Path(options['checkpoint']).is_file():
            raise self.usage_error(f"checkpoint not found: {options['checkpoint']}")
        if not (options['corpus'] or config.test_path):
            raise self.usage_error('eval needs --corpus or test_path')

    def run(self, config, run_dir, options):
        model = load_checkpoint(options['checkpoint'])
        path = options['corpus'] or config.test_path
        sentences = self.load_split(path, model.config, 'test')
        report, _predicted = evaluate(model, sentences)

        rows = [{'level': 'identification', **report.identification.to_dict()},
                {'level': 'classification', **report.classification.to_dict()}]
        rows += [{'level': event_type, **counts.to_dict()}
                 for event_type, counts in report.per_type.items()]
        columns = [('level', 'level'), ('gold', 'gold'), ('predicted', 'pred'),
                   ('correct', 'correct'), ('precision', 'P'), ('recall', 'R'), ('f1', 'F1')]
        self.stdout.write(format_table(rows, columns))
        write_json(run_dir / 'report.json', report.to_dict())
        return {'f1': report.f1, 'identification_f1': report.identification.f1}
