"""
Tag sentences with a trained detector

Usage:
    python manage.py predict --checkpoint runs/.../model.ckpt --input sentences.jsonl

Input lines need tokens, entity_tags, dep_head and dep_label; triggers are optional.
Output: predictions.jsonl with {"tokens", "triggers"} per sentence.
"""

import json
from pathlib import Path

from ...checkpoint import load_checkpoint
from ...corpus import make_batches
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Write predicted trigger spans for a sentence file'
    ledger_command = 'PREDICT'

    def add_command_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--input', required=True, help='JSONL sentences')

    def check(self, config, options):
        for key in ('checkpoint', 'input'):
            if not Path(options[key]).is_file():
                raise self.usage_error(f"{key} file not found: {options[key]}")

    def run(self, config, run_dir, options):
        model = load_checkpoint(options['checkpoint'])
        sentences = self.load_split(options['input'], model.config, 'input', require_triggers=False)
        out = run_dir / 'predictions.jsonl'
        count = 0
        with open(out, 'w', encoding='utf-8', newline='\n') as handle:
            for batch in make_batches(sentences, model.vocabs, model.config.batch_size,
                                      model.config.max_len):
                for sentence, spans in zip(batch.sentences, model.predict(batch)):
                    record = {'tokens': sentence.tokens, 'triggers': [list(s) for s in spans]}
                    handle.write(json.dumps(record) + '\n')
                    count += len(spans)
        self.stdout.write(f"{len(sentences)} sentences, {count} triggers → {out}")
        return {'sentences': len(sentences), 'triggers': count}
