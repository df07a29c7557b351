"""
Export relevance matrices (ℓ2 norms of edge representations)

Usage:
    python manage.py inspect --checkpoint runs/.../model.ckpt --input sentences.jsonl --layer 2

Per sentence: relevance_<k>.csv (header row of tokens + n rows), .json and .png.
"""

from pathlib import Path

from ...checkpoint import load_checkpoint
from ...inspection import capture_relevance, export_relevance, trigger_contrast
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Write relevance matrices of the edge representations at one layer'
    ledger_command = 'INSPECT'

    def add_command_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--input', required=True, help='JSONL sentences')
        parser.add_argument('--layer', type=int, help='0 = initial tensor; defaults to the last layer')
        parser.add_argument('--limit', type=int, default=0, help='only the first N sentences')

    def check(self, config, options):
        for key in ('checkpoint', 'input'):
            if not Path(options[key]).is_file():
                raise self.usage_error(f"{key} file not found: {options[key]}")

    def run(self, config, run_dir, options):
        model = load_checkpoint(options['checkpoint'])
        if options['layer'] is not None and not 0 <= options['layer'] <= model.config.num_layers:
            raise self.usage_error(f"--layer must be in 0..{model.config.num_layers}")
        # no cut at load time so capture_relevance can warn about long sentences
        sentences = self.load_split(options['input'], model.config.replace(max_len=10 ** 6),
                                    'input', require_triggers=False)
        if options['limit']:
            sentences = sentences[:options['limit']]

        trigger_means, other_means = [], []
        for k, sentence in enumerate(sentences):
            relevance = capture_relevance(model, sentence, options['layer'])
            export_relevance(relevance, run_dir, f"relevance_{k}")
            trigger, other = trigger_contrast(relevance)
            if trigger is not None and other is not None:
                trigger_means.append(trigger)
                other_means.append(other)

        summary = {'sentences': len(sentences), 'layer': options['layer'] if options['layer'] is not None
                   else model.config.num_layers}
        if trigger_means:
            summary['trigger_column_mean'] = sum(trigger_means) / len(trigger_means)
            summary['other_column_mean'] = sum(other_means) / len(other_means)
            self.stdout.write(
                f"mean column relevance: triggers {summary['trigger_column_mean']:.4f}, "
                f"others {summary['other_column_mean']:.4f}"
            )
        return summary
