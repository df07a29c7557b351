"""
Generate a synthetic parsed corpus

Usage:
    python manage.py gen_synthetic --seed 1
    python manage.py gen_synthetic --label-blind --set synthetic_sentences=400

Writes train.jsonl, dev.jsonl, test.jsonl and corpus.ini (paths for --config).
"""

from ...corpus import write_corpus
from ...synthetic import SyntheticSpec, gen_synthetic
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Generate a synthetic corpus whose event types depend on dependency labels'
    ledger_command = 'GEN_SYNTHETIC'

    def add_command_arguments(self, parser):
        parser.add_argument('--label-blind', action='store_true', dest='label_blind',
                            help='shuffle argument phrases and drop prepositions')

    def run(self, config, run_dir, options):
        if options['label_blind']:
            config = self.replace_config(config, synthetic_label_blind=True)
        corpus = gen_synthetic(SyntheticSpec.from_config(config), config.seed)

        paths = {}
        for name in ('train', 'dev', 'test'):
            paths[name] = run_dir / f"{name}.jsonl"
            write_corpus(paths[name], getattr(corpus, name))
        (run_dir / 'corpus.ini').write_text(
            ''.join(f"{name}_path={path.resolve()}\n" for name, path in paths.items()),
            encoding='utf-8',
        )
        self.stdout.write(
            f"train {len(corpus.train)} / dev {len(corpus.dev)} / test {len(corpus.test)} sentences, "
            f"event types: {', '.join(corpus.lexicon.event_types)}"
        )
        return {name: len(getattr(corpus, name)) for name in ('train', 'dev', 'test')}
