"""
Parameter counts of the three architectures

Usage:
    python manage.py count_params --synthetic
    python manage.py count_params --config configs/ace.ini --relations 40

Relation parameters follow p·r for EE-GCN and r·d·d for RGCN; totals
come from instantiating each architecture on the corpus vocabularies.
"""

from ...evaluation import count_relation_params
from ...exceptions import ArgumentError
from ...network import count_parameters
from ...training import build_model
from ...utils import format_table, write_json
from ..experiment import ExperimentCommand

ARCHITECTURES = ('gcn', 'rgcn', 'eegcn')


class Command(ExperimentCommand):
    help = 'Count relation-related and total parameters of GCN, RGCN and EE-GCN'
    ledger_command = 'COUNT_PARAMS'

    def add_command_arguments(self, parser):
        parser.add_argument('--synthetic', action='store_true',
                            help='take vocabularies from a generated corpus')
        parser.add_argument('--relations', type=int,
                            help='relation count r for the formulas (defaults to the corpus labels)')

    def check(self, config, options):
        if options['relations'] is not None and options['relations'] < 0:
            raise self.usage_error('--relations must be >= 0')
        if not options['synthetic'] and not (config.train_path and config.dev_path):
            raise self.usage_error('count_params needs train_path and dev_path (or --synthetic)')

    def run(self, config, run_dir, options):
        splits = self.corpus_splits(config, options['synthetic'])
        rows = []
        for architecture in ARCHITECTURES:
            model = build_model(self.replace_config(config, architecture=architecture), splits)
            relations = options['relations']
            if relations is None:
                relations = len(model.edge_vocab)
            try:
                relation_params = count_relation_params(architecture, relations, config.edge_dim,
                                                        config.gcn_hidden)
            except ArgumentError as exc:
                raise self.usage_error(str(exc)) from exc
            counts = count_parameters(model)
            rows.append({'architecture': architecture, 'relations': relations,
                         'relation_params': relation_params, **counts})

        columns = [('architecture', 'model'), ('relations', 'r'), ('relation_params', 'relation'),
                   ('embeddings', 'embeddings'), ('encoder', 'encoder'), ('graph', 'graph'),
                   ('classifier', 'classifier'), ('total', 'total')]
        self.stdout.write(format_table(rows, columns))
        write_json(run_dir / 'params.json', rows)
        return {row['architecture']: row['total'] for row in rows}
