"""
Tests for the management commands: exit codes, artifacts and the run ledger
"""

import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from detector.models import RunRecord

SMALL = [
    'synthetic_sentences=60', 'synthetic_event_types=2', 'word_dim=4', 'entity_dim=3',
    'edge_dim=3', 'lstm_hidden=3', 'gcn_hidden=6', 'max_epochs=2', 'batch_size=10',
]


def small_overrides(*extra):
    args = []
    for pair in SMALL + list(extra):
        args += ['--set', pair]
    return args


class CommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_command(self, name, *args, run_dir=None):
        run_dir = self.root / (run_dir or name)
        out = StringIO()
        call_command(name, *args, '--run-dir', str(run_dir), stdout=out, stderr=StringIO())
        return run_dir, out.getvalue()

    def train_small(self, run_dir='trained', *extra):
        return self.run_command('train', '--synthetic', *small_overrides(*extra), run_dir=run_dir)[0]


class ExitCodeTests(CommandTestCase):

    def test_unknown_config_key(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('train', '--synthetic', '--set', 'learning_rate=0.1')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertFalse(RunRecord.objects.exists())

    def test_missing_corpus_paths(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('train')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_corpus_file_not_found(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('train', '--set', 'train_path=/nonexistent/train.jsonl',
                             '--set', 'dev_path=/nonexistent/dev.jsonl')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertEqual(RunRecord.objects.get().status, 'FAILED')

    def test_run_dir_must_be_empty(self):
        busy = self.root / 'busy'
        busy.mkdir()
        (busy / 'x').write_text('taken')
        with self.assertRaises(CommandError) as ctx:
            self.run_command('gen_synthetic', run_dir='busy')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_invalid_record_is_a_runtime_failure(self):
        checkpoint = self.train_small() / 'model.ckpt'
        bad = self.root / 'bad.jsonl'
        bad.write_text(json.dumps({'tokens': ['a', 'b'], 'entity_tags': ['O', 'O'], 'dep_head': [0, 9],
                                   'dep_label': ['root', 'dep'], 'triggers': []}) + '\n')
        with self.assertRaises(CommandError) as ctx:
            self.run_command('eval', '--checkpoint', str(checkpoint), '--corpus', str(bad))
        self.assertEqual(ctx.exception.returncode, 1)
        failed = RunRecord.objects.get(command='EVAL')
        self.assertEqual(failed.status, 'FAILED')
        self.assertIn('dep_head', failed.summary['error'])

    def test_unknown_switch(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('ablate', '--synthetic', '--switch', 'Attention')
        self.assertEqual(ctx.exception.returncode, 2)


class TrainCommandTests(CommandTestCase):

    def test_artifacts_and_ledger(self):
        run_dir, output = self.run_command('train', '--synthetic', *small_overrides(), run_dir='t')
        for name in ('config.txt', 'model.ckpt', 'metrics.jsonl', 'scores.json', 'summary.json'):
            self.assertTrue((run_dir / name).is_file(), name)
        self.assertIn('epoch   1', output)
        record = RunRecord.objects.get()
        self.assertEqual((record.command, record.status, record.seed), ('TRAIN', 'SUCCEEDED', 1))
        self.assertEqual(record.config['edge_dim'], 3)
        self.assertIn('best_dev_f1', record.summary)
        self.assertIsNotNone(record.finished_at)

    def test_fixed_seed_gives_identical_metrics(self):
        first = self.train_small('a', 'seed=4')
        second = self.run_command('train', '--synthetic', '--seed', '4', *small_overrides(), run_dir='b')[0]
        self.assertEqual((first / 'metrics.jsonl').read_bytes(), (second / 'metrics.jsonl').read_bytes())
        self.assertEqual((first / 'model.ckpt').read_bytes(), (second / 'model.ckpt').read_bytes())

    def test_alpha_five_matches_default(self):
        default = self.train_small('default')
        explicit = self.train_small('explicit', 'alpha=5')
        self.assertEqual((default / 'metrics.jsonl').read_bytes(), (explicit / 'metrics.jsonl').read_bytes())

    def test_config_text_reproduces_the_run(self):
        first = self.train_small('first')
        again = self.run_command('train', '--synthetic', '--config', str(first / 'config.txt'),
                                 run_dir='again')[0]
        self.assertEqual((first / 'metrics.jsonl').read_bytes(), (again / 'metrics.jsonl').read_bytes())

    def test_generated_corpus_files(self):
        corpus_dir, _ = self.run_command('gen_synthetic', *small_overrides(), run_dir='corpus')
        run_dir = self.run_command('train', '--config', str(corpus_dir / 'corpus.ini'),
                                   *small_overrides(), run_dir='from-files')[0]
        self.assertTrue((run_dir / 'model.ckpt').is_file())


class CheckpointCommandTests(CommandTestCase):

    def setUp(self):
        super().setUp()
        self.trained = self.train_small()
        self.corpus, _ = self.run_command('gen_synthetic', *small_overrides(), run_dir='corpus')

    def test_eval(self):
        run_dir, output = self.run_command('eval', '--checkpoint', str(self.trained / 'model.ckpt'),
                                           '--corpus', str(self.corpus / 'test.jsonl'))
        report = json.loads((run_dir / 'report.json').read_text())
        self.assertIn('classification', report)
        self.assertIn('identification', output)

    def test_predict(self):
        run_dir, _ = self.run_command('predict', '--checkpoint', str(self.trained / 'model.ckpt'),
                                      '--input', str(self.corpus / 'dev.jsonl'))
        lines = (run_dir / 'predictions.jsonl').read_text().splitlines()
        gold = (self.corpus / 'dev.jsonl').read_text().splitlines()
        self.assertEqual(len(lines), len(gold))
        first = json.loads(lines[0])
        self.assertEqual(first['tokens'], json.loads(gold[0])['tokens'])

    def test_predict_without_triggers(self):
        plain = self.root / 'plain.jsonl'
        record = json.loads((self.corpus / 'dev.jsonl').read_text().splitlines()[0])
        del record['triggers']
        plain.write_text(json.dumps(record) + '\n')
        run_dir, _ = self.run_command('predict', '--checkpoint', str(self.trained / 'model.ckpt'),
                                      '--input', str(plain))
        self.assertEqual(len((run_dir / 'predictions.jsonl').read_text().splitlines()), 1)

    def test_inspect(self):
        run_dir, _ = self.run_command('inspect', '--checkpoint', str(self.trained / 'model.ckpt'),
                                      '--input', str(self.corpus / 'dev.jsonl'), '--layer', '0',
                                      '--limit', '2')
        for k in range(2):
            for suffix in ('csv', 'json', 'png'):
                self.assertTrue((run_dir / f'relevance_{k}.{suffix}').is_file())
        self.assertFalse((run_dir / 'relevance_2.csv').exists())

    def test_inspect_layer_out_of_range(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('inspect', '--checkpoint', str(self.trained / 'model.ckpt'),
                             '--input', str(self.corpus / 'dev.jsonl'), '--layer', '9')
        self.assertEqual(ctx.exception.returncode, 2)


class ExperimentCommandTests(CommandTestCase):

    def test_count_params(self):
        run_dir, output = self.run_command('count_params', '--synthetic', '--relations', '40',
                                           *small_overrides())
        rows = json.loads((run_dir / 'params.json').read_text())
        by_model = {row['architecture']: row for row in rows}
        self.assertEqual(by_model['eegcn']['relation_params'], 40 * 3)
        self.assertEqual(by_model['rgcn']['relation_params'], 40 * 6 * 6)
        self.assertEqual(by_model['gcn']['relation_params'], 0)
        self.assertIn('relation', output)

    def test_bench(self):
        run_dir, _ = self.run_command('bench', '--synthetic',
                                      *small_overrides('bench_repetitions=1', 'bench_warmup=0'))
        data = json.loads((run_dir / 'bench.json').read_text())
        self.assertEqual(len(data['rows']), 6)
        self.assertIn('eegcn_over_rgcn_inference', data['ratios'])

    def test_ablate(self):
        run_dir, _ = self.run_command('ablate', '--synthetic', '--switch', 'NAEU',
                                      *small_overrides('ablation_seeds=1', 'max_epochs=1'))
        rows = json.loads((run_dir / 'ablation.json').read_text())
        self.assertEqual([row['variant'] for row in rows], ['EE-GCN', '-- NAEU'])

    def test_sweep(self):
        run_dir, _ = self.run_command('sweep', '--synthetic', '--axis', 'layers', '--values', '1,2',
                                      *small_overrides('sweep_seeds=1', 'max_epochs=1'))
        rows = json.loads((run_dir / 'sweep.json').read_text())
        self.assertEqual([row['value'] for row in rows], [1, 2])
        self.assertTrue(all(row['seeds'] == 1 for row in rows))

    def test_sweep_bad_values(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('sweep', '--synthetic', '--axis', 'layers', '--values', 'two')
        self.assertEqual(ctx.exception.returncode, 2)
