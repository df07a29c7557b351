"""
Train a detector

Usage:
    python manage.py train --config configs/synthetic.ini
    python manage.py train --synthetic --seed 3 --set alpha=5
"""

from ...training import train
from ...utils import write_json
from ..experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Train an event trigger detector and write its best checkpoint and metrics log'
    ledger_command = 'TRAIN'

    def add_command_arguments(self, parser):
        parser.add_argument('--synthetic', action='store_true',
                            help='train on a generated corpus instead of train_path/dev_path')

    def check(self, config, options):
        if not options['synthetic'] and not (config.train_path and config.dev_path):
            raise self.usage_error('train needs train_path and dev_path (or --synthetic)')

    def run(self, config, run_dir, options):
        splits = self.corpus_splits(config, options['synthetic'])

        def show(row):
            self.stdout.write(
                f"epoch {row['epoch']:3d}  loss {row['train_loss']:.4f}  "
                f"dev P {row['dev_p']:.3f} R {row['dev_r']:.3f} F1 {row['dev_f1']:.3f}"
            )

        state = train(
            config,
            splits,
            checkpoint_path=run_dir / 'model.ckpt',
            metrics_path=run_dir / 'metrics.jsonl',
            on_epoch=show,
        )
        summary = {
            'best_epoch': state.best_epoch,
            'best_dev_f1': state.best_f1,
            'epochs_run': state.epoch,
            'dev': state.dev_report.to_dict(),
        }
        if state.test_report is not None:
            summary['test'] = state.test_report.to_dict()
            self.stdout.write(f"test F1 at epoch {state.best_epoch}: {state.test_report.f1:.4f}")
        write_json(run_dir / 'scores.json', summary)
        self.stdout.write(self.style.SUCCESS(
            f"Best dev F1 {state.best_f1:.4f} at epoch {state.best_epoch}; checkpoint {run_dir / 'model.ckpt'}"
        ))
        return {'best_epoch': state.best_epoch, 'best_dev_f1': state.best_f1}
