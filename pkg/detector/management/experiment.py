"""
EVENT DETECTOR - Command Base
================================
Shared plumbing for every detector management command.

WHAT EVERY COMMAND GETS:
- --config FILE, --set KEY=VALUE (repeatable), --seed N, --run-dir DIR
- Config resolved before any work; unknown keys stop with exit code 2
- A fresh run directory holding config.txt plus the command's artifacts
- A RunRecord row in the ledger, closed as SUCCEEDED or FAILED

EXIT CODES:
- 0 success
- 1 runtime failure (DetectorError, invalid corpus record)
- 2 usage or config error
"""

import logging
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from ..config import load_config, parse_overrides
from ..corpus import load_corpus
from ..exceptions import ConfigError, DetectorError
from ..synthetic import SyntheticSpec, gen_synthetic
from ..training import CorpusSplits
from ..utils import finish_run, make_run_dir, start_run, write_json

logger = logging.getLogger(__name__)

USAGE = 2


class ExperimentCommand(BaseCommand):
    """
    Subclasses set `ledger_command` and implement `run(config, run_dir, options)`,
    returning a JSON-serializable summary. `check(config, options)` runs first
    and is the place for usage errors.
    """

    ledger_command = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='key=value config file')
        parser.add_argument('--set', action='append', default=[], dest='overrides',
                            metavar='KEY=VALUE', help='override one config key (repeatable)')
        parser.add_argument('--seed', type=int, help='shorthand for --set seed=N')
        parser.add_argument('--run-dir', dest='run_dir',
                            help='write artifacts here instead of a new timestamped directory')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    # ============================================
    # CONFIG AND CORPUS
    # ============================================

    def resolve_config(self, options):
        try:
            overrides = parse_overrides(options['overrides'])
            if options.get('seed') is not None:
                overrides['seed'] = str(options['seed'])
            return load_config(options.get('config'), overrides)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=USAGE) from exc

    def replace_config(self, config, **changes):
        try:
            return config.replace(**changes)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=USAGE) from exc

    def usage_error(self, message):
        return CommandError(message, returncode=USAGE)

    def load_split(self, path, config, name, require_triggers=True):
        if not path:
            raise self.usage_error(f"no {name} corpus given (set {name}_path or use --synthetic)")
        if not Path(path).is_file():
            raise self.usage_error(f"{name} corpus not found: {path}")
        return load_corpus(path, config.max_len, require_triggers=require_triggers)

    def corpus_splits(self, config, synthetic=False):
        """
        Train/dev/test sentences from the configured paths, or a synthetic corpus

        Raises:
            CommandError (exit 2) when neither is available
        """
        if synthetic:
            corpus = gen_synthetic(SyntheticSpec.from_config(config), config.seed)
            return CorpusSplits(corpus.train, corpus.dev, corpus.test)
        return CorpusSplits(
            train=self.load_split(config.train_path, config, 'train'),
            dev=self.load_split(config.dev_path, config, 'dev'),
            test=self.load_split(config.test_path, config, 'test') if config.test_path else [],
        )

    # ============================================
    # EXECUTION
    # ============================================

    def check(self, config, options):
        pass

    def run(self, config, run_dir, options):
        raise NotImplementedError

    def open_run_dir(self, config, options):
        if options.get('run_dir'):
            run_dir = Path(options['run_dir'])
            if run_dir.exists() and any(run_dir.iterdir()):
                raise self.usage_error(f"run directory {run_dir} is not empty")
            run_dir.mkdir(parents=True, exist_ok=True)
            return run_dir
        return make_run_dir(config.runs_dir or settings.EEGCN_RUNS_DIR, config.seed)

    def handle(self, *args, **options):
        config = self.resolve_config(options)
        self.check(config, options)
        run_dir = self.open_run_dir(config, options)
        (run_dir / 'config.txt').write_text(config.to_text(), encoding='utf-8')

        record = None
        try:
            record = start_run(self.ledger_command, config, run_dir)
        except DatabaseError as exc:
            logger.warning("Run ledger unavailable (%s); run `manage.py migrate` to enable it", exc)

        try:
            summary = self.run(config, run_dir, options) or {}
        except CommandError as exc:
            self.close(record, 'FAILED', {'error': str(exc)})
            raise
        except (DetectorError, ValidationError) as exc:
            self.close(record, 'FAILED', {'error': str(exc)})
            raise CommandError(str(exc)) from exc

        write_json(run_dir / 'summary.json', summary)
        self.close(record, 'SUCCEEDED', summary)
        self.stdout.write(self.style.SUCCESS(f"Artifacts written to {run_dir}"))

    def close(self, record, status, summary):
        if record is None:
            return
        try:
            finish_run(record, status, summary)
        except DatabaseError as exc:
            logger.warning("Could not update run ledger: %s", exc)
