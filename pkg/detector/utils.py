"""
EVENT DETECTOR - Utility Functions
================================
Helpers shared by the management commands

WHY SEPARATE UTILITIES?
- Keeps the commands short
- One place decides how run directories are named
- The run ledger is written the same way by every command
"""

import json
from pathlib import Path

from django.utils import timezone

from .models import RunRecord


# ============================================
# RUN LEDGER
# ============================================

def start_run(command, config, run_dir):
    """
    Open a ledger row for a command

    Args:
        command: RunRecord.COMMAND_CHOICES key, e.g. 'TRAIN'
        config: the resolved ModelConfig
        run_dir: directory the command writes into

    Example:
        record = start_run('TRAIN', config, run_dir)
    """
    return RunRecord.objects.create(
        command=command,
        seed=config.seed,
        run_dir=str(run_dir),
        config=config.to_dict(),
    )


def finish_run(record, status, summary=None):
    """
    Close a ledger row

    Args:
        record: RunRecord returned by start_run
        status: 'SUCCEEDED' or 'FAILED'
        summary: JSON-serializable headline numbers or {'error': message}
    """
    record.status = status
    record.summary = summary or {}
    record.finished_at = timezone.now()
    record.save(update_fields=['status', 'summary', 'finished_at'])
    return record


# ============================================
# RUN DIRECTORIES
# ============================================

def make_run_dir(root, seed, now=None):
    """
    Create <root>/<YYYYmmdd-HHMMSS>-seed<seed>, adding -2, -3... if it exists

    An existing directory is never reused.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    stamp = (now or timezone.now()).strftime('%Y%m%d-%H%M%S')
    base = f"{stamp}-seed{seed}"
    suffix = 1
    while True:
        name = base if suffix == 1 else f"{base}-{suffix}"
        path = root / name
        try:
            path.mkdir()
            return path
        except FileExistsError:
            suffix += 1


def write_json(path, data):
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write('\n')


# ============================================
# TABLES
# ============================================

def format_table(rows, columns):
    """
    Plain fixed-width table for terminal output

    Args:
        rows: list of dicts
        columns: list of (key, heading) pairs
    """
    def cell(value):
        if isinstance(value, float):
            return f"{value:.4f}"
        if isinstance(value, (list, tuple)):
            return ",".join(cell(v) for v in value)
        return "-" if value is None else str(value)

    body = [[cell(row.get(key)) for key, _heading in columns] for row in rows]
    widths = [
        max([len(heading)] + [len(line[i]) for line in body])
        for i, (_key, heading) in enumerate(columns)
    ]
    lines = ["  ".join(heading.ljust(w) for (_k, heading), w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(value.ljust(w) for value, w in zip(line, widths)) for line in body)
    return "\n".join(lines)
