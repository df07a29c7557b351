"""
EVENT DETECTOR - Database Models
================================
The run ledger: one row per command that wrote artifacts.

WHY A LEDGER?
- Run directories are named by time and seed; the ledger says which
  command made each one, with which config, and how it ended
- Nothing here feeds back into training, so determinism is unaffected
"""

from django.db import models


# ============================================
# RUN RECORD
# ============================================
class RunRecord(models.Model):
    """
    One command invocation
    WHAT ran, WITH WHICH config, and HOW it ended
    """

    COMMAND_CHOICES = [
        ('TRAIN', 'Train'),
        ('EVAL', 'Evaluate'),
        ('PREDICT', 'Predict'),
        ('INSPECT', 'Inspect'),
        ('GEN_SYNTHETIC', 'Generate Synthetic Corpus'),
        ('COUNT_PARAMS', 'Count Parameters'),
        ('BENCH', 'Benchmark'),
        ('ABLATE', 'Ablation'),
        ('SWEEP', 'Sweep'),
    ]

    STATUS_CHOICES = [
        ('RUNNING', 'Running'),
        ('SUCCEEDED', 'Succeeded'),
        ('FAILED', 'Failed'),
    ]

    command = models.CharField(
        max_length=20,
        choices=COMMAND_CHOICES
    )

    status = models.CharField(
        max_length=20,
        choices=STATUS_CHOICES,
        default='RUNNING'
    )

    seed = models.IntegerField()

    run_dir = models.CharField(
        max_length=500,
        help_text="Directory holding the run's artifacts"
    )

    config = models.JSONField(default=dict)

    summary = models.JSONField(
        default=dict,
        blank=True,
        help_text="Headline numbers or the failure message"
    )

    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at']
        verbose_name = 'Run Record'
        verbose_name_plural = 'Run Records'

    def __str__(self):
        return f"{self.get_command_display()} seed={self.seed} ({self.get_status_display()})"
