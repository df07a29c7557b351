# Generated by Django 4.2 on 2026-10-17 09:30

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('TRAIN', 'Train'), ('EVAL', 'Evaluate'), ('PREDICT', 'Predict'), ('INSPECT', 'Inspect'), ('GEN_SYNTHETIC', 'Generate Synthetic Corpus'), ('COUNT_PARAMS', 'Count Parameters'), ('BENCH', 'Benchmark'), ('ABLATE', 'Ablation'), ('SWEEP', 'Sweep')], max_length=20)),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('SUCCEEDED', 'Succeeded'), ('FAILED', 'Failed')], default='RUNNING', max_length=20)),
                ('seed', models.IntegerField()),
                ('run_dir', models.CharField(help_text="Directory holding the run's artifacts", max_length=500)),
                ('config', models.JSONField(default=dict)),
                ('summary', models.JSONField(blank=True, default=dict, help_text='Headline numbers or the failure message')),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Run Record',
                'verbose_name_plural': 'Run Records',
                'ordering': ['-started_at'],
            },
        ),
    ]
