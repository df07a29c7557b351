"""
EVENT DETECTOR - Evaluation
================================
Trigger-level scoring, parameter counting and the speed benchmark.

SCORING RULES:
- Identification: a predicted span is correct when (start, end) matches a gold trigger
- Classification: (start, end, event_type) must all match
- Each gold trigger matches at most one prediction
- P = correct / predicted, R = correct / gold, F1 = 2PR / (P + R), 0 when P + R = 0
"""

import logging
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from .corpus import decode_tags, make_batches, tags_for
from .exceptions import ArgumentError

logger = logging.getLogger(__name__)


# ============================================
# SCORE REPORT
# ============================================

@dataclass
class Counts:
    gold: int = 0
    predicted: int = 0
    correct: int = 0

    @property
    def precision(self):
        return self.correct / self.predicted if self.predicted else 0.0

    @property
    def recall(self):
        return self.correct / self.gold if self.gold else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def __add__(self, other):
        return Counts(self.gold + other.gold, self.predicted + other.predicted,
                      self.correct + other.correct)

    def to_dict(self):
        return {
            "gold": self.gold,
            "predicted": self.predicted,
            "correct": self.correct,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class ScoreReport:
    """
    Counts and P/R/F1 at two granularities, plus classification counts per event type
    """

    identification: Counts = field(default_factory=Counts)
    classification: Counts = field(default_factory=Counts)
    per_type: dict = field(default_factory=dict)

    @property
    def f1(self):
        """Classification F1, the number model selection uses"""
        return self.classification.f1

    def merge(self, other):
        """Report for the union of two disjoint evaluation sets"""
        per_type = defaultdict(Counts)
        for source in (self.per_type, other.per_type):
            for event_type, counts in source.items():
                per_type[event_type] = per_type[event_type] + counts
        return ScoreReport(
            identification=self.identification + other.identification,
            classification=self.classification + other.classification,
            per_type=dict(sorted(per_type.items())),
        )

    def to_dict(self):
        return {
            "identification": self.identification.to_dict(),
            "classification": self.classification.to_dict(),
            "per_type": {t: c.to_dict() for t, c in sorted(self.per_type.items())},
        }


def _check_spans(spans, row):
    previous_end = None
    for start, end, _event_type in sorted(spans):
        if previous_end is not None and start < previous_end:
            raise ValidationError(
                {"predicted": [f"sentence {row}: span ({start}, {end}) overlaps another prediction"]}
            )
        previous_end = end


def score(gold, predicted):
    """
    Score predicted trigger spans against gold ones

    Args:
        gold: one list of (start, end, event_type) per sentence
        predicted: same layout, same sentence order

    Returns:
        ScoreReport

    Raises:
        ValidationError when predicted spans of one sentence overlap
        ArgumentError when the two lists cover different sentence counts
    """
    if len(gold) != len(predicted):
        raise ArgumentError(f"{len(gold)} gold sentences vs {len(predicted)} predicted")
    report = ScoreReport()
    per_type = defaultdict(Counts)
    for row, (gold_spans, pred_spans) in enumerate(zip(gold, predicted)):
        gold_spans = [tuple(s) for s in gold_spans]
        pred_spans = [tuple(s) for s in pred_spans]
        _check_spans(pred_spans, row)

        gold_full, pred_full = Counter(gold_spans), Counter(pred_spans)
        gold_bounds = Counter((s, e) for s, e, _t in gold_spans)
        pred_bounds = Counter((s, e) for s, e, _t in pred_spans)
        matched = gold_full & pred_full

        report.identification += Counts(len(gold_spans), len(pred_spans),
                                        sum((gold_bounds & pred_bounds).values()))
        report.classification += Counts(len(gold_spans), len(pred_spans), sum(matched.values()))
        for _s, _e, event_type in gold_spans:
            per_type[event_type].gold += 1
        for _s, _e, event_type in pred_spans:
            per_type[event_type].predicted += 1
        for (_s, _e, event_type), count in matched.items():
            per_type[event_type].correct += count
    report.per_type = dict(sorted(per_type.items()))
    return report


def evaluate(model, sentences, batch_size=None):
    """
    Run a detector in inference mode over sentences and score it

    Args:
        model: EventDetector
        sentences: list of Sentence (long ones are cut at config.max_len)
        batch_size: defaults to config.batch_size

    Returns:
        (ScoreReport, list of predicted spans per sentence)
    """
    config = model.config
    batches = make_batches(sentences, model.vocabs, batch_size or config.batch_size, config.max_len)
    gold, predicted = [], []
    for batch in batches:
        predicted.extend(model.predict(batch))
        gold.extend(s.triggers for s in batch.sentences)
    return score(gold, predicted), predicted


def lexical_majority_baseline(train, sentences, tagset):
    """
    Tag every token with its most frequent training tag (O for unseen words)

    Used to check that a corpus cannot be solved from words alone.

    Returns:
        (ScoreReport, list of predicted spans per sentence)
    """
    votes = defaultdict(Counter)
    for sentence in train:
        for token, tag_id in zip(sentence.tokens, tags_for(sentence, tagset)):
            votes[token][tag_id] += 1
    # most frequent tag, lowest id on ties
    majority = {
        token: min(counts, key=lambda tag_id: (-counts[tag_id], tag_id))
        for token, counts in votes.items()
    }
    predicted = [
        decode_tags([majority.get(token, 0) for token in sentence.tokens], tagset)
        for sentence in sentences
    ]
    return score([s.triggers for s in sentences], predicted), predicted


# ============================================
# PARAMETER COUNTS
# ============================================

def count_relation_params(model_kind, r, p, d):
    """
    Relation-related parameters of a model kind

    - eegcn: one p-dim embedding per relation → p·r
    - rgcn:  one d×d filter per relation → r·d·d
    - gcn:   no relation parameters → 0

    Raises:
        ArgumentError for a negative size or an unknown kind
    """
    if min(r, p, d) < 0:
        raise ArgumentError(f"sizes must be non-negative, got r={r}, p={p}, d={d}")
    if model_kind == "eegcn":
        return p * r
    if model_kind == "rgcn":
        return r * d * d
    if model_kind == "gcn":
        return 0
    raise ArgumentError(f"unknown model kind {model_kind!r}")


# ============================================
# SPEED BENCHMARK
# ============================================

def _throughput(step, repetitions, warmup):
    for _ in range(warmup):
        step()
    started = time.perf_counter()
    for _ in range(repetitions):
        step()
    elapsed = time.perf_counter() - started
    return repetitions / elapsed if elapsed > 0 else float("inf")


def bench(models, batch, repetitions=20, warmup=2):
    """
    Training-step and inference-step throughput in batches per second

    Every model works on a private copy so the benchmark never changes
    the caller's parameters. Runs in the calling thread only.

    Args:
        models: dict name → EventDetector
        batch: the corpus.Batch every model sees
        repetitions: timed steps per phase
        warmup: untimed steps per phase

    Returns:
        list of {"model", "phase", "batches_per_sec", "repetitions"} rows
    """
    from .training import train_step

    if repetitions < 1 or warmup < 0:
        raise ArgumentError(f"need repetitions >= 1 and warmup >= 0, got {repetitions}, {warmup}")
    rows = []
    for name, model in models.items():
        working = model.frozen_copy()
        train_rate = _throughput(lambda: train_step(working, batch), repetitions, warmup)
        infer_rate = _throughput(lambda: working.forward(batch, training=False), repetitions, warmup)
        for phase, rate in (("train", train_rate), ("inference", infer_rate)):
            rows.append({"model": name, "phase": phase, "batches_per_sec": float(rate),
                         "repetitions": repetitions})
        logger.info("bench %s: train %.1f bat/s, inference %.1f bat/s", name, train_rate, infer_rate)
    return rows


def speed_ratio(rows, numerator, denominator, phase="inference"):
    """Throughput of one model divided by another's for a phase"""
    rates = {(row["model"], row["phase"]): row["batches_per_sec"] for row in rows}
    return float(np.divide(rates[(numerator, phase)], rates[(denominator, phase)]))
