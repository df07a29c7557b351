"""
EVENT DETECTOR - Training
================================
Bias loss, the SGD training loop, ablations and hyper-parameter sweeps.

THE LOOP (one epoch):
1. Shuffle the training sentences with seed + epoch
2. Per batch: forward (dropout on) → bias loss → backward → SGD with L2
3. Score the dev split in inference mode
4. Keep the parameters of the best dev F1; stop after max_epochs or
   `patience` epochs without improvement

Every epoch appends one JSON object to the metrics log. Nothing in the
log depends on the clock, so identical runs write identical bytes.
"""

import json
import logging
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import numkit as nk
from .checkpoint import save_checkpoint
from .corpus import build_vocabularies, decode_tags, event_types_of, load_embeddings, make_batches
from .evaluation import ScoreReport, score
from .exceptions import ArgumentError, TrainingAborted
from .layers import predict_tags
from .network import EventDetector, make_edge_vocab

logger = logging.getLogger(__name__)

EPS = 1e-12

# Ablation switch → config changes
ABLATIONS = {
    "TDL": {"use_typed_labels": False},
    "NAEU": {"use_naeu": False},
    "TDL&NAEU": {"use_typed_labels": False, "use_naeu": False},
    "MDER": {"edge_dim": 1},
    "BiLSTM": {"use_bilstm": False},
}

# Sweep axis → (config key, values)
SWEEP_AXES = {
    "edge_dim": ("edge_dim", (1, 20, 40, 50, 60, 80)),
    "layers": ("num_layers", tuple(range(1, 11))),
}


# ============================================
# BIAS LOSS
# ============================================

def bias_loss(probs, gold, mask, alpha, eps=EPS):
    """
    Weighted negative log-likelihood

    J = Σ over unmasked tokens of w·(−log p(gold)), w = 1 for O and alpha
    for every event tag. Padded tokens contribute nothing.

    Args:
        probs: Tensor[..., n, T]
        gold: int array [..., n] (padding may hold any value)
        mask: bool array [..., n]
        alpha: weight of non-O tokens (>= 1)
        eps: floor for p(gold)

    Returns:
        (scalar Tensor J, number of tokens whose p(gold) hit the floor)
    """
    if alpha < 1:
        raise ArgumentError(f"alpha must be >= 1, got {alpha}")
    mask = np.asarray(mask, dtype=bool)
    gold = np.where(mask, np.asarray(gold), 0)
    weights = np.where(gold == 0, 1.0, float(alpha)) * mask
    loss, clamped = nk.weighted_nll(probs, gold, weights, eps)
    if clamped:
        logger.warning("bias loss: %d token(s) had p(gold) below %g and were clamped", clamped, eps)
    return loss, clamped


# ============================================
# STATE
# ============================================

@dataclass
class CorpusSplits:
    train: list
    dev: list
    test: list = field(default_factory=list)


@dataclass
class TrainState:
    """
    Outcome of a training run

    Attributes:
        model: the detector, holding the best-dev parameters once train() returns
        epoch: last epoch run
        best_f1 / best_epoch: best dev classification F1 and where it happened
            (epoch 0 is the untrained model)
        snapshot: parameter copy taken at best_epoch
        seed: seed the run used
        history: the metric rows written to the log
        test_report: ScoreReport of the best snapshot on the test split (if any)
    """

    model: EventDetector
    seed: int
    epoch: int = 0
    best_f1: float = -1.0
    best_epoch: int = 0
    snapshot: dict = None
    history: list = field(default_factory=list)
    dev_report: ScoreReport = None
    test_report: ScoreReport = None


@dataclass
class StepResult:
    loss: float
    tokens: int
    clamped: int


# ============================================
# STEPS
# ============================================

def train_step(model, batch):
    """
    One SGD update on one batch

    Raises:
        TrainingAborted when the loss is not finite
    """
    config = model.config
    tokens = int(batch.mask.sum())
    model.zero_grad()
    with nk.recording() as tape:
        result = model.forward(batch, training=True)
        loss, clamped = bias_loss(result.probs, batch.gold, batch.mask, config.alpha)
        objective = loss
        if config.loss_normalization == "tokens":
            objective = nk.scale(loss, 1.0 / max(tokens, 1))

    if not np.isfinite(loss.item()):
        found = tape.first_non_finite()
        if found is None:
            detail = "no recorded tensor is non-finite"
        else:
            position, op, tensor = found
            detail = f"first non-finite tensor is the output of {op} (record {position}, shape {tensor.shape})"
        raise TrainingAborted(f"loss is {loss.item()}; {detail}")

    tape.backward(objective)
    if config.clip_norm > 0:
        nk.clip_grad_norm(model.parameters(), config.clip_norm)
    nk.sgd_step(model.parameters(), config.lr, config.l2)
    return StepResult(loss=loss.item(), tokens=tokens, clamped=clamped)


def inference_pass(model, sentences):
    """
    Score sentences and measure their bias loss with dropout off

    Returns:
        (ScoreReport, loss per token, predicted spans per sentence)
    """
    config = model.config
    total, tokens = 0.0, 0
    gold, predicted = [], []
    for batch in make_batches(sentences, model.vocabs, config.batch_size, config.max_len):
        result = model.forward(batch, training=False)
        loss, _clamped = bias_loss(result.probs, batch.gold, batch.mask, config.alpha)
        total += loss.item()
        tokens += int(batch.mask.sum())
        tags = predict_tags(result.probs)
        for row, n in enumerate(batch.lengths):
            predicted.append(decode_tags(tags[row, :n], model.vocabs.tagset))
        gold.extend(s.triggers for s in batch.sentences)
    return score(gold, predicted), total / max(tokens, 1), predicted


# ============================================
# TRAINING
# ============================================

def build_model(config, splits, word_vectors=None):
    """
    Vocabularies and a freshly initialized detector for a corpus

    Words and entity tags come from the training split; event types and
    dependency labels from every split.
    """
    all_splits = (splits.train, splits.dev, splits.test)
    vocabs = build_vocabularies(splits.train, event_types_of(*all_splits))
    labels = {label for split in all_splits for s in split for label in s.dep_label}
    edge_vocab = make_edge_vocab(config, labels)
    if word_vectors is None and config.embeddings_path:
        word_vectors = load_embeddings(config.embeddings_path, vocabs.words, config.word_dim,
                                       np.random.default_rng(config.seed))
    return EventDetector(config, vocabs, edge_vocab, word_vectors=word_vectors)


def _metric_row(epoch, train_loss, dev_loss, report):
    cls, ident = report.classification, report.identification
    return {
        "epoch": epoch,
        "train_loss": train_loss,
        "dev_loss": dev_loss,
        "dev_p": cls.precision,
        "dev_r": cls.recall,
        "dev_f1": cls.f1,
        "dev_id_f1": ident.f1,
    }


def train(config, splits, seed=None, checkpoint_path=None, metrics_path=None,
          word_vectors=None, on_epoch=None):
    """
    Train a detector with early stopping on dev F1

    Args:
        config: ModelConfig
        splits: CorpusSplits (train and dev required, test optional)
        seed: overrides config.seed when given
        checkpoint_path: where to write the best checkpoint (optional)
        metrics_path: JSONL metrics log (optional, appended to)
        word_vectors: pre-trained Tensor for the word table (optional)
        on_epoch: callback receiving every metric row

    Returns:
        TrainState, with the model restored to its best dev epoch

    Raises:
        ArgumentError when train or dev is empty
        TrainingAborted on a non-finite loss
    """
    if not splits.train or not splits.dev:
        raise ArgumentError("training needs non-empty train and dev splits")
    if seed is not None:
        config = config.replace(seed=seed)
    model = build_model(config, splits, word_vectors)
    state = TrainState(model=model, seed=config.seed)
    logger.info("Training %s on %d sentences (dev %d, test %d), seed %d, %d parameters",
                config.architecture, len(splits.train), len(splits.dev), len(splits.test),
                config.seed, sum(p.size for p in model.parameters()))

    def record(row):
        state.history.append(row)
        if metrics_path:
            with open(metrics_path, "a", encoding="utf-8", newline="\n") as handle:
                handle.write(json.dumps(row, sort_keys=True) + "\n")
        if on_epoch is not None:
            on_epoch(row)

    # Epoch 0: the untrained model
    _report, train_loss, _pred = inference_pass(model, splits.train)
    report, dev_loss, _pred = inference_pass(model, splits.dev)
    record(_metric_row(0, train_loss, dev_loss, report))
    state.best_f1, state.best_epoch = report.f1, 0
    state.snapshot, state.dev_report = model.snapshot(), report

    bad_epochs = 0
    for epoch in range(1, config.max_epochs + 1):
        state.epoch = epoch
        total, tokens, clamped = 0.0, 0, 0
        batches = make_batches(splits.train, model.vocabs, config.batch_size, config.max_len,
                               shuffle_seed=config.seed + epoch)
        for number, batch in enumerate(batches):
            try:
                step = train_step(model, batch)
            except TrainingAborted as exc:
                logger.error("Epoch %d batch %d: %s", epoch, number, exc)
                raise TrainingAborted(f"epoch {epoch}, batch {number}: {exc}") from exc
            total += step.loss
            tokens += step.tokens
            clamped += step.clamped

        report, dev_loss, _pred = inference_pass(model, splits.dev)
        row = _metric_row(epoch, total / max(tokens, 1), dev_loss, report)
        row["clamped"] = clamped
        record(row)
        logger.info("Epoch %d: train loss %.4f, dev P %.3f R %.3f F1 %.3f", epoch,
                    row["train_loss"], row["dev_p"], row["dev_r"], row["dev_f1"])

        if report.f1 > state.best_f1:
            state.best_f1, state.best_epoch = report.f1, epoch
            state.snapshot = model.snapshot()
            state.dev_report = report
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                logger.info("Early stop after epoch %d: no dev improvement for %d epochs "
                            "(best F1 %.4f at epoch %d)", epoch, bad_epochs, state.best_f1,
                            state.best_epoch)
                break

    model.restore(state.snapshot)
    if splits.test:
        state.test_report, _loss, _pred = inference_pass(model, splits.test)
        logger.info("Test F1 at best dev epoch %d: %.4f", state.best_epoch, state.test_report.f1)
    if checkpoint_path:
        save_checkpoint(checkpoint_path, model, state.snapshot)
    return state


# ============================================
# ABLATIONS AND SWEEPS
# ============================================

def _train_point(job):
    """Train one (config, seed) point; top-level so worker processes can pickle it"""
    config, splits, seed = job
    state = train(config, splits, seed=seed)
    test_f1 = state.test_report.f1 if state.test_report is not None else None
    return state.best_f1, test_f1


def _run_points(jobs, workers=1):
    if workers > 1 and len(jobs) > 1:
        with Pool(min(workers, len(jobs))) as pool:
            return pool.map(_train_point, jobs)
    return [_train_point(job) for job in jobs]


def _summarize(results):
    dev = [r[0] for r in results]
    test = [r[1] for r in results if r[1] is not None]
    return {
        "seeds": len(results),
        "dev_f1": dev,
        "median_f1": float(np.median(dev)),
        "median_test_f1": float(np.median(test)) if test else None,
    }


def seed_list(config, count):
    return [config.seed + offset for offset in range(count)]


def run_ablation(base_config, switches, splits, seeds=None, workers=None):
    """
    Train the full model and every requested ablation over several seeds

    Args:
        base_config: ModelConfig of the full model
        switches: subset of ABLATIONS keys
        splits: CorpusSplits
        seeds: seeds per variant (defaults to ablation_seeds seeds from base_config.seed)
        workers: process pool size (defaults to base_config.workers)

    Returns:
        list of rows: {"variant", "seeds", "dev_f1", "median_f1", "median_test_f1"},
        the full model first

    Raises:
        ArgumentError for an unknown switch
    """
    unknown = [s for s in switches if s not in ABLATIONS]
    if unknown:
        raise ArgumentError(f"unknown ablation switch(es) {unknown}; choose from {sorted(ABLATIONS)}")
    seeds = list(seeds) if seeds is not None else seed_list(base_config, base_config.ablation_seeds)
    variants = [("EE-GCN", base_config)]
    variants += [(f"-- {s}", base_config.replace(**ABLATIONS[s])) for s in switches]

    rows = []
    for name, config in variants:
        logger.info("Ablation %s: %d seeds", name, len(seeds))
        results = _run_points([(config, splits, seed) for seed in seeds],
                              workers or base_config.workers)
        rows.append({"variant": name, **_summarize(results)})
    return rows


def sweep(base_config, axis, splits, values=None, seeds=None, workers=None):
    """
    Train one model per value of a hyper-parameter axis

    Args:
        axis: "edge_dim" or "layers"
        values: overrides the axis' default values

    Returns:
        list of rows: {"axis", "value", "seeds", "dev_f1", "median_f1", "median_test_f1"}
    """
    if axis not in SWEEP_AXES:
        raise ArgumentError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    key, default_values = SWEEP_AXES[axis]
    seeds = list(seeds) if seeds is not None else seed_list(base_config, base_config.sweep_seeds)
    rows = []
    for value in (default_values if values is None else values):
        logger.info("Sweep %s=%s: %d seeds", axis, value, len(seeds))
        config = base_config.replace(**{key: value})
        results = _run_points([(config, splits, seed) for seed in seeds],
                              workers or base_config.workers)
        rows.append({"axis": axis, "value": value, **_summarize(results)})
    return rows
