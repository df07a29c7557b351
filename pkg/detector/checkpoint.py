"""
EVENT DETECTOR - Checkpoints
================================
Self-describing container for a trained detector.

LAYOUT:
    line 1   EEGCN-CHECKPOINT 1
    line 2   JSON header: config, vocabularies, edge vocabulary, seed,
             tensor index [{name, shape, offset}]
    rest     every tensor as little-endian float64, row-major, in index order

No timestamps are written, so two identical runs give identical bytes.
"""

import json
import logging

import numpy as np

from .config import ModelConfig
from .corpus import Vocabularies
from .exceptions import CheckpointError
from .graph import EdgeVocab
from .network import EventDetector

logger = logging.getLogger(__name__)

MAGIC = b"EEGCN-CHECKPOINT 1\n"
FLOAT = np.dtype("<f8")


def save_checkpoint(path, model, params=None):
    """
    Write a detector to disk

    Args:
        path: output file
        model: EventDetector
        params: optional {name: array} snapshot to write instead of the live values
    """
    params = params if params is not None else model.snapshot()
    index = []
    offset = 0
    for name, data in params.items():
        index.append({"name": name, "shape": list(data.shape), "offset": offset})
        offset += int(data.size)

    header = {
        "config": model.config.to_dict(),
        "vocabularies": model.vocabs.to_dict(),
        "edge_vocab": model.edge_vocab.to_dict(),
        "seed": model.config.seed,
        "tensors": index,
    }
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for data in params.values():
            handle.write(np.ascontiguousarray(data, dtype=FLOAT).tobytes())
    logger.info("Saved checkpoint %s (%d values)", path, offset)


def read_checkpoint(path):
    """
    Parse a checkpoint without building a model

    Returns:
        (header dict, {name: numpy array})

    Raises:
        CheckpointError when the file is not a checkpoint or is truncated
    """
    try:
        with open(path, "rb") as handle:
            magic = handle.readline()
            header_line = handle.readline()
            payload = handle.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    if magic != MAGIC:
        raise CheckpointError(f"{path} is not a detector checkpoint")
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: corrupt header ({exc.msg})") from exc

    values = np.frombuffer(payload, dtype=FLOAT)
    tensors = {}
    for entry in header.get("tensors", []):
        size = int(np.prod(entry["shape"], dtype=np.int64))
        start, stop = entry["offset"], entry["offset"] + size
        if stop > values.size:
            raise CheckpointError(f"{path}: payload ends before tensor {entry['name']!r}")
        tensors[entry["name"]] = values[start:stop].reshape(entry["shape"]).astype(np.float64)
    return header, tensors


def load_checkpoint(path):
    """
    Rebuild an EventDetector from a checkpoint

    Returns:
        EventDetector in the saved state

    Raises:
        CheckpointError on unreadable files or parameters that do not fit
    """
    header, tensors = read_checkpoint(path)
    config = ModelConfig.from_dict(header["config"])
    vocabs = Vocabularies.from_dict(header["vocabularies"])
    edge_vocab = EdgeVocab.from_dict(header["edge_vocab"])
    model = EventDetector(config, vocabs, edge_vocab)

    missing = sorted(set(model.params) - set(tensors))
    if missing:
        raise CheckpointError(f"{path}: missing tensors {missing}")
    for name, data in tensors.items():
        if name not in model.params:
            raise CheckpointError(f"{path}: unexpected tensor {name!r}")
        if model.params[name].shape != data.shape:
            raise CheckpointError(
                f"{path}: tensor {name!r} has shape {data.shape}, model expects "
                f"{model.params[name].shape}"
            )
    model.restore(tensors)
    return model
