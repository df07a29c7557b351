"""
EVENT DETECTOR - Inspection
================================
Relevance matrices: the ℓ2 norm of every edge representation at a layer.

Layer 0 is the adjacency tensor as initialized from the parse; layer l
is the tensor after the l-th NAEU. Exports go to CSV (header row of
tokens, then n rows), JSON and a PNG heatmap.
"""

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .corpus import encode_batch
from .exceptions import ArgumentError
from .graph import relevance_matrix

logger = logging.getLogger(__name__)


@dataclass
class Relevance:
    tokens: list
    layer: int
    matrix: np.ndarray
    triggers: list

    def to_dict(self):
        return {
            "tokens": list(self.tokens),
            "layer": self.layer,
            "matrix": self.matrix.tolist(),
            "triggers": [list(t) for t in self.triggers],
        }


def capture_relevance(model, sentence, layer=None):
    """
    Relevance matrix of one sentence at a layer (inference mode)

    Args:
        model: EventDetector with architecture eegcn
        sentence: Sentence (cut at config.max_len with a warning)
        layer: 0..num_layers, defaults to the last layer

    Returns:
        Relevance
    """
    config = model.config
    if config.architecture != "eegcn":
        raise ArgumentError(f"relevance needs an eegcn model, not {config.architecture}")
    layer = config.num_layers if layer is None else layer
    if not 0 <= layer <= config.num_layers:
        raise ArgumentError(f"layer must be in 0..{config.num_layers}, got {layer}")
    if len(sentence) > config.max_len:
        logger.warning("Sentence of %d tokens truncated to max_len=%d", len(sentence), config.max_len)

    batch = encode_batch([sentence], model.vocabs, config.max_len)
    result = model.forward(batch, training=False)
    kept = batch.sentences[0]
    n = len(kept)
    matrix = relevance_matrix(result.edge_states[layer])[0, :n, :n]
    return Relevance(tokens=list(kept.tokens), layer=layer, matrix=matrix,
                     triggers=list(kept.triggers))


def trigger_contrast(relevance, spans=None):
    """
    Mean relevance of trigger columns vs the other columns

    Args:
        relevance: Relevance
        spans: trigger spans to use (defaults to the gold ones)

    Returns:
        (trigger mean, non-trigger mean); None for a side with no columns
    """
    spans = relevance.triggers if spans is None else spans
    n = len(relevance.tokens)
    is_trigger = np.zeros(n, dtype=bool)
    for start, end, _event_type in spans:
        is_trigger[start:end] = True
    columns = relevance.matrix.mean(axis=0)
    trigger = float(columns[is_trigger].mean()) if is_trigger.any() else None
    other = float(columns[~is_trigger].mean()) if (~is_trigger).any() else None
    return trigger, other


# ============================================
# EXPORTS
# ============================================

def write_csv(path, relevance):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(relevance.tokens)
        for row in relevance.matrix:
            writer.writerow([repr(float(value)) for value in row])


def write_json(path, relevance):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(relevance.to_dict(), handle, indent=2)


def write_heatmap(path, relevance, cell=24):
    """
    Grayscale PNG heatmap, one `cell`×`cell` square per pair

    Darker means more relevant; the matrix is scaled by its maximum.
    """
    matrix = relevance.matrix
    peak = matrix.max() if matrix.size else 0.0
    scaled = matrix / peak if peak > 0 else np.zeros_like(matrix)
    pixels = (255 - np.round(scaled * 255)).astype(np.uint8)
    image = Image.fromarray(pixels)
    size = (max(1, pixels.shape[1] * cell), max(1, pixels.shape[0] * cell))
    image.resize(size, resample=Image.Resampling.NEAREST).save(path, format="PNG")


def export_relevance(relevance, directory, stem):
    """Write CSV, JSON and PNG next to each other; returns the three paths"""
    paths = {
        "csv": directory / f"{stem}.csv",
        "json": directory / f"{stem}.json",
        "png": directory / f"{stem}.png",
    }
    write_csv(paths["csv"], relevance)
    write_json(paths["json"], relevance)
    write_heatmap(paths["png"], relevance)
    return paths
