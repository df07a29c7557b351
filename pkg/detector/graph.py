"""
EVENT DETECTOR - Dependency Graph
================================
Turns a sentence's dependency parse into the adjacency tensor E.

THE RULES:
- Edge (head h, dependent d, label r): E[h,d,:] = E[d,h,:] = emb(r)
- No edge: the zero vector
- The ROOT token gets a self loop with the reserved ROOT relation
- Embeddings come from a trainable table, so gradients flow back into it

Reserved relation ids: ROOT=0, SELF=1 (only with add_all_self_loops), UNK=2.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import DETACHED
from .exceptions import DimensionError, VocabularyError
from .numkit import Tensor, reshape, scatter_rows

logger = logging.getLogger(__name__)

ROOT = "ROOT"
SELF = "SELF"
UNK_LABEL = "<unk-label>"
RESERVED_LABELS = (ROOT, SELF, UNK_LABEL)
ROOT_ID, SELF_ID, UNK_LABEL_ID = 0, 1, 2
SHARED_ID = 0  # the one id every untyped edge maps to


class EdgeVocab:
    """
    Dependency label → relation id, plus the trainable label embedding table

    Args:
        labels: parser labels (ROOT/SELF/UNK are added in front)
        typed: False collapses every relation onto one shared id
        keep: labels that keep their own id even when typed is False
        allow_unk: map unseen labels to UNK instead of raising
    """

    def __init__(self, labels, typed=True, keep=(), allow_unk=False):
        self.labels = list(RESERVED_LABELS)
        for label in sorted(set(labels)):
            if label not in RESERVED_LABELS:
                self.labels.append(label)
        self.ids = {label: i for i, label in enumerate(self.labels)}
        self.typed = typed
        self.keep = frozenset(keep)
        self.allow_unk = allow_unk
        self.table = None

    def __len__(self):
        return len(self.labels)

    @property
    def parser_labels(self):
        return self.labels[len(RESERVED_LABELS):]

    def lookup(self, label):
        """
        Relation id for a label

        Raises:
            VocabularyError for an unknown label unless allow_unk is set
        """
        if label not in self.ids:
            if not self.allow_unk:
                raise VocabularyError(f"unknown dependency label {label!r}")
            label = UNK_LABEL
        if self.typed or label in self.keep:
            return self.ids[label]
        return SHARED_ID

    def init_table(self, dim, rng):
        """Create the |R|×p embedding table (standard normal, like a fresh embedding layer)"""
        self.table = Tensor(rng.standard_normal((len(self), dim)), requires_grad=True,
                            name="edge_embedding")
        return self.table

    def to_dict(self):
        return {
            "labels": self.parser_labels,
            "typed": self.typed,
            "keep": sorted(self.keep),
            "allow_unk": self.allow_unk,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["labels"], typed=data["typed"], keep=data["keep"],
                   allow_unk=data["allow_unk"])


@dataclass
class AdjacencyTensor:
    """
    E with its bookkeeping

    Attributes:
        E: Tensor[n, n, p] (or [B, n, n, p] for a batch)
        edge_mask: bool array marking pairs with an edge (ROOT self loop included)
        relation_ids: int array, relation id per pair, -1 where there is no edge
    """

    E: Tensor
    edge_mask: np.ndarray
    relation_ids: np.ndarray


def edge_list(sentence, edge_vocab, self_loops=False):
    """
    Undirected edges of a parse as (row, col, relation id) arrays

    Both directions of every dependency are listed; the ROOT token
    contributes one (r, r) loop.
    """
    rows, cols, rels = [], [], []
    for position, (head, label) in enumerate(zip(sentence.dep_head, sentence.dep_label)):
        if head == DETACHED:
            continue
        if head == 0:
            rows.append(position)
            cols.append(position)
            rels.append(edge_vocab.lookup(ROOT))
            continue
        relation = edge_vocab.lookup(label)
        rows.extend([head - 1, position])
        cols.extend([position, head - 1])
        rels.extend([relation, relation])
    if self_loops:
        for position, head in enumerate(sentence.dep_head):
            if head != 0:
                rows.append(position)
                cols.append(position)
                rels.append(edge_vocab.lookup(SELF))
    return (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
            np.asarray(rels, dtype=np.int64))


def batch_structure(sentences, edge_vocab, width, self_loops=False):
    """
    Edge mask and relation ids for a padded batch, no embeddings involved

    Returns:
        (edge_mask [B, width, width] bool, relation_ids [B, width, width] int)
    """
    size = len(sentences)
    edge_mask = np.zeros((size, width, width), dtype=bool)
    relation_ids = np.full((size, width, width), -1, dtype=np.int64)
    for b, sentence in enumerate(sentences):
        if len(sentence) > width:
            raise DimensionError(f"sentence of length {len(sentence)} does not fit width {width}")
        rows, cols, rels = edge_list(sentence, edge_vocab, self_loops)
        # a cyclic parse can list the same pair twice; keep the first
        _unique, first = np.unique(rows * width + cols, return_index=True)
        edge_mask[b, rows[first], cols[first]] = True
        relation_ids[b, rows[first], cols[first]] = rels[first]
    return edge_mask, relation_ids


def build_batch_adjacency(sentences, edge_vocab, width, self_loops=False):
    """
    Adjacency tensors for a whole batch, padded to `width`

    Returns:
        AdjacencyTensor with E: Tensor[B, width, width, p]
    """
    if edge_vocab.table is None:
        raise VocabularyError("edge vocabulary has no embedding table yet")
    dim = edge_vocab.table.shape[1]
    size = len(sentences)
    edge_mask, relation_ids = batch_structure(sentences, edge_vocab, width, self_loops)
    positions = np.flatnonzero(edge_mask)
    flat = scatter_rows(edge_vocab.table, relation_ids.reshape(-1)[positions], positions,
                        size * width * width)
    E = reshape(flat, (size, width, width, dim))
    return AdjacencyTensor(E=E, edge_mask=edge_mask, relation_ids=relation_ids)


def build_adjacency(sentence, edge_vocab, p, self_loops=False):
    """
    Adjacency tensor for one sentence

    Args:
        sentence: validated Sentence
        edge_vocab: EdgeVocab with its table initialized
        p: edge dimension (must match the table)
        self_loops: add a SELF loop on every non-ROOT token

    Returns:
        AdjacencyTensor with E: Tensor[n, n, p]
    """
    if edge_vocab.table is None or edge_vocab.table.shape[1] != p:
        got = None if edge_vocab.table is None else edge_vocab.table.shape
        raise DimensionError(f"edge table shape {got} does not have p={p} columns")
    batched = build_batch_adjacency([sentence], edge_vocab, len(sentence), self_loops)
    n = len(sentence)
    return AdjacencyTensor(
        E=reshape(batched.E, (n, n, p)),
        edge_mask=batched.edge_mask[0],
        relation_ids=batched.relation_ids[0],
    )


def binary_adjacency(edge_mask):
    """The 0/1 matrix A used by the vanilla GCN"""
    return edge_mask.astype(np.float64)


def relation_adjacency(relation_ids, num_relations):
    """
    Row-normalized adjacency per relation: A_r[i, j] = 1/|N_r(i)| for j ∈ N_r(i)

    Args:
        relation_ids: int array [..., n, n], -1 for no edge
        num_relations: R

    Returns:
        float array [..., R, n, n]
    """
    one_hot = relation_ids[..., None, :, :] == np.arange(num_relations)[:, None, None]
    counts = one_hot.sum(axis=-1, keepdims=True)
    return np.where(counts > 0, one_hot / np.maximum(counts, 1), 0.0)


def relevance_matrix(E):
    """
    ℓ2 norm of every relation vector: M[i, j] = ‖E[i, j, :]‖

    Accepts a Tensor or a numpy array.
    """
    data = E.data if isinstance(E, Tensor) else np.asarray(E, dtype=np.float64)
    return np.linalg.norm(data, axis=-1)
