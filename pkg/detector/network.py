"""
EVENT DETECTOR - Network
================================
The full trigger tagger: input layer → graph layers → classifier.

WHY A CLASS HERE WHEN layers.py IS ALL FUNCTIONS?
The detector owns state: named parameters, vocabularies, the edge
table and the random source used for initialization and dropout.
The math stays in layers.py.

ARCHITECTURES (config.architecture):
- eegcn: adjacency tensor + EANU/NAEU layers
- gcn:   binary adjacency, relu(A·H·W)
- rgcn:  one filter per relation plus a self filter
"""

import copy
import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import numkit as nk
from .corpus import PAD_ID, decode_tags
from .graph import (EdgeVocab, batch_structure, binary_adjacency, build_batch_adjacency,
                    relation_adjacency)
from .layers import (EEGCNLayer, LSTMParams, RGCNLayer, bilstm, classify, eegcn_forward,
                     gcn_forward, predict_tags, rgcn_forward)

logger = logging.getLogger(__name__)


def glorot(rng, shape):
    """Uniform Glorot init over the last two axes"""
    fan_in, fan_out = shape[-2], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def make_edge_vocab(config, labels):
    """EdgeVocab honouring the typed-label switches of a config"""
    return EdgeVocab(
        labels,
        typed=config.use_typed_labels,
        keep=config.typed_label_subset,
        allow_unk=config.allow_unk_label,
    )


@dataclass
class ForwardResult:
    """
    Everything one forward pass produced

    Attributes:
        probs: Tensor[B, n, T]
        mask: bool [B, n]
        hidden_states: node states per graph layer
        edge_states: adjacency tensor per layer, index 0 = initialization (eegcn only)
    """

    probs: nk.Tensor
    mask: np.ndarray
    hidden_states: list = field(default_factory=list)
    edge_states: list = field(default_factory=list)


class EventDetector:
    """
    Trigger tagger over dependency graphs

    Args:
        config: ModelConfig
        vocabs: corpus.Vocabularies
        edge_vocab: graph.EdgeVocab (its table is created here)
        word_vectors: optional pre-trained Tensor[|V|, word_dim]
    """

    def __init__(self, config, vocabs, edge_vocab, word_vectors=None):
        self.config = config
        self.vocabs = vocabs
        self.edge_vocab = edge_vocab
        self.rng = np.random.default_rng(config.seed)
        self.params = OrderedDict()
        self._build(word_vectors)

    # ============================================
    # PARAMETERS
    # ============================================

    def _add(self, name, data):
        tensor = nk.parameter(data, name=name)
        self.params[name] = tensor
        return tensor

    def _build(self, word_vectors):
        cfg, rng = self.config, self.rng
        d = cfg.gcn_hidden

        if word_vectors is None:
            bound = np.sqrt(3.0 / cfg.word_dim)
            word_vectors = rng.uniform(-bound, bound, size=(len(self.vocabs.words), cfg.word_dim))
            word_vectors[PAD_ID] = 0.0
        self.word_embedding = self._add("word_embedding", nk.constant(word_vectors).data.copy())
        bound = np.sqrt(3.0 / cfg.entity_dim)
        entity_vectors = rng.uniform(-bound, bound, size=(len(self.vocabs.entities), cfg.entity_dim))
        entity_vectors[PAD_ID] = 0.0
        self.entity_embedding = self._add("entity_embedding", entity_vectors)

        features = cfg.word_dim + cfg.entity_dim
        self.lstm = None
        if cfg.use_bilstm:
            self.lstm = tuple(self._lstm(direction, features) for direction in ("fw", "bw"))
            features = 2 * cfg.lstm_hidden
        self.proj_W = self._add("proj_W", glorot(rng, (features, d)))
        self.proj_b = self._add("proj_b", np.zeros(d))

        self.layers = []
        if cfg.architecture == "eegcn":
            table = self.edge_vocab.init_table(cfg.edge_dim, rng)
            self.params[table.name] = table
            for depth in range(cfg.num_layers):
                W = self._add(f"eegcn{depth}_W", glorot(rng, (d, d)))
                W_u = None
                if cfg.use_naeu:
                    W_u = self._add(f"eegcn{depth}_W_u", glorot(rng, (2 * d + cfg.edge_dim, cfg.edge_dim)))
                self.layers.append(EEGCNLayer(W=W, W_u=W_u))
        elif cfg.architecture == "gcn":
            for depth in range(cfg.num_layers):
                self.layers.append(self._add(f"gcn{depth}_W", glorot(rng, (d, d))))
        else:
            relations = len(self.edge_vocab)
            for depth in range(cfg.num_layers):
                self.layers.append(RGCNLayer(
                    W_r=self._add(f"rgcn{depth}_W_r", glorot(rng, (relations, d, d))),
                    W_self=self._add(f"rgcn{depth}_W_self", glorot(rng, (d, d))),
                ))

        width = d * cfg.num_layers if cfg.classifier_input == "concat_layers" else d
        self.W_t = self._add("W_t", glorot(rng, (width, len(self.vocabs.tagset))))
        self.b_t = self._add("b_t", np.zeros(len(self.vocabs.tagset)))

    def _lstm(self, direction, features):
        h = self.config.lstm_hidden
        bias = np.zeros(4 * h)
        bias[h:2 * h] = 1.0  # forget gate starts open
        return LSTMParams(
            W_x=self._add(f"lstm_{direction}_W_x", glorot(self.rng, (features, 4 * h))),
            W_h=self._add(f"lstm_{direction}_W_h", glorot(self.rng, (h, 4 * h))),
            b=self._add(f"lstm_{direction}_b", bias),
        )

    def parameters(self):
        return list(self.params.values())

    def zero_grad(self):
        nk.zero_grad(self.parameters())

    def snapshot(self):
        """Copy of every parameter array, keyed by name"""
        return OrderedDict((name, p.data.copy()) for name, p in self.params.items())

    def restore(self, snapshot):
        for name, data in snapshot.items():
            self.params[name].data[...] = data

    def frozen_copy(self):
        """Independent copy for concurrent evaluation or benchmarking"""
        return copy.deepcopy(self)

    # ============================================
    # FORWARD
    # ============================================

    def encode(self, batch, training=False):
        """
        Input layer: [word; entity] → dropout → BiLSTM → projection to d

        Padded positions come out as zero vectors.

        Returns:
            Tensor[B, n, d]
        """
        mask = batch.mask
        x = nk.concat(
            [nk.gather(self.word_embedding, batch.token_ids),
             nk.gather(self.entity_embedding, batch.entity_ids)],
            axis=-1,
        )
        x = nk.dropout(x, self.config.dropout, self.rng, training)
        if self.lstm is not None:
            x = bilstm(x, mask, *self.lstm)
        H0 = nk.matmul(x, self.proj_W) + self.proj_b
        return nk.mul(H0, mask[..., None].astype(np.float64))

    def forward(self, batch, training=False):
        """
        Tag distributions for a batch

        Args:
            batch: corpus.Batch
            training: enables dropout

        Returns:
            ForwardResult
        """
        cfg = self.config
        mask = batch.mask
        H0 = self.encode(batch, training)
        result = ForwardResult(probs=None, mask=mask)

        if cfg.architecture == "eegcn":
            adjacency = build_batch_adjacency(batch.sentences, self.edge_vocab, batch.width,
                                              cfg.add_all_self_loops)
            if cfg.naeu_masked:
                scope = adjacency.edge_mask
            else:
                scope = mask[:, :, None] & mask[:, None, :]
            output = eegcn_forward(adjacency.E, H0, self.layers, scope=scope,
                                   dropout=cfg.dropout, rng=self.rng, training=training)
            result.hidden_states = output.hidden_states
            result.edge_states = [adjacency.E] + output.edge_states
        else:
            edge_mask, relation_ids = batch_structure(batch.sentences, self.edge_vocab,
                                                      batch.width, cfg.add_all_self_loops)
            if cfg.architecture == "gcn":
                _H, states = gcn_forward(binary_adjacency(edge_mask), H0, self.layers,
                                         dropout=cfg.dropout, rng=self.rng, training=training)
            else:
                adj = relation_adjacency(relation_ids, len(self.edge_vocab))
                _H, states = rgcn_forward(adj, H0, self.layers, dropout=cfg.dropout,
                                          rng=self.rng, training=training)
            result.hidden_states = states

        if cfg.classifier_input == "concat_layers":
            features = nk.concat(result.hidden_states, axis=-1)
        else:
            features = result.hidden_states[-1]
        features = nk.dropout(features, cfg.dropout, self.rng, training)
        result.probs = classify(features, self.W_t, self.b_t)
        return result

    def predict(self, batch):
        """
        Decoded trigger spans per sentence (inference mode)

        Returns:
            list (one per sentence) of (start, end, event_type)
        """
        result = self.forward(batch, training=False)
        tags = predict_tags(result.probs)
        return [decode_tags(tags[row, :n], self.vocabs.tagset)
                for row, n in enumerate(batch.lengths)]


def count_parameters(model):
    """
    Parameter counts of a detector

    Returns:
        dict with "total" and one entry per group (embeddings, encoder, graph, classifier)
    """
    groups = {"embeddings": 0, "encoder": 0, "graph": 0, "classifier": 0}
    for name, tensor in model.params.items():
        if name.endswith("embedding"):
            group = "embeddings"
        elif name.startswith(("lstm", "proj")):
            group = "encoder"
        elif name in ("W_t", "b_t"):
            group = "classifier"
        else:
            group = "graph"
        groups[group] += int(tensor.size)
    groups["total"] = sum(groups.values())
    return groups
