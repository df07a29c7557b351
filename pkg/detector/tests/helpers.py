"""
Shared fixtures for the detector tests
"""

import numpy as np

from detector import numkit as nk
from detector.config import ModelConfig
from detector.corpus import Sentence


def fig1_sentence():
    """'Putin visited Bush at his ranch in November' with a Meet trigger on 'visited'"""
    return Sentence(
        tokens=["Putin", "visited", "Bush", "at", "his", "ranch", "in", "November"],
        entity_tags=["B-PER", "O", "B-PER", "O", "O", "B-LOC", "O", "O"],
        dep_head=[2, 0, 2, 6, 6, 2, 8, 2],
        dep_label=["nsubj", "root", "dobj", "case", "nmod:poss", "nmod", "case", "nmod"],
        triggers=[(1, 2, "Meet")],
    )


def random_tree_sentence(rng, n, labels=("nsubj", "dobj", "nmod", "det"), event_types=("Meet",),
                         vocabulary=("a", "b", "c", "d", "e", "f")):
    """Random tree parse of n tokens; at most one single-token trigger"""
    root = int(rng.integers(n))
    order = [root] + [i for i in rng.permutation(n) if i != root]
    heads = [0] * n
    for k, position in enumerate(order[1:], start=1):
        heads[position] = int(order[rng.integers(k)]) + 1
    triggers = []
    if event_types and rng.random() < 0.7:
        start = int(rng.integers(n))
        triggers.append((start, start + 1, str(rng.choice(list(event_types)))))
    return Sentence(
        tokens=[str(rng.choice(list(vocabulary))) for _ in range(n)],
        entity_tags=[str(rng.choice(["O", "B-PER", "B-LOC"])) for _ in range(n)],
        dep_head=heads,
        dep_label=["root" if h == 0 else str(rng.choice(list(labels))) for h in heads],
        triggers=triggers,
    )


def tiny_config(**changes):
    """Small sizes for fast tests: d=6, p=3, L=2, no dropout"""
    config = ModelConfig(
        word_dim=4, entity_dim=3, edge_dim=3, lstm_hidden=3, gcn_hidden=6, num_layers=2,
        dropout=0.0, batch_size=2, max_epochs=3, patience=2, seed=7,
    )
    return config.replace(**changes)


def random_tensor(rng, shape, requires_grad=True, name=None):
    return nk.Tensor(rng.uniform(-1.0, 1.0, size=shape), requires_grad=requires_grad, name=name)


def analytic_gradients(build, tensors):
    """Back-propagate build() (a scalar) and return each tensor's gradient"""
    for tensor in tensors:
        tensor.grad = None
    with nk.recording() as tape:
        out = build()
    tape.backward(out)
    return [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors]


class GradientCheckMixin:
    """Compare tape gradients with central finite differences"""

    def assertGradientsMatch(self, build, tensors, tolerance=1e-6):
        analytic = analytic_gradients(build, tensors)
        for tensor, grad in zip(tensors, analytic):
            numeric = nk.numeric_gradient(lambda: build().item(), tensor, step=1e-5)
            error = nk.relative_error(grad, numeric)
            self.assertLess(error, tolerance, f"gradient of {tensor.name or tensor.shape}: {error}")
