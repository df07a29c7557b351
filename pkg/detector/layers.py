"""
EVENT DETECTOR - Layers
================================
The graph layers and the classifier head, as plain functions over Tensors.

WHAT'S HERE?
- eanu / naeu: the edge-aware node update and the node-aware edge update
- eegcn_forward: L layers of eanu followed by naeu
- gcn_forward / rgcn_forward: the two baselines
- classify: softmax tag distribution per token
- bilstm: the contextual encoder used by the input layer

All functions accept an optional leading batch axis.
"""

from dataclasses import dataclass, field

import numpy as np

from . import numkit as nk
from .exceptions import DimensionError


# ============================================
# PARAMETER CONTAINERS
# ============================================

@dataclass
class EEGCNLayer:
    """
    One EE-GCN layer

    Attributes:
        W: node filter, Tensor[d, d]
        W_u: edge transform, Tensor[(2d + p), p]; None disables NAEU
    """

    W: nk.Tensor
    W_u: nk.Tensor = None


@dataclass
class RGCNLayer:
    """W_r: Tensor[R, d, d] (one filter per relation), W_self: Tensor[d, d]"""

    W_r: nk.Tensor
    W_self: nk.Tensor


@dataclass
class LSTMParams:
    """One direction: W_x [in, 4h], W_h [h, 4h], b [4h]; gate order i, f, g, o"""

    W_x: nk.Tensor
    W_h: nk.Tensor
    b: nk.Tensor

    @property
    def hidden(self):
        return self.W_h.shape[0]


@dataclass
class EEGCNOutput:
    H: nk.Tensor
    E: nk.Tensor
    hidden_states: list = field(default_factory=list)
    edge_states: list = field(default_factory=list)


# ============================================
# EDGE-AWARE NODE UPDATE
# ============================================

def eanu(E, H, W):
    """
    Aggregate neighbours channel by channel through E

    H_c = E[:,:,c]·H·W for every channel c, then relu(mean over c).
    Every channel shares W, so the channel mean can be taken on E first:
    relu(mean_c(E)·H·W) is the same number and costs one matmul.

    Args:
        E: Tensor[..., n, n, p]
        H: Tensor[..., n, d]
        W: Tensor[d, d]

    Returns:
        Tensor[..., n, d]
    """
    if E.ndim < 3 or E.shape[-3] != E.shape[-2] or E.shape[-2] != H.shape[-2]:
        raise DimensionError(f"eanu: adjacency {E.shape} does not match node states {H.shape}")
    if W.shape[0] != H.shape[-1]:
        raise DimensionError(f"eanu: filter {W.shape} does not match node states {H.shape}")
    pooled = nk.mean(E, axis=-1)
    return nk.relu(nk.matmul(pooled, nk.matmul(H, W)))


# ============================================
# NODE-AWARE EDGE UPDATE
# ============================================

def naeu(E, H, W_u, scope=None):
    """
    Refresh every relation vector from its endpoints

    E'[i,j,:] = [E[i,j,:] ⊕ h_i ⊕ h_j]·W_u

    W_u is applied block-wise (edge block, row-node block, column-node
    block) so the n×n×(2d+p) concatenation is never built.

    Args:
        E: Tensor[..., n, n, p]
        H: Tensor[..., n, d], the post-EANU states of the same layer
        W_u: Tensor[2d + p, p]
        scope: optional bool array [..., n, n]; pairs outside it are zeroed

    Returns:
        Tensor[..., n, n, p]
    """
    p = E.shape[-1]
    d = H.shape[-1]
    if W_u.shape != (2 * d + p, p):
        raise DimensionError(f"naeu: W_u {W_u.shape} should be {(2 * d + p, p)}")
    if E.shape[-2] != H.shape[-2]:
        raise DimensionError(f"naeu: adjacency {E.shape} does not match node states {H.shape}")
    W_edge = W_u[:p]
    W_row = W_u[p:p + d]
    W_col = W_u[p + d:]
    from_edge = nk.matmul(E, W_edge)
    from_row = nk.expand_dims(nk.matmul(H, W_row), -2)   # h_i, broadcast over j
    from_col = nk.expand_dims(nk.matmul(H, W_col), -3)   # h_j, broadcast over i
    updated = from_edge + from_row + from_col
    if scope is not None:
        updated = nk.mul(updated, np.asarray(scope, dtype=np.float64)[..., None])
    return updated


# ============================================
# STACKS
# ============================================

def eegcn_forward(E0, H0, layers, scope=None, dropout=0.0, rng=None, training=False):
    """
    Stack of mutual node/edge updates

    Per layer: H = eanu(E, H, W); E = naeu(E, H, W_u) when the layer has W_u;
    dropout on H before it enters the next layer.

    Args:
        E0: initial adjacency tensor
        H0: initial node states
        layers: list of EEGCNLayer (at least one)
        scope: NAEU pair scope (see naeu)
        dropout, rng, training: node-state dropout between layers

    Returns:
        EEGCNOutput with the last H and E plus every layer's states
    """
    if not layers:
        raise DimensionError("eegcn_forward needs at least one layer")
    H, E = H0, E0
    output = EEGCNOutput(H=H0, E=E0)
    for depth, layer in enumerate(layers):
        if depth > 0:
            H = nk.dropout(H, dropout, rng, training)
        H = eanu(E, H, layer.W)
        if layer.W_u is not None:
            E = naeu(E, H, layer.W_u, scope)
        output.hidden_states.append(H)
        output.edge_states.append(E)
    output.H, output.E = H, E
    return output


def gcn_forward(A, H, W, num_layers=None, dropout=0.0, rng=None, training=False):
    """
    Vanilla GCN: num_layers × relu(A·H·W)

    Args:
        A: binary adjacency, array or Tensor [..., n, n]
        H: Tensor[..., n, d]
        W: a Tensor (shared by every layer) or a list with one Tensor per layer
        num_layers: layer count when W is a single Tensor

    Returns:
        (last H, list of every layer's H)
    """
    weights = list(W) if isinstance(W, (list, tuple)) else [W] * (num_layers or 1)
    A = nk.constant(A)
    states = []
    for depth, weight in enumerate(weights):
        if depth > 0:
            H = nk.dropout(H, dropout, rng, training)
        H = nk.relu(nk.matmul(A, nk.matmul(H, weight)))
        states.append(H)
    return H, states


def rgcn_layer(relation_adj, H, layer):
    """
    H'_i = relu(Σ_r Σ_{j∈N_r(i)} (1/|N_r(i)|)·H_j·W_r + H_i·W_self)

    Args:
        relation_adj: normalized adjacency per relation [..., R, n, n]
        H: Tensor[..., n, d]
        layer: RGCNLayer
    """
    per_relation = nk.matmul(nk.expand_dims(H, -3), layer.W_r)       # [..., R, n, d]
    messages = nk.sum(nk.matmul(relation_adj, per_relation), axis=-3)
    return nk.relu(messages + nk.matmul(H, layer.W_self))


def rgcn_forward(relation_adj, H, layers, dropout=0.0, rng=None, training=False):
    """Stack of rgcn_layer; returns (last H, list of every layer's H)"""
    relation_adj = nk.constant(relation_adj)
    states = []
    for depth, layer in enumerate(layers):
        if depth > 0:
            H = nk.dropout(H, dropout, rng, training)
        H = rgcn_layer(relation_adj, H, layer)
        states.append(H)
    return H, states


# ============================================
# CLASSIFIER
# ============================================

def classify(H, W_t, b_t):
    """
    softmax(h·W_t + b_t) for every token

    Returns:
        Tensor[..., n, T]; each row sums to 1
    """
    if H.shape[-1] != W_t.shape[0]:
        raise DimensionError(f"classify: features {H.shape} vs W_t {W_t.shape}")
    return nk.softmax_rows(nk.matmul(H, W_t) + b_t)


def predict_tags(probs):
    """Highest-probability tag per token"""
    data = probs.data if isinstance(probs, nk.Tensor) else probs
    return np.argmax(data, axis=-1)


# ============================================
# RECURRENT ENCODER
# ============================================

def lstm_direction(x, mask, params, reverse=False):
    """
    Run one LSTM direction over a padded batch

    The state is carried unchanged through padded steps and the output
    there is zero, so the backward direction effectively starts at each
    sentence's last real token.

    Args:
        x: Tensor[B, n, in]
        mask: bool array [B, n]
        params: LSTMParams

    Returns:
        Tensor[B, n, h]
    """
    size, width = mask.shape
    hidden = params.hidden
    projected = nk.matmul(x, params.W_x) + params.b
    h = nk.constant(np.zeros((size, hidden)))
    c = nk.constant(np.zeros((size, hidden)))
    outputs = [None] * width
    steps = range(width - 1, -1, -1) if reverse else range(width)
    for t in steps:
        gates = projected[:, t] + nk.matmul(h, params.W_h)
        i = nk.sigmoid(gates[:, :hidden])
        f = nk.sigmoid(gates[:, hidden:2 * hidden])
        g = nk.tanh(gates[:, 2 * hidden:3 * hidden])
        o = nk.sigmoid(gates[:, 3 * hidden:])
        c_new = f * c + i * g
        h_new = o * nk.tanh(c_new)
        live = mask[:, t:t + 1]
        c = nk.where(live, c_new, c)
        h = nk.where(live, h_new, h)
        outputs[t] = nk.where(live, h_new, 0.0)
    return nk.stack(outputs, axis=1)


def bilstm(x, mask, forward_params, backward_params):
    """Concatenate both directions: Tensor[B, n, 2h]"""
    return nk.concat(
        [lstm_direction(x, mask, forward_params),
         lstm_direction(x, mask, backward_params, reverse=True)],
        axis=-1,
    )
