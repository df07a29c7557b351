"""
EVENT DETECTOR - Numeric Kit
================================
Dense 64-bit tensors with reverse-mode automatic differentiation.

WHAT IS IN HERE?
- Tensor: a numpy float64 array plus an optional gradient buffer
- Tape: the ordered record of operations executed while recording
- The operations the detector needs (matmul, concat, mean_pool, relu,
  softmax, dropout, gather/scatter for embeddings...) each with its backward rule
- sgd_step: plain SGD with L2 decay
- Finite-difference helpers used by the gradient suite

HOW RECORDING WORKS:
    with recording() as tape:
        loss = ...            # every op touching a trainable tensor is recorded
    tape.backward(loss)       # walks the record in exact reverse order

Outside `recording()` nothing is recorded, which is what inference uses.
"""

import threading
from contextlib import contextmanager

import numpy as np

from .exceptions import ArgumentError, DimensionError, StateError


# ============================================
# TENSOR
# ============================================

class Tensor:
    """
    Dense n-dimensional float64 array taking part in autodiff

    Attributes:
        data: numpy array, always float64 and C-contiguous
        grad: same-shape array or None until a backward pass reaches it
        requires_grad: True for parameters and anything computed from them
        name: optional label, used in diagnostics and checkpoints
    """

    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} requires_grad={self.requires_grad}>"

    # Operator sugar, all routed through the recorded ops below
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)


def parameter(data, name=None):
    """Create a trainable leaf tensor"""
    return Tensor(data, requires_grad=True, name=name)


def constant(data):
    """Wrap anything array-like as a non-trainable tensor (tensors pass through)"""
    if isinstance(data, Tensor):
        return data
    return Tensor(data)


# ============================================
# TAPE
# ============================================

class Tape:
    """
    Ordered record of executed operations

    Each record is (op name, output, inputs, backward). backward() replays
    the records last-to-first; gradients add up when a tensor feeds
    several operations.
    """

    def __init__(self):
        self.records = []

    def __len__(self):
        return len(self.records)

    def record(self, op, output, inputs, backward):
        self.records.append((op, output, inputs, backward))

    def backward(self, loss):
        """
        Back-propagate from a scalar

        Args:
            loss: Tensor holding exactly one value
        """
        if loss.size != 1:
            raise DimensionError(f"backward needs a scalar, got shape {loss.shape}")
        loss.grad = np.ones_like(loss.data)

        for _op, output, inputs, backward in reversed(self.records):
            if output.grad is None:
                continue
            grads = backward(output.grad)
            for tensor, grad in zip(inputs, grads):
                if grad is None or not tensor.requires_grad:
                    continue
                if tensor.grad is None:
                    tensor.grad = np.array(grad, dtype=np.float64)
                else:
                    tensor.grad += grad

    def first_non_finite(self):
        """
        Find the earliest recorded output holding NaN or Inf

        Returns:
            (position, op name, tensor) or None when everything is finite
        """
        for position, (op, output, _inputs, _backward) in enumerate(self.records):
            if not np.all(np.isfinite(output.data)):
                return position, op, output
        return None


_state = threading.local()


def current_tape():
    stack = getattr(_state, "tapes", None)
    return stack[-1] if stack else None


@contextmanager
def recording():
    """
    Record operations for a backward pass

    Usage:
        with recording() as tape:
            loss = model_loss(...)
        tape.backward(loss)
    """
    if not hasattr(_state, "tapes"):
        _state.tapes = []
    tape = Tape()
    _state.tapes.append(tape)
    try:
        yield tape
    finally:
        _state.tapes.pop()


def _result(op, data, inputs, backward):
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=requires_grad)
    tape = current_tape()
    if requires_grad and tape is not None:
        tape.record(op, out, inputs, backward)
    return out


def _unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to `shape`"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ============================================
# LINEAR ALGEBRA
# ============================================

def matmul(a, b):
    """
    Matrix product over the last two axes (leading axes broadcast)

    Args:
        a: Tensor[..., m, k]
        b: Tensor[..., k, n]

    Returns:
        Tensor[..., m, n]

    Backward: dA = dC·Bᵀ, dB = Aᵀ·dC
    """
    a, b = constant(a), constant(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: cannot multiply shapes {a.shape} and {b.shape}")
    try:
        data = np.matmul(a.data, b.data)
    except ValueError as exc:
        raise DimensionError(f"matmul: cannot multiply shapes {a.shape} and {b.shape}") from exc

    def backward(grad):
        grad_a = np.matmul(grad, np.swapaxes(b.data, -1, -2)) if a.requires_grad else None
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), grad) if b.requires_grad else None
        return (
            None if grad_a is None else _unbroadcast(grad_a, a.shape),
            None if grad_b is None else _unbroadcast(grad_b, b.shape),
        )

    return _result("matmul", data, (a, b), backward)


# ============================================
# ELEMENTWISE ARITHMETIC
# ============================================

def add(a, b):
    a, b = constant(a), constant(b)
    data = a.data + b.data

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return _result("add", data, (a, b), backward)


def sub(a, b):
    a, b = constant(a), constant(b)
    data = a.data - b.data

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return _result("sub", data, (a, b), backward)


def mul(a, b):
    a, b = constant(a), constant(b)
    data = a.data * b.data

    def backward(grad):
        return (
            _unbroadcast(grad * b.data, a.shape),
            _unbroadcast(grad * a.data, b.shape),
        )

    return _result("mul", data, (a, b), backward)


def scale(a, factor):
    """Multiply by a plain Python number"""
    a = constant(a)
    factor = float(factor)

    def backward(grad):
        return (grad * factor,)

    return _result("scale", a.data * factor, (a,), backward)


def where(condition, a, b):
    """Pick from a where condition holds, else from b (condition is a constant bool array)"""
    a, b = constant(a), constant(b)
    condition = np.asarray(condition, dtype=bool)
    data = np.where(condition, a.data, b.data)

    def backward(grad):
        return (
            _unbroadcast(np.where(condition, grad, 0.0), a.shape),
            _unbroadcast(np.where(condition, 0.0, grad), b.shape),
        )

    return _result("where", data, (a, b), backward)


# ============================================
# SHAPE OPERATIONS
# ============================================

def concat(xs, axis=0):
    """
    Concatenate tensors along an axis

    A single tensor is returned as-is. Backward slices the gradient
    back into the pieces.
    """
    xs = [constant(x) for x in xs]
    if not xs:
        raise ArgumentError("concat needs at least one tensor")
    if len(xs) == 1:
        return xs[0]
    ndim = xs[0].ndim
    axis = axis % ndim
    for x in xs[1:]:
        same_rank = x.ndim == ndim
        if not same_rank or any(
            x.shape[i] != xs[0].shape[i] for i in range(ndim) if i != axis
        ):
            raise DimensionError(
                f"concat: shapes {[t.shape for t in xs]} differ outside axis {axis}"
            )
    data = np.concatenate([x.data for x in xs], axis=axis)
    boundaries = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def backward(grad):
        return tuple(np.split(grad, boundaries, axis=axis))

    return _result("concat", data, tuple(xs), backward)


def stack(xs, axis=0):
    xs = [constant(x) for x in xs]
    if not xs:
        raise ArgumentError("stack needs at least one tensor")
    shape = xs[0].shape
    if any(x.shape != shape for x in xs):
        raise DimensionError(f"stack: shapes differ {[x.shape for x in xs]}")
    data = np.stack([x.data for x in xs], axis=axis)

    def backward(grad):
        return tuple(np.take(grad, i, axis=axis) for i in range(len(xs)))

    return _result("stack", data, tuple(xs), backward)


def reshape(a, shape):
    a = constant(a)
    try:
        data = a.data.reshape(shape)
    except ValueError as exc:
        raise DimensionError(f"reshape: cannot view {a.shape} as {shape}") from exc

    def backward(grad):
        return (grad.reshape(a.shape),)

    return _result("reshape", data, (a,), backward)


def expand_dims(a, axis):
    a = constant(a)
    shape = np.expand_dims(a.data, axis).shape
    return reshape(a, shape)


def index(a, key):
    """Basic indexing (ints and slices); gradient lands back in the sliced region"""
    a = constant(a)
    data = np.array(a.data[key])

    def backward(grad):
        full = np.zeros_like(a.data)
        full[key] = grad
        return (full,)

    return _result("index", data, (a,), backward)


def gather(table, ids):
    """
    Embedding lookup: rows of `table` picked by integer `ids`

    Args:
        table: Tensor[V, dim]
        ids: integer array of any shape

    Returns:
        Tensor[*ids.shape, dim]; repeated ids accumulate gradient
    """
    table = constant(table)
    ids = np.asarray(ids, dtype=np.int64)
    data = table.data[ids]

    def backward(grad):
        full = np.zeros_like(table.data)
        np.add.at(full, ids.reshape(-1), grad.reshape(-1, table.shape[-1]))
        return (full,)

    return _result("gather", data, (table,), backward)


def scatter_rows(table, ids, positions, num_rows):
    """
    Build a [num_rows, dim] matrix that is zero except `positions`,
    which receive table[ids]

    Used to place dependency-label embeddings into the flattened
    adjacency tensor. Positions must be unique.
    """
    table = constant(table)
    ids = np.asarray(ids, dtype=np.int64)
    positions = np.asarray(positions, dtype=np.int64)
    if ids.shape != positions.shape:
        raise DimensionError(f"scatter_rows: ids {ids.shape} vs positions {positions.shape}")
    data = np.zeros((num_rows, table.shape[-1]))
    data[positions] = table.data[ids]

    def backward(grad):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, grad[positions])
        return (full,)

    return _result("scatter_rows", data, (table,), backward)


# ============================================
# REDUCTIONS
# ============================================

def sum(a, axis=None, keepdims=False):  # noqa: A001 - mirrors numpy naming
    a = constant(a)
    data = np.sum(a.data, axis=axis, keepdims=keepdims)

    def backward(grad):
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, a.shape),)

    return _result("sum", np.asarray(data, dtype=np.float64), (a,), backward)


def mean(a, axis=None, keepdims=False):
    a = constant(a)
    count = a.size if axis is None else np.prod([a.shape[i] for i in np.atleast_1d(axis)])
    data = np.mean(a.data, axis=axis, keepdims=keepdims)

    def backward(grad):
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad / count, a.shape),)

    return _result("mean", np.asarray(data, dtype=np.float64), (a,), backward)


def mean_pool(xs):
    """
    Elementwise arithmetic mean of p same-shape tensors

    Each input receives 1/p of the incoming gradient.
    """
    if not xs:
        raise ArgumentError("mean_pool needs at least one tensor")
    xs = [constant(x) for x in xs]
    if any(x.shape != xs[0].shape for x in xs):
        raise DimensionError(f"mean_pool: shapes differ {[x.shape for x in xs]}")
    return mean(stack(xs, axis=0), axis=0)


# ============================================
# NONLINEARITIES
# ============================================

def relu(a):
    a = constant(a)
    data = np.maximum(a.data, 0.0)

    def backward(grad):
        return (grad * (a.data > 0),)

    return _result("relu", data, (a,), backward)


def sigmoid(a):
    a = constant(a)
    data = 0.5 * (1.0 + np.tanh(0.5 * a.data))

    def backward(grad):
        return (grad * data * (1.0 - data),)

    return _result("sigmoid", data, (a,), backward)


def tanh(a):
    a = constant(a)
    data = np.tanh(a.data)

    def backward(grad):
        return (grad * (1.0 - data * data),)

    return _result("tanh", data, (a,), backward)


def softmax_rows(a):
    """Softmax over the last axis; every row sums to 1"""
    a = constant(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    data = exp / exp.sum(axis=-1, keepdims=True)

    def backward(grad):
        inner = np.sum(grad * data, axis=-1, keepdims=True)
        return (data * (grad - inner),)

    return _result("softmax", data, (a,), backward)


def dropout(a, rate, rng, training=True):
    """
    Inverted dropout

    In training mode each entry is zeroed with probability `rate` and
    survivors are scaled by 1/(1-rate); in inference mode it is the identity.
    """
    if not 0.0 <= rate < 1.0:
        raise ArgumentError(f"dropout rate must be in [0, 1), got {rate}")
    a = constant(a)
    if not training or rate == 0.0:
        return a
    keep = (rng.random(a.shape) >= rate) / (1.0 - rate)

    def backward(grad):
        return (grad * keep,)

    return _result("dropout", a.data * keep, (a,), backward)


# ============================================
# LOSS
# ============================================

def weighted_nll(probs, gold, weights, eps=1e-12):
    """
    Σ weights · (−log p(gold)), with p clamped below at eps

    Args:
        probs: Tensor[..., T] of probabilities
        gold: integer array [...] of target ids (any valid id where weight is 0)
        weights: float array [...]
        eps: clamp for p(gold)

    Returns:
        (scalar Tensor, number of weighted positions that hit the clamp)
    """
    probs = constant(probs)
    gold = np.asarray(gold, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if probs.shape[:-1] != gold.shape or gold.shape != weights.shape:
        raise DimensionError(
            f"weighted_nll: probs {probs.shape}, gold {gold.shape}, weights {weights.shape}"
        )
    picked = np.take_along_axis(probs.data, gold[..., None], axis=-1)[..., 0]
    clamped = picked < eps
    safe = np.where(clamped, eps, picked)
    data = np.sum(weights * -np.log(safe))

    def backward(grad):
        full = np.zeros_like(probs.data)
        local = np.where(clamped, 0.0, -weights / safe) * grad
        np.put_along_axis(full, gold[..., None], local[..., None], axis=-1)
        return (full,)

    clamp_count = int(np.count_nonzero(clamped & (weights > 0)))
    return _result("weighted_nll", np.asarray(data), (probs,), backward), clamp_count


# ============================================
# OPTIMIZATION
# ============================================

def zero_grad(params):
    for p in params:
        p.zero_grad()


def sgd_step(params, lr, l2=0.0):
    """
    p ← p − lr·(grad + l2·p), then the gradient buffers are reset to zero

    Args:
        params: iterable of trainable tensors
        lr: learning rate
        l2: L2 decay coefficient

    Raises:
        StateError when a parameter has no gradient buffer
    """
    params = list(params)
    for p in params:
        if p.grad is None:
            raise StateError(f"parameter {p.name or p!r} has no gradient")
    for p in params:
        p.data -= lr * (p.grad + l2 * p.data)
        p.grad.fill(0.0)
    return params


def clip_grad_norm(params, max_norm):
    """Rescale gradients so their global L2 norm is at most max_norm; returns the norm before clipping"""
    params = [p for p in params if p.grad is not None]
    total = float(np.sqrt(np.sum([np.sum(p.grad * p.grad) for p in params])))
    if max_norm > 0 and total > max_norm:
        factor = max_norm / (total + 1e-12)
        for p in params:
            p.grad *= factor
    return total


# ============================================
# FINITE DIFFERENCES
# ============================================

def numeric_gradient(fn, tensor, step=1e-5):
    """
    Central finite-difference gradient of a scalar function

    Args:
        fn: callable returning a float, reading tensor.data
        tensor: the Tensor to perturb in place (restored afterwards)
        step: perturbation size

    Returns:
        numpy array shaped like tensor.data
    """
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        upper = fn()
        flat[i] = original - step
        lower = fn()
        flat[i] = original
        grad.reshape(-1)[i] = (upper - lower) / (2.0 * step)
    return grad


def relative_error(analytic, numeric):
    """‖a − n‖ / max(‖a‖ + ‖n‖, 1e-8)"""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    denominator = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-8)
    return float(np.linalg.norm(analytic - numeric) / denominator)
