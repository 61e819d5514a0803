"""Dense tensors with tape-based reverse-mode differentiation.

Every op returns a new :class:`Tensor`. While gradient recording is enabled
and at least one input requires a gradient, the output keeps references to
its inputs and a closure that pushes the upstream gradient back to them.
"""

from __future__ import annotations

import contextlib
import threading

import numpy as np

from . import kernels

_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (inference mode)."""
    prev = is_grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


class ShapeError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_consumed", "_owns_grad", "_pending")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data)
        if self.data.dtype.kind != "f":
            self.data = self.data.astype(np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self._consumed = False
        self._owns_grad = False
        self._pending = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None
        self._owns_grad = False

    def _accumulate(self, g):
        # the first incoming array may be shared with a sibling input, so it
        # is only written to after we have made our own copy
        if self.grad is None:
            self.grad, self._owns_grad = g, False
        elif self._owns_grad and self.grad.shape == g.shape and self.grad.dtype == g.dtype:
            np.add(self.grad, g, out=self.grad)
        else:
            self.grad, self._owns_grad = self.grad + g, True

    def backward(self):
        backward(self)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)


def as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    arr = np.asarray(x)
    if like is not None:
        arr = arr.astype(like.data.dtype, copy=False)
    return Tensor(arr)


def _result(data, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_broadcast(a: Tensor, b: Tensor, opname: str):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{opname}: incompatible shapes {a.shape} and {b.shape}") from None


def backward(loss: Tensor):
    """Populate ``.grad`` on every tensor reachable from ``loss``.

    The graph is released afterwards; a second call on the same loss raises.
    """
    if loss._consumed:
        raise RuntimeError("backward() already ran on this graph; rebuild the forward pass first")
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    for node in order:
        if node._pending is not None:
            _flush_pending(node)
    for node in order:
        if node._backward is not None:
            node._backward = None
            node._parents = ()
            node.grad = None
    loss._consumed = True


# ---------------------------------------------------------------- elementwise


def add(a, b) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    _check_broadcast(a, b, "add")

    def bw(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _result(a.data + b.data, (a, b), bw)


def sub(a, b) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    _check_broadcast(a, b, "sub")

    def bw(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g, b.shape))

    return _result(a.data - b.data, (a, b), bw)


def mul(a, b) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    _check_broadcast(a, b, "mul")

    def bw(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _result(a.data * b.data, (a, b), bw)


def sigmoid(x: Tensor) -> Tensor:
    y = 1.0 / (1.0 + np.exp(-x.data))

    def bw(g):
        x._accumulate(g * y * (1.0 - y))

    return _result(y, (x,), bw)


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def bw(g):
        x._accumulate(g * (1.0 - y * y))

    return _result(y, (x,), bw)


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)

    def bw(g):
        x._accumulate(g * y)

    return _result(y, (x,), bw)


def log(x: Tensor) -> Tensor:
    def bw(g):
        x._accumulate(g / x.data)

    return _result(np.log(x.data), (x,), bw)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        x._accumulate(y * (g - (g * y).sum(axis=axis, keepdims=True)))

    return _result(y, (x,), bw)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    y = z - np.log(np.exp(z).sum(axis=axis, keepdims=True))

    def bw(g):
        x._accumulate(g - np.exp(y) * g.sum(axis=axis, keepdims=True))

    return _result(y, (x,), bw)


def dropout(x: Tensor, p: float, rng: np.random.Generator | None, training: bool) -> Tensor:
    """Inverted dropout: kept activations are scaled by 1/(1-p)."""
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs a random generator")
    keep = (rng.random(x.shape) >= p).astype(x.dtype) / (1.0 - p)

    def bw(g):
        x._accumulate(g * keep)

    return _result(x.data * keep, (x,), bw)


# ------------------------------------------------------------------ reductions


def sum_all(x: Tensor) -> Tensor:
    def bw(g):
        x._accumulate(np.broadcast_to(g, x.shape).copy())

    return _result(np.asarray(x.data.sum()), (x,), bw)


def mean_all(x: Tensor) -> Tensor:
    return mul(sum_all(x), 1.0 / x.data.size)


# ------------------------------------------------------------- linear algebra


def _flush_pending(leaf: Tensor):
    xs, gs = leaf._pending
    leaf._pending = None
    if len(xs) == 1:
        leaf._accumulate(xs[0].T @ gs[0])
    else:
        leaf._accumulate(np.concatenate(xs).T @ np.concatenate(gs))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def bw(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            if b._backward is None and a.data.dtype == g.dtype:
                # leaf weight used at many time steps: gather the (input,
                # upstream) pairs and do one stacked product at the end
                if b._pending is None:
                    b._pending = ([], [])
                b._pending[0].append(a.data)
                b._pending[1].append(g)
            else:
                b._accumulate(a.data.T @ g)

    return _result(a.data @ b.data, (a, b), bw)


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matmul of (B, M, K) by (B, K, N)."""
    if a.data.ndim != 3 or b.data.ndim != 3 or a.shape[0] != b.shape[0] or a.shape[2] != b.shape[1]:
        raise ShapeError(f"bmm: incompatible shapes {a.shape} and {b.shape}")

    def bw(g):
        if a.requires_grad:
            a._accumulate(np.matmul(g, b.data.transpose(0, 2, 1)))
        if b.requires_grad:
            b._accumulate(np.matmul(a.data.transpose(0, 2, 1), g))

    return _result(np.matmul(a.data, b.data), (a, b), bw)


# ----------------------------------------------------------------- structural


def concat(xs, axis: int = -1) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    try:
        data = np.concatenate([x.data for x in xs], axis=axis)
    except ValueError:
        raise ShapeError("concat: incompatible shapes " + ", ".join(str(x.shape) for x in xs)) from None
    bounds = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def bw(g):
        for x, part in zip(xs, np.split(g, bounds, axis=axis)):
            if x.requires_grad:
                x._accumulate(part)

    return _result(data, xs, bw)


def stack(xs, axis: int = 0) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    try:
        data = np.stack([x.data for x in xs], axis=axis)
    except ValueError:
        raise ShapeError("stack: incompatible shapes " + ", ".join(str(x.shape) for x in xs)) from None

    def bw(g):
        for i, x in enumerate(xs):
            if x.requires_grad:
                x._accumulate(np.take(g, i, axis=axis))

    return _result(data, xs, bw)


def _is_basic_index(idx) -> bool:
    parts = idx if isinstance(idx, tuple) else (idx,)
    return all(isinstance(p, (int, np.integer, slice)) or p is Ellipsis for p in parts)


def getitem(x: Tensor, idx) -> Tensor:
    basic = _is_basic_index(idx)

    def bw(g):
        full = np.zeros_like(x.data)
        if basic:
            full[idx] = g
        else:
            np.add.at(full, idx, g)
        x._accumulate(full)

    return _result(x.data[idx], (x,), bw)


def reshape(x: Tensor, shape) -> Tensor:
    def bw(g):
        x._accumulate(g.reshape(x.shape))

    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view {x.shape} as {tuple(shape)}") from None
    return _result(data, (x,), bw)


def transpose(x: Tensor, axes) -> Tensor:
    inverse = np.argsort(axes)

    def bw(g):
        x._accumulate(g.transpose(inverse))

    return _result(x.data.transpose(axes), (x,), bw)


def embed(table: Tensor, ids) -> Tensor:
    """Row lookup; ``ids`` may have any integer shape."""
    ids = np.asarray(ids, dtype=np.int64)

    def bw(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        table._accumulate(full)

    return _result(table.data[ids], (table,), bw)


# ---------------------------------------------------------------------- losses


def cross_entropy(logits: Tensor, targets, weights=None, reduction: str = "mean") -> Tensor:
    """Softmax cross-entropy of (N, V) logits against integer targets.

    ``weights`` scales each row's loss (0 masks padding). ``reduction`` is
    ``"mean"`` (over rows) or ``"sum"``.
    """
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if logits.data.ndim == 1:
        logits = reshape(logits, (1, -1))
    n, v = logits.shape
    if targets.shape[0] != n:
        raise ShapeError(f"cross_entropy: logits {logits.shape} vs targets {targets.shape}")
    w = np.ones(n, dtype=logits.dtype) if weights is None else np.asarray(weights, dtype=logits.dtype)
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(n)
    nll = lse - z[rows, targets]
    scale = 1.0 / n if reduction == "mean" else 1.0
    total = (w * nll).sum() * scale

    def bw(g):
        p = np.exp(z - lse[:, None])
        p[rows, targets] -= 1.0
        logits._accumulate(p * (w * scale * g)[:, None])

    return _result(np.asarray(total, dtype=logits.dtype), (logits,), bw)


# ------------------------------------------------------------- fused LSTM cell


def lstm_gates(pre: Tensor) -> Tensor:
    """Activate (B, 4H) pre-gates laid out [input, forget, candidate, output]."""
    act = kernels.gates_forward(pre.data)

    def bw(g):
        pre._accumulate(kernels.gates_backward(act, g))

    return _result(act, (pre,), bw)


def lstm_cell(act: Tensor, c_prev: Tensor, mask=None) -> Tensor:
    """New cell state; rows with mask 0 carry ``c_prev`` through unchanged."""
    m = _row_mask(mask, act)
    c = kernels.cell_forward(act.data, c_prev.data, m)

    def bw(g):
        d_act, d_prev = kernels.cell_backward(act.data, c_prev.data, m, g)
        if act.requires_grad:
            act._accumulate(d_act)
        if c_prev.requires_grad:
            c_prev._accumulate(d_prev)

    return _result(c, (act, c_prev), bw)


def lstm_hidden(act: Tensor, c: Tensor, h_prev: Tensor, mask=None) -> Tensor:
    """Hidden output o*tanh(c); rows with mask 0 carry ``h_prev``."""
    m = _row_mask(mask, act)
    h = kernels.hidden_forward(act.data, c.data, h_prev.data, m)

    def bw(g):
        d_act, d_c, d_prev = kernels.hidden_backward(act.data, c.data, m, g)
        if act.requires_grad:
            act._accumulate(d_act)
        if c.requires_grad:
            c._accumulate(d_c)
        if h_prev.requires_grad:
            h_prev._accumulate(d_prev)

    return _result(h, (act, c, h_prev), bw)


def _row_mask(mask, act: Tensor) -> np.ndarray:
    if mask is None:
        return np.ones(act.shape[0], dtype=act.dtype)
    return np.ascontiguousarray(mask, dtype=act.dtype).reshape(-1)
