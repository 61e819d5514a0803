"""Parameters, Adam, and global-norm gradient clipping."""

from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import Tensor


class Parameter(Tensor):
    """A trainable leaf tensor carrying its own Adam moments."""

    __slots__ = ("m", "v", "step")

    def __init__(self, data):
        super().__init__(np.array(data), requires_grad=True)
        self.m = np.zeros_like(self.data)
        self.v = np.zeros_like(self.data)
        self.step = 0


def uniform_init(rng: np.random.Generator, shape, scale: float = 0.1, dtype=np.float32) -> Parameter:
    return Parameter(rng.uniform(-scale, scale, size=shape).astype(dtype))


def grad_norm(params) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            g = p.grad.reshape(-1)
            total += float(np.dot(g, g))
    return float(np.sqrt(total))


def clip_grad_norm(params, max_norm: float) -> float:
    """Rescale all gradients so their joint L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    norm = grad_norm(params)
    if norm > max_norm:
        scale = max_norm / (norm + 1e-6)
        for p in params:
            if p.grad is not None:
                p.grad = p.grad * np.asarray(scale, dtype=p.grad.dtype)
    return norm


def adam_step(params, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update; gradients are cleared afterwards.

    A parameter without a gradient is updated as if its gradient were zero.
    """
    for p in params:
        dtype = p.data.dtype
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        g = np.ascontiguousarray(g, dtype=dtype)
        # the update is in place; make sure no snapshot shares our buffers
        if not (p.data.flags.c_contiguous and p.data.flags.owndata):
            p.data = np.array(p.data, dtype=dtype, order="C")
        p.m = np.ascontiguousarray(p.m, dtype=dtype)
        p.v = np.ascontiguousarray(p.v, dtype=dtype)
        p.step += 1
        kernels.adam_update(p.data, g, p.m, p.v, lr, beta1, beta2, eps, 1.0 - beta1**p.step, 1.0 - beta2**p.step)
        p.zero_grad()
