"""Finite-difference checks for the autodiff ops.

The analytic route is ``backward`` on the tape; the numeric route perturbs
one input element at a time and never touches the tape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, backward, mul, no_grad, sum_all


@dataclass
class GradCheckResult:
    max_rel_error: float
    n_checked: int
    worst: tuple = ()  # (input index, element index, analytic, numeric)

    def ok(self, rtol: float) -> bool:
        return self.max_rel_error <= rtol


def rel_error(a: float, n: float, floor: float = 1e-6) -> float:
    return abs(a - n) / max(abs(a), abs(n), floor)


def _projected(fn, tensors, proj):
    out = fn(*tensors)
    return sum_all(mul(out, Tensor(proj)))


def check_gradients(fn, arrays, eps: float = 1e-4, seed: int = 0, floor: float = 1e-6, wrt=None) -> GradCheckResult:
    """Compare tape gradients of ``sum(fn(*inputs) * R)`` with central differences.

    ``arrays`` are float64 numpy inputs; ``R`` is a fixed random projection so
    every output element contributes. ``wrt`` limits which inputs are checked.
    """
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    wrt = range(len(arrays)) if wrt is None else wrt
    with no_grad():
        out_shape = fn(*[Tensor(a) for a in arrays]).shape
    proj = np.random.default_rng(seed).standard_normal(out_shape)
    tensors = [Tensor(a, requires_grad=(i in wrt)) for i, a in enumerate(arrays)]
    backward(_projected(fn, tensors, proj))
    worst, worst_at, count = 0.0, (), 0
    for i in wrt:
        analytic = tensors[i].grad if tensors[i].grad is not None else np.zeros_like(arrays[i])
        for idx in np.ndindex(arrays[i].shape):
            old = arrays[i][idx]
            with no_grad():
                arrays[i][idx] = old + eps
                up = float(_projected(fn, [Tensor(a) for a in arrays], proj).data)
                arrays[i][idx] = old - eps
                down = float(_projected(fn, [Tensor(a) for a in arrays], proj).data)
            arrays[i][idx] = old
            numeric = (up - down) / (2 * eps)
            err = rel_error(float(analytic[idx]), numeric, floor)
            count += 1
            if err > worst:
                worst, worst_at = err, (i, idx, float(analytic[idx]), numeric)
    return GradCheckResult(worst, count, worst_at)


def check_parameters(loss_fn, params, n_samples: int = 50, eps: float = 1e-4, seed: int = 0, floor: float = 1e-6):
    """Spot-check ``n_samples`` random scalar entries of ``params`` (a name -> Tensor dict)."""
    backward(loss_fn())
    names = sorted(params)
    rng = np.random.default_rng(seed)
    worst, worst_at = 0.0, ()
    for _ in range(n_samples):
        name = names[int(rng.integers(len(names)))]
        p = params[name]
        idx = tuple(int(rng.integers(s)) for s in p.shape)
        analytic = 0.0 if p.grad is None else float(p.grad[idx])
        old = p.data[idx]
        with no_grad():
            p.data[idx] = old + eps
            up = float(loss_fn().data)
            p.data[idx] = old - eps
            down = float(loss_fn().data)
        p.data[idx] = old
        numeric = (up - down) / (2 * eps)
        err = rel_error(analytic, numeric, floor)
        if err > worst:
            worst, worst_at = err, (name, idx, analytic, numeric)
    for p in params.values():
        p.zero_grad()
    return GradCheckResult(worst, n_samples, worst_at)
