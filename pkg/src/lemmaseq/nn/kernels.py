"""Backend selection for the LSTM pointwise and Adam kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``LEMMASEQ_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _lstm_py

_BACKENDS = {"python": _lstm_py}

try:
    from . import _lstm_ext
except ImportError:  # extension not built
    _lstm_ext = None
else:
    _BACKENDS["compiled"] = _lstm_ext

BACKEND = "python"
_impl = _lstm_py


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name: str):
    """Switch kernels at runtime (benchmarks and parity tests)."""
    global BACKEND, _impl
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {available_backends()}")
    BACKEND = name
    _impl = _BACKENDS[name]


if _lstm_ext is not None and os.environ.get("LEMMASEQ_PURE_PYTHON", "") in ("", "0"):
    use_backend("compiled")


def _c(a):
    return np.ascontiguousarray(a)


def gates_forward(pre):
    with np.errstate(over="ignore"):
        return _impl.gates_forward(_c(pre))


def gates_backward(act, grad):
    return _impl.gates_backward(_c(act), _c(grad).astype(act.dtype, copy=False))


def cell_forward(act, c_prev, mask):
    return _impl.cell_forward(_c(act), _c(c_prev), _c(mask))


def cell_backward(act, c_prev, mask, grad):
    return _impl.cell_backward(_c(act), _c(c_prev), _c(mask), _c(grad).astype(act.dtype, copy=False))


def hidden_forward(act, c, h_prev, mask):
    return _impl.hidden_forward(_c(act), _c(c), _c(h_prev), _c(mask))


def hidden_backward(act, c, mask, grad):
    return _impl.hidden_backward(_c(act), _c(c), _c(mask), _c(grad).astype(act.dtype, copy=False))


def adam_update(p, g, m, v, lr, beta1, beta2, eps, bc1, bc2):
    """In-place Adam on contiguous arrays of one dtype."""
    _impl.adam_update(p.reshape(-1), g.reshape(-1), m.reshape(-1), v.reshape(-1), lr, beta1, beta2, eps, bc1, bc2)
