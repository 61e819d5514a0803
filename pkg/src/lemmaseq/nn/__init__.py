"""Small numpy autodiff kernel used by the lemmatizer network."""

from . import kernels
from .optim import Parameter, adam_step, clip_grad_norm, grad_norm, uniform_init
from .tensor import (
    ShapeError,
    Tensor,
    add,
    backward,
    bmm,
    concat,
    cross_entropy,
    dropout,
    embed,
    exp,
    getitem,
    is_grad_enabled,
    log,
    log_softmax,
    lstm_cell,
    lstm_gates,
    lstm_hidden,
    matmul,
    mean_all,
    mul,
    no_grad,
    reshape,
    sigmoid,
    softmax,
    stack,
    sub,
    sum_all,
    tanh,
    transpose,
)
