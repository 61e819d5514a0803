"""Pure numpy LSTM pointwise kernels and Adam update (fallback for the compiled extension).

Gate layout along the last axis is [input, forget, candidate, output], each
of width H. Masks are per-row 0/1 floats.
"""

import numpy as np


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gates_forward(pre):
    h = pre.shape[1] // 4
    act = np.empty_like(pre)
    act[:, : 2 * h] = _sigmoid(pre[:, : 2 * h])
    act[:, 2 * h : 3 * h] = np.tanh(pre[:, 2 * h : 3 * h])
    act[:, 3 * h :] = _sigmoid(pre[:, 3 * h :])
    return act


def gates_backward(act, grad):
    h = act.shape[1] // 4
    d = grad * act * (1.0 - act)
    cand = act[:, 2 * h : 3 * h]
    d[:, 2 * h : 3 * h] = grad[:, 2 * h : 3 * h] * (1.0 - cand * cand)
    return d


def cell_forward(act, c_prev, mask):
    h = act.shape[1] // 4
    c = act[:, h : 2 * h] * c_prev + act[:, :h] * act[:, 2 * h : 3 * h]
    return np.where(mask[:, None] != 0, c, c_prev)


def cell_backward(act, c_prev, mask, grad):
    h = act.shape[1] // 4
    m = mask[:, None]
    gm = grad * m
    d_act = np.zeros_like(act)
    d_act[:, :h] = gm * act[:, 2 * h : 3 * h]
    d_act[:, h : 2 * h] = gm * c_prev
    d_act[:, 2 * h : 3 * h] = gm * act[:, :h]
    d_prev = gm * act[:, h : 2 * h] + grad * (1.0 - m)
    return d_act, d_prev


def hidden_forward(act, c, h_prev, mask):
    h = act.shape[1] // 4
    out = act[:, 3 * h :] * np.tanh(c)
    return np.where(mask[:, None] != 0, out, h_prev)


def hidden_backward(act, c, mask, grad):
    h = act.shape[1] // 4
    m = mask[:, None]
    gm = grad * m
    tc = np.tanh(c)
    d_act = np.zeros_like(act)
    d_act[:, 3 * h :] = gm * tc
    d_c = gm * act[:, 3 * h :] * (1.0 - tc * tc)
    d_prev = grad * (1.0 - m)
    return d_act, d_c, d_prev


def adam_update(p, g, m, v, lr, beta1, beta2, eps, bc1, bc2):
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    p -= (lr / bc1) * m / (np.sqrt(v / bc2) + eps)
