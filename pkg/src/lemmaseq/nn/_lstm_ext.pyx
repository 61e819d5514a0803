# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM pointwise kernels and the fused Adam update.

Same contracts as ``_lstm_py``: gate layout [input, forget, candidate,
output] along axis 1, per-row 0/1 masks. One fused pass per call instead of
several numpy temporaries.
"""

import numpy as np
cimport numpy as cnp
from cython cimport floating
from libc.math cimport exp, expf, fmax, fmaxf, fmin, fminf, sqrt, sqrtf, tanh, tanhf

cnp.import_array()


# single-precision libm calls for float32 buffers
cdef inline floating _exp(floating x) noexcept nogil:
    if floating is float:
        return expf(x)
    else:
        return exp(x)


cdef inline floating _tanh(floating x) noexcept nogil:
    if floating is float:
        return tanhf(x)
    else:
        return tanh(x)


cdef inline floating _sqrt(floating x) noexcept nogil:
    if floating is float:
        return sqrtf(x)
    else:
        return sqrt(x)


cdef inline floating _clip(floating x) noexcept nogil:
    # keeps exp finite, so the branch-free sigmoid is safe under -ffast-math
    if floating is float:
        return fminf(fmaxf(x, -80.0), 80.0)
    else:
        return fmin(fmax(x, -700.0), 700.0)


# Branch-free row loops; with -ffast-math gcc maps them onto libmvec.
cdef void _sig_row(const floating* src, floating* dst, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n):
        dst[j] = 1 / (1 + _exp(-_clip(src[j])))


cdef void _tanh_row(const floating* src, floating* dst, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n):
        dst[j] = _tanh(src[j])


def gates_forward(floating[:, ::1] pre):
    cdef Py_ssize_t n = pre.shape[0], w = pre.shape[1], h = w // 4
    cdef Py_ssize_t b
    out = np.empty_like(np.asarray(pre))
    cdef floating[:, ::1] act = out
    if n == 0 or h == 0:
        return out
    with nogil:
        for b in range(n):
            _sig_row(&pre[b, 0], &act[b, 0], 2 * h)
            _tanh_row(&pre[b, 2 * h], &act[b, 2 * h], h)
            _sig_row(&pre[b, 3 * h], &act[b, 3 * h], h)
    return out


def gates_backward(floating[:, ::1] act, floating[:, ::1] grad):
    cdef Py_ssize_t n = act.shape[0], w = act.shape[1], h = w // 4
    cdef Py_ssize_t b, j
    cdef floating a
    out = np.empty_like(np.asarray(act))
    cdef floating[:, ::1] d = out
    with nogil:
        for b in range(n):
            for j in range(2 * h):
                a = act[b, j]
                d[b, j] = grad[b, j] * a * (1 - a)
            for j in range(2 * h, 3 * h):
                a = act[b, j]
                d[b, j] = grad[b, j] * (1 - a * a)
            for j in range(3 * h, w):
                a = act[b, j]
                d[b, j] = grad[b, j] * a * (1 - a)
    return out


def cell_forward(floating[:, ::1] act, floating[:, ::1] c_prev, floating[::1] mask):
    cdef Py_ssize_t n = act.shape[0], h = act.shape[1] // 4
    cdef Py_ssize_t b, j
    cdef floating m, cp
    out = np.empty_like(np.asarray(c_prev))
    cdef floating[:, ::1] c = out
    with nogil:
        for b in range(n):
            m = mask[b]
            for j in range(h):
                cp = c_prev[b, j]
                if m != 0:
                    c[b, j] = act[b, h + j] * cp + act[b, j] * act[b, 2 * h + j]
                else:
                    c[b, j] = cp
    return out


def cell_backward(floating[:, ::1] act, floating[:, ::1] c_prev, floating[::1] mask, floating[:, ::1] grad):
    cdef Py_ssize_t n = act.shape[0], h = act.shape[1] // 4
    cdef Py_ssize_t b, j
    cdef floating m, g
    d_act_arr = np.zeros_like(np.asarray(act))
    d_prev_arr = np.empty_like(np.asarray(c_prev))
    cdef floating[:, ::1] d_act = d_act_arr
    cdef floating[:, ::1] d_prev = d_prev_arr
    with nogil:
        for b in range(n):
            m = mask[b]
            for j in range(h):
                g = grad[b, j]
                if m != 0:
                    d_act[b, j] = g * act[b, 2 * h + j]
                    d_act[b, h + j] = g * c_prev[b, j]
                    d_act[b, 2 * h + j] = g * act[b, j]
                    d_prev[b, j] = g * act[b, h + j]
                else:
                    d_prev[b, j] = g
    return d_act_arr, d_prev_arr


def hidden_forward(floating[:, ::1] act, floating[:, ::1] c, floating[:, ::1] h_prev, floating[::1] mask):
    cdef Py_ssize_t n = act.shape[0], h = act.shape[1] // 4
    cdef Py_ssize_t b, j
    out = np.empty_like(np.asarray(h_prev))
    cdef floating[:, ::1] hid = out
    if n == 0 or h == 0:
        return out
    with nogil:
        for b in range(n):
            if mask[b] != 0:
                _tanh_row(&c[b, 0], &hid[b, 0], h)
                for j in range(h):
                    hid[b, j] = act[b, 3 * h + j] * hid[b, j]
            else:
                for j in range(h):
                    hid[b, j] = h_prev[b, j]
    return out


def hidden_backward(floating[:, ::1] act, floating[:, ::1] c, floating[::1] mask, floating[:, ::1] grad):
    cdef Py_ssize_t n = act.shape[0], h = act.shape[1] // 4
    cdef Py_ssize_t b, j
    cdef floating tc
    d_act_arr = np.zeros_like(np.asarray(act))
    d_c_arr = np.zeros_like(np.asarray(c))
    d_prev_arr = np.zeros_like(np.asarray(c))
    cdef floating[:, ::1] d_act = d_act_arr
    cdef floating[:, ::1] d_c = d_c_arr
    cdef floating[:, ::1] d_prev = d_prev_arr
    if n == 0 or h == 0:
        return d_act_arr, d_c_arr, d_prev_arr
    with nogil:
        for b in range(n):
            if mask[b] != 0:
                _tanh_row(&c[b, 0], &d_act[b, 3 * h], h)  # tanh(c) parked in the output-gate slot
                for j in range(h):
                    tc = d_act[b, 3 * h + j]
                    d_c[b, j] = grad[b, j] * act[b, 3 * h + j] * (1 - tc * tc)
                    d_act[b, 3 * h + j] = grad[b, j] * tc
            else:
                for j in range(h):
                    d_prev[b, j] = grad[b, j]
    return d_act_arr, d_c_arr, d_prev_arr


def adam_update(floating[::1] p, floating[::1] g, floating[::1] m, floating[::1] v,
                double lr, double beta1, double beta2, double eps, double bc1, double bc2):
    """In-place Adam on flat arrays; ``bc1``/``bc2`` are the bias corrections."""
    cdef Py_ssize_t i, n = p.shape[0]
    cdef floating b1 = beta1, b2 = beta2, e = eps, gi
    cdef floating step = lr / bc1, inv_bc2 = 1.0 / bc2
    with nogil:
        for i in range(n):
            gi = g[i]
            m[i] = b1 * m[i] + (1 - b1) * gi
            v[i] = b2 * v[i] + (1 - b2) * gi * gi
            p[i] -= step * m[i] / (_sqrt(v[i] * inv_bc2) + e)
