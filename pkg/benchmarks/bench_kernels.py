"""Time the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N] [--train-epochs N]

Prints one ``metric=value`` line per (case, backend) and the speedup.
"""

import argparse
import logging
import time

import numpy as np

from lemmaseq.nn import kernels


def _time(fn, repeat):
    fn()  # warm up
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_cases(batch=64, hidden=200, dtype=np.float32):
    rng = np.random.default_rng(0)
    pre = rng.standard_normal((batch, 4 * hidden)).astype(dtype)
    c_prev = rng.standard_normal((batch, hidden)).astype(dtype)
    h_prev = rng.standard_normal((batch, hidden)).astype(dtype)
    mask = (rng.random(batch) < 0.9).astype(dtype)
    grad4 = rng.standard_normal((batch, 4 * hidden)).astype(dtype)
    grad = rng.standard_normal((batch, hidden)).astype(dtype)
    act = kernels.gates_forward(pre)
    c = kernels.cell_forward(act, c_prev, mask)
    n = 1_000_000
    p, g = rng.standard_normal(n).astype(dtype), rng.standard_normal(n).astype(dtype)
    m, v = np.zeros(n, dtype), np.zeros(n, dtype)

    def lstm_step():
        a = kernels.gates_forward(pre)
        cc = kernels.cell_forward(a, c_prev, mask)
        kernels.hidden_forward(a, cc, h_prev, mask)
        kernels.hidden_backward(a, cc, mask, grad)
        kernels.cell_backward(a, c_prev, mask, grad)
        kernels.gates_backward(a, grad4)

    return {
        "gates_forward": lambda: kernels.gates_forward(pre),
        "cell_forward": lambda: kernels.cell_forward(act, c_prev, mask),
        "hidden_backward": lambda: kernels.hidden_backward(act, c, mask, grad),
        "lstm_step_fwd_bwd": lstm_step,
        "adam_1M": lambda: kernels.adam_update(p, g, m, v, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001),
    }


def train_case(epochs):
    from lemmaseq.codec import encode_example
    from lemmaseq.model import HyperParams
    from lemmaseq.synthetic import make_split
    from lemmaseq.training import new_model, train

    sp = make_split()
    examples = [encode_example(t) for t in sp.train.tokens()][:400]
    hyper = HyperParams(embedding_dim=32, hidden_dim=64, epochs=epochs, lr=0.005, batch_size=32)

    def run():
        train(new_model(examples, hyper), examples, [], hyper)

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--train-epochs", type=int, default=1, help="0 skips the training case")
    args = ap.parse_args()
    logging.getLogger("lemmaseq").setLevel(logging.ERROR)
    backends = kernels.available_backends()
    print(f"backends={','.join(backends)}")
    cases = list(kernel_cases().items())
    if args.train_epochs:
        cases.append(("train_400ex", train_case(args.train_epochs)))
    previous = kernels.BACKEND
    try:
        for name, fn in cases:
            times = {}
            repeat = 3 if name.startswith("train") else args.repeat
            for b in backends:
                kernels.use_backend(b)
                times[b] = _time(fn, repeat)
                print(f"case={name} backend={b} seconds={times[b]:.6f}")
            if "compiled" in times:
                print(f"case={name} speedup={times['python'] / times['compiled']:.2f}")
    finally:
        kernels.use_backend(previous)


if __name__ == "__main__":
    main()
