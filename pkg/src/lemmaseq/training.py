"""Minibatch training with Adam, LR decay and dev-based model selection."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .codec import build_vocabularies
from .inference import greedy_decode_batch
from .model import HyperParams, Seq2SeqModel, batch_size_for, pad_batch

log = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    dev_accuracy: float | None
    updates: int

    def as_line(self) -> str:
        dev = "na" if self.dev_accuracy is None else f"{self.dev_accuracy:.6f}"
        return f"epoch={self.epoch} lr={self.lr:.8g} loss={self.train_loss:.6f} dev_acc={dev} updates={self.updates}"


@dataclass
class TrainResult:
    model: Seq2SeqModel
    epochs: list = field(default_factory=list)
    best_epoch: int = 0
    batch_size: int = 0
    seconds: float = 0.0

    def log_lines(self) -> list[str]:
        return [r.as_line() for r in self.epochs]


def dev_accuracy(model: Seq2SeqModel, dev) -> float:
    """Token-level exact-match lemma accuracy on encoded examples."""
    if not dev:
        return 0.0
    preds = greedy_decode_batch(model, [ex.input for ex in dev])
    return sum(p.lemma == ex.lemma for p, ex in zip(preds, dev)) / len(dev)


def make_batches(model: Seq2SeqModel, examples):
    iv, ov = model.input_vocab, model.output_vocab
    in_ids, lengths, _ = pad_batch([iv.ids_of(ex.input) for ex in examples], iv.pad_id)
    out_ids, _, out_mask = pad_batch([ov.ids_of(ex.output) for ex in examples], ov.pad_id)
    return in_ids, lengths, out_ids, out_mask


def new_model(examples, hyper: HyperParams) -> Seq2SeqModel:
    in_vocab, out_vocab = build_vocabularies(examples, hyper.min_frequency)
    return Seq2SeqModel(hyper, in_vocab, out_vocab)


def train(model: Seq2SeqModel, examples, dev=(), hyper: HyperParams | None = None, n_sentences=None, on_epoch=None):
    """Train ``model`` in place and return a :class:`TrainResult`.

    Batch size comes from ``hyper.batch_size`` or, when unset, from the
    number of training sentences (``n_sentences``, default: examples).
    The parameters of the epoch with the best dev accuracy are restored at
    the end (earliest epoch on ties); without dev data the last epoch wins.
    """
    hyper = hyper or model.hyper
    examples = list(examples)
    dev = list(dev)
    if not examples:
        raise ValueError("no training examples")
    if not dev:
        log.warning("no dev examples; keeping the final epoch")
    bs = hyper.batch_size or batch_size_for(n_sentences if n_sentences is not None else len(examples))
    rng = np.random.default_rng(hyper.seed)
    drop_rng = np.random.default_rng([hyper.seed, 1])
    params = model.parameters()
    result = TrainResult(model, batch_size=bs)
    best_acc, best_snap = -1.0, None
    updates = 0
    t0 = time.perf_counter()
    for epoch in range(1, hyper.epochs + 1):
        lr = hyper.lr_at(epoch)
        order = rng.permutation(len(examples))
        total, count = 0.0, 0
        for start in range(0, len(order), bs):
            batch = [examples[i] for i in order[start : start + bs]]
            in_ids, lengths, out_ids, out_mask = make_batches(model, batch)
            loss = model.batch_loss(in_ids, lengths, out_ids, out_mask, training=True, rng=drop_rng)
            nn.backward(loss)
            nn.clip_grad_norm(params, hyper.max_grad_norm)
            nn.adam_step(params, lr)
            updates += 1
            total += float(loss.data) * len(batch)
            count += len(batch)
        acc = dev_accuracy(model, dev) if dev else None
        rec = EpochRecord(epoch, lr, total / count, acc, updates)
        result.epochs.append(rec)
        log.info(rec.as_line())
        if on_epoch is not None:
            on_epoch(rec)
        if acc is not None and acc > best_acc:
            best_acc, best_snap, result.best_epoch = acc, model.snapshot(), epoch
    if best_snap is not None:
        model.restore(best_snap)
    else:
        result.best_epoch = hyper.epochs
    result.seconds = time.perf_counter() - t0
    return result
