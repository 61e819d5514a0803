"""Attentional encoder-decoder over character+tag inputs.

Encoder: symbol embeddings, two bidirectional LSTM layers, forward/backward
states concatenated per position and projected to the hidden size.
Decoder: two unidirectional LSTM layers fed [previous output embedding;
previous attentional state] (input feeding), bilinear attention over the
projected annotations, and a softmax over output symbols.
"""

from __future__ import annotations

import io
import re
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import MODEL_FORMAT_VERSION
from . import nn
from .codec import Vocabulary

MAGIC = b"ULEM"
NEG_INF_SCORE = -1e9
_LSTM_BIAS = re.compile(r"^(enc|dec)\.l\d+(\.(fwd|bwd))?\.b$")


class ModelFormatError(ValueError):
    pass


@dataclass
class HyperParams:
    embedding_dim: int = 500
    hidden_dim: int = 500
    dropout: float = 0.3
    lr: float = 0.0005
    lr_decay: float = 0.9
    decay_start_epoch: int = 20
    epochs: int = 50
    batch_size: int | None = None  # None: derived from training sentence count
    beam_size: int = 5
    seed: int = 1
    min_frequency: int = 2
    max_grad_norm: float = 5.0
    init_scale: float = 0.1

    def __post_init__(self):
        if self.embedding_dim <= 0 or self.hidden_dim <= 0 or self.epochs <= 0 or self.beam_size <= 0:
            raise ValueError("sizes, epochs and beam size must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError(f"lr_decay must be in (0, 1], got {self.lr_decay}")
        if self.batch_size is not None and self.batch_size <= 0:
            raise ValueError("batch_size must be positive")

    def lr_at(self, epoch: int) -> float:
        """Learning rate for 1-based ``epoch``."""
        return self.lr * self.lr_decay ** max(0, epoch - self.decay_start_epoch)

    def to_lines(self) -> list[str]:
        return [f"{k}={'' if v is None else v}" for k, v in asdict(self).items()]

    @classmethod
    def from_mapping(cls, values: dict) -> "HyperParams":
        kinds = {f.name: f.type for f in fields(cls)}
        out = {}
        for key, raw in values.items():
            if key not in kinds:
                raise KeyError(f"unknown hyperparameter {key!r}")
            if raw is None or raw == "":
                out[key] = None
            elif "float" in kinds[key]:
                out[key] = float(raw)
            else:
                out[key] = int(raw)
        return cls(**out)


def batch_size_for(n_sentences: int) -> int:
    if n_sentences < 200:
        return 6
    if n_sentences < 2000:
        return 32
    return 64


@dataclass
class EncoderOutput:
    annotations: nn.Tensor  # (B, T, H)
    score_bias: np.ndarray  # (B, T): 0 on real positions, large negative on padding
    init_layers: list  # per decoder layer (h, c)
    lengths: np.ndarray

    def select(self, rows) -> "EncoderOutput":
        rows = np.asarray(rows)
        return EncoderOutput(
            nn.Tensor(self.annotations.data[rows]),
            self.score_bias[rows],
            [(nn.Tensor(h.data[rows]), nn.Tensor(c.data[rows])) for h, c in self.init_layers],
            self.lengths[rows],
        )


@dataclass
class DecoderState:
    layers: list  # per layer (h, c)
    feed: nn.Tensor  # previous attentional hidden state

    def select(self, rows) -> "DecoderState":
        rows = np.asarray(rows)
        return DecoderState(
            [(nn.Tensor(h.data[rows]), nn.Tensor(c.data[rows])) for h, c in self.layers],
            nn.Tensor(self.feed.data[rows]),
        )


def _lstm_shapes(prefix, d_in, hidden):
    return {f"{prefix}.Wx": (d_in, 4 * hidden), f"{prefix}.Wh": (hidden, 4 * hidden), f"{prefix}.b": (4 * hidden,)}


class Seq2SeqModel:
    n_layers = 2

    def __init__(self, hyper: HyperParams, input_vocab: Vocabulary, output_vocab: Vocabulary, params=None, dtype=np.float32):
        self.hyper = hyper
        self.input_vocab = input_vocab
        self.output_vocab = output_vocab
        shapes = self.param_shapes()
        if params is None:
            rng = np.random.default_rng(hyper.seed)
            params = {}
            for name, shape in shapes.items():
                p = nn.uniform_init(rng, shape, hyper.init_scale, dtype)
                if _LSTM_BIAS.match(name):
                    h = hyper.hidden_dim
                    p.data[h : 2 * h] = 1.0  # forget gate
                params[name] = p
        else:
            for name, shape in shapes.items():
                if name not in params:
                    raise ModelFormatError(f"missing parameter {name}")
                if tuple(params[name].shape) != shape:
                    raise ModelFormatError(f"parameter {name} has shape {params[name].shape}, expected {shape}")
        self.params = {name: params[name] for name in shapes}

    def param_shapes(self) -> dict:
        E, H = self.hyper.embedding_dim, self.hyper.hidden_dim
        s = {"enc.embed": (len(self.input_vocab), E)}
        for layer in range(self.n_layers):
            d_in = E if layer == 0 else 2 * H
            for direction in ("fwd", "bwd"):
                s.update(_lstm_shapes(f"enc.l{layer}.{direction}", d_in, H))
        s["enc.proj.W"] = (2 * H, H)
        s["enc.proj.b"] = (H,)
        for layer in range(self.n_layers):
            s[f"dec.init{layer}.Wh"] = (2 * H, H)
            s[f"dec.init{layer}.bh"] = (H,)
            s[f"dec.init{layer}.Wc"] = (2 * H, H)
            s[f"dec.init{layer}.bc"] = (H,)
        s["dec.embed"] = (len(self.output_vocab), E)
        for layer in range(self.n_layers):
            s.update(_lstm_shapes(f"dec.l{layer}", E + H if layer == 0 else H, H))
        s["dec.attn.W"] = (H, H)
        s["dec.feed.W"] = (2 * H, H)
        s["dec.gen.W"] = (H, len(self.output_vocab))
        s["dec.gen.b"] = (len(self.output_vocab),)
        return s

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def parameters(self):
        return list(self.params.values())

    def astype(self, dtype) -> "Seq2SeqModel":
        params = {k: nn.Parameter(v.data.astype(dtype)) for k, v in self.params.items()}
        return Seq2SeqModel(self.hyper, self.input_vocab, self.output_vocab, params)

    def copy(self) -> "Seq2SeqModel":
        return self.astype(self.dtype)

    def snapshot(self) -> dict:
        return {k: v.data.copy() for k, v in self.params.items()}

    def restore(self, snap: dict):
        for k, v in snap.items():
            self.params[k].data = v.copy()

    # ------------------------------------------------------------------ encoder

    def _zeros(self, *shape):
        return nn.Tensor(np.zeros(shape, dtype=self.dtype))

    def _run_lstm(self, x, prefix, mask, reverse):
        p = self.params
        T, B, D = x.shape
        H = self.hyper.hidden_dim
        xw = nn.reshape(nn.reshape(x, (T * B, D)) @ p[f"{prefix}.Wx"] + p[f"{prefix}.b"], (T, B, 4 * H))
        h, c = self._zeros(B, H), self._zeros(B, H)
        outs = [None] * T
        for t in (range(T - 1, -1, -1) if reverse else range(T)):
            act = nn.lstm_gates(xw[t] + h @ p[f"{prefix}.Wh"])
            c = nn.lstm_cell(act, c, mask[:, t])
            h = nn.lstm_hidden(act, c, h, mask[:, t])
            outs[t] = h
        return outs, h, c

    def encode_batch(self, ids, lengths, training=False, rng=None) -> EncoderOutput:
        ids = np.asarray(ids, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        if ids.ndim != 2 or ids.shape[1] == 0 or np.any(lengths <= 0):
            raise ValueError("encoder needs non-empty input sequences")
        B, T = ids.shape
        H = self.hyper.hidden_dim
        p = self.params
        mask = (np.arange(T)[None, :] < lengths[:, None]).astype(self.dtype)
        x = nn.embed(p["enc.embed"], ids.T)
        finals = []
        for layer in range(self.n_layers):
            outs_f, hf, cf = self._run_lstm(x, f"enc.l{layer}.fwd", mask, reverse=False)
            outs_b, hb, cb = self._run_lstm(x, f"enc.l{layer}.bwd", mask, reverse=True)
            x = nn.concat([nn.stack(outs_f), nn.stack(outs_b)], axis=-1)
            if layer < self.n_layers - 1:
                x = nn.dropout(x, self.hyper.dropout, rng, training)
            finals.append((hf, cf, hb, cb))
        ann = nn.reshape(x, (T * B, 2 * H)) @ p["enc.proj.W"] + p["enc.proj.b"]
        ann = nn.transpose(nn.reshape(ann, (T, B, H)), (1, 0, 2))
        init = []
        for layer, (hf, cf, hb, cb) in enumerate(finals):
            h0 = nn.tanh(nn.concat([hf, hb]) @ p[f"dec.init{layer}.Wh"] + p[f"dec.init{layer}.bh"])
            c0 = nn.concat([cf, cb]) @ p[f"dec.init{layer}.Wc"] + p[f"dec.init{layer}.bc"]
            init.append((h0, c0))
        bias = np.where(mask > 0, 0.0, NEG_INF_SCORE).astype(self.dtype)
        return EncoderOutput(ann, bias, init, lengths)

    def encode(self, input_ids) -> EncoderOutput:
        """Eval-mode encoding of one input sequence."""
        input_ids = list(input_ids)
        if not input_ids:
            raise ValueError("cannot encode an empty input")
        return self.encode_batch([input_ids], [len(input_ids)])

    # ------------------------------------------------------------------ decoder

    def attend(self, query, enc: EncoderOutput):
        """Bilinear attention of (B, H) decoder states over the annotations.

        Returns (context (B, H), weights (B, T)); weights on padding are 0.
        """
        B, T, H = enc.annotations.shape
        q = nn.reshape(query @ self.params["dec.attn.W"], (B, H, 1))
        scores = nn.reshape(nn.bmm(enc.annotations, q), (B, T)) + enc.score_bias
        weights = nn.softmax(scores, axis=-1)
        context = nn.reshape(nn.bmm(nn.reshape(weights, (B, 1, T)), enc.annotations), (B, H))
        return context, weights

    def initial_state(self, enc: EncoderOutput) -> DecoderState:
        B = enc.annotations.shape[0]
        return DecoderState(list(enc.init_layers), self._zeros(B, self.hyper.hidden_dim))

    def step(self, prev_ids, state: DecoderState, enc: EncoderOutput, training=False, rng=None):
        """One decoder step. Returns (attentional state, attention weights, new state)."""
        p = self.params
        x = nn.concat([nn.embed(p["dec.embed"], prev_ids), state.feed])
        layers = []
        for layer, (h, c) in enumerate(state.layers):
            pre = x @ p[f"dec.l{layer}.Wx"] + h @ p[f"dec.l{layer}.Wh"] + p[f"dec.l{layer}.b"]
            act = nn.lstm_gates(pre)
            c = nn.lstm_cell(act, c)
            h = nn.lstm_hidden(act, c, h)
            layers.append((h, c))
            x = nn.dropout(h, self.hyper.dropout, rng, training) if layer < len(state.layers) - 1 else h
        context, weights = self.attend(x, enc)
        attn_h = nn.tanh(nn.concat([context, x]) @ p["dec.feed.W"])
        return attn_h, weights, DecoderState(layers, attn_h)

    def logits(self, attn_h, training=False, rng=None):
        out = nn.dropout(attn_h, self.hyper.dropout, rng, training)
        return out @ self.params["dec.gen.W"] + self.params["dec.gen.b"]

    # --------------------------------------------------------------- training

    def batch_loss(self, in_ids, in_lengths, out_ids, out_mask, training=False, rng=None):
        """Mean teacher-forced cross-entropy per target symbol."""
        out_ids = np.asarray(out_ids, dtype=np.int64)
        out_mask = np.asarray(out_mask, dtype=self.dtype)
        enc = self.encode_batch(in_ids, in_lengths, training, rng)
        state = self.initial_state(enc)
        B, T_out = out_ids.shape
        prev = np.full(B, self.output_vocab.bos_id, dtype=np.int64)
        states = []
        for t in range(T_out):
            attn_h, _, state = self.step(prev, state, enc, training, rng)
            states.append(attn_h)
            prev = out_ids[:, t]
        flat = nn.reshape(nn.stack(states), (T_out * B, self.hyper.hidden_dim))
        logits = self.logits(flat, training, rng)
        n_tokens = max(float(out_mask.sum()), 1.0)
        loss = nn.cross_entropy(logits, out_ids.T.reshape(-1), out_mask.T.reshape(-1), reduction="sum")
        return loss * (1.0 / n_tokens)


def pad_batch(seqs, pad_id: int):
    """Right-pad integer sequences; returns (ids (B, T), lengths, mask)."""
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    T = int(lengths.max()) if len(seqs) else 0
    ids = np.full((len(seqs), T), pad_id, dtype=np.int64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
    mask = (np.arange(T)[None, :] < lengths[:, None]).astype(np.float32)
    return ids, lengths, mask


# -------------------------------------------------------------- serialization


def _write_blob(buf, data: bytes):
    buf.write(struct.pack("<I", len(data)))
    buf.write(data)


def _read_exact(buf, n):
    data = buf.read(n)
    if len(data) != n:
        raise ModelFormatError("truncated model file")
    return data


def _read_blob(buf) -> bytes:
    (n,) = struct.unpack("<I", _read_exact(buf, 4))
    return _read_exact(buf, n)


def model_to_bytes(model: Seq2SeqModel) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", MODEL_FORMAT_VERSION))
    header = model.hyper.to_lines() + ["init=uniform", f"param_count={len(model.params)}"]
    _write_blob(buf, "\n".join(header).encode("utf-8"))
    _write_blob(buf, "\n".join(model.input_vocab.to_lines()).encode("utf-8"))
    _write_blob(buf, "\n".join(model.output_vocab.to_lines()).encode("utf-8"))
    buf.write(struct.pack("<I", len(model.params)))
    for name, p in model.params.items():
        _write_blob(buf, name.encode("utf-8"))
        arr = np.ascontiguousarray(p.data, dtype="<f4")
        buf.write(struct.pack("<I", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(arr.tobytes())
    return buf.getvalue()


def model_from_bytes(data: bytes) -> Seq2SeqModel:
    buf = io.BytesIO(data)
    if _read_exact(buf, 4) != MAGIC:
        raise ModelFormatError("not a lemmatizer model file (bad magic)")
    (version,) = struct.unpack("<I", _read_exact(buf, 4))
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"model format version {version} unsupported (expected {MODEL_FORMAT_VERSION})")
    header = dict(
        line.split("=", 1) for line in _read_blob(buf).decode("utf-8").splitlines() if line
    )
    header.pop("init", None)
    header.pop("param_count", None)
    hyper = HyperParams.from_mapping(header)
    in_vocab = Vocabulary.from_lines(_read_blob(buf).decode("utf-8").splitlines(), hyper.min_frequency)
    out_vocab = Vocabulary.from_lines(_read_blob(buf).decode("utf-8").splitlines(), hyper.min_frequency)
    (count,) = struct.unpack("<I", _read_exact(buf, 4))
    params = {}
    for _ in range(count):
        name = _read_blob(buf).decode("utf-8")
        (ndim,) = struct.unpack("<I", _read_exact(buf, 4))
        shape = struct.unpack(f"<{ndim}I", _read_exact(buf, 4 * ndim))
        n = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(_read_exact(buf, 4 * n), dtype="<f4").astype(np.float32).reshape(shape)
        params[name] = nn.Parameter(arr)
    if buf.read(1):
        raise ModelFormatError("trailing bytes after parameter blocks")
    return Seq2SeqModel(hyper, in_vocab, out_vocab, params)


def save_model(model: Seq2SeqModel, sink):
    data = model_to_bytes(model)
    if hasattr(sink, "write"):
        sink.write(data)
    else:
        Path(sink).write_bytes(data)


def load_model(source) -> Seq2SeqModel:
    data = source.read() if hasattr(source, "read") else Path(source).read_bytes()
    return model_from_bytes(data)
