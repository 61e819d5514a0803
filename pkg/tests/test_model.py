import io
import struct

import numpy as np
import pytest

from lemmaseq import nn
from lemmaseq.codec import encode_input, example_from_entry
from lemmaseq.model import (
    HyperParams,
    ModelFormatError,
    Seq2SeqModel,
    batch_size_for,
    load_model,
    model_from_bytes,
    model_to_bytes,
    pad_batch,
    save_model,
)
from lemmaseq.training import make_batches, new_model

EXAMPLES = [
    example_from_entry("abca", "abc", "N", "X", (("Case", "Nom"),)),
    example_from_entry("bcabba", "bca", "V", None, ()),
]


def small(**kw):
    hp = dict(embedding_dim=5, hidden_dim=6, min_frequency=1, seed=3)
    hp.update(kw)
    return new_model(EXAMPLES, HyperParams(**hp))


def test_hyperparams_defaults_and_validation():
    hp = HyperParams()
    assert (hp.embedding_dim, hp.hidden_dim, hp.dropout, hp.lr, hp.epochs, hp.beam_size) == (500, 500, 0.3, 0.0005, 50, 5)
    for bad in (dict(hidden_dim=0), dict(dropout=1.0), dict(lr_decay=0.0), dict(lr_decay=1.5), dict(batch_size=0)):
        with pytest.raises(ValueError):
            HyperParams(**bad)
    assert HyperParams.from_mapping(dict(x.split("=") for x in hp.to_lines())) == hp


def test_lr_schedule():
    hp = HyperParams()
    assert hp.lr_at(20) == 0.0005
    assert hp.lr_at(21) == pytest.approx(0.0005 * 0.9)
    assert hp.lr_at(23) == pytest.approx(0.0005 * 0.9**3)


@pytest.mark.parametrize("n, size", [(150, 6), (199, 6), (200, 32), (1999, 32), (2000, 64), (50000, 64)])
def test_batch_size_schedule(n, size):
    assert batch_size_for(n) == size


def test_shapes_and_forget_bias():
    m = small()
    for name, shape in m.param_shapes().items():
        assert m.params[name].shape == shape
    H = m.hyper.hidden_dim
    for name in ("enc.l0.fwd.b", "enc.l1.bwd.b", "dec.l0.b", "dec.l1.b"):
        b = m.params[name].data
        assert np.all(b[H : 2 * H] == 1.0)
        assert np.all(np.abs(b[:H]) <= 0.1)


def test_encode_lengths_and_zero_fixed_point():
    m = small()
    ids = m.input_vocab.ids_of(encode_input("Růžičkalla", "PROPN", "N", (("Case", "Ade"), ("Number", "Sing"))))
    assert len(ids) == 14
    assert m.encode(ids).annotations.shape[:2] == (1, 14)
    assert m.encode(ids[:1]).annotations.shape[:2] == (1, 1)
    with pytest.raises(ValueError):
        m.encode([])
    for p in m.parameters():
        p.data[...] = 0.0
    assert np.all(m.encode(ids).annotations.data == 0.0)


def test_attention_hand_case():
    m = small(hidden_dim=2)
    m.params["dec.attn.W"].data[...] = np.eye(2)
    enc = m.encode(m.input_vocab.ids_of(encode_input("ab")))
    enc.annotations.data[...] = np.array([[[np.log(3.0), 0.0], [0.0, 0.0], [0.0, 0.0]]], dtype=enc.annotations.dtype)[:, : enc.annotations.shape[1]]
    enc.score_bias[...] = 0.0
    enc.score_bias[0, 2:] = -1e9
    ctx, w = m.attend(nn.Tensor(np.array([[1.0, 0.0]], dtype=np.float32)), enc)
    assert np.allclose(w.data[0, :2], [0.75, 0.25], atol=1e-6)
    assert np.allclose(ctx.data[0], 0.75 * enc.annotations.data[0, 0], atol=1e-6)


def test_attention_is_distribution_over_real_positions():
    m = small()
    seqs = [m.input_vocab.ids_of(encode_input(f, "N")) for f in ("a", "abcab")]
    ids, lengths, _ = pad_batch(seqs, m.input_vocab.pad_id)
    enc = m.encode_batch(ids, lengths)
    state = m.initial_state(enc)
    _, w, _ = m.step(np.array([m.output_vocab.bos_id] * 2), state, enc)
    assert np.allclose(w.data.sum(axis=1), 1.0, atol=1e-6)
    assert np.all(w.data[0, lengths[0] :] == 0.0)


def test_eval_mode_is_deterministic():
    m = small()
    batch = make_batches(m, EXAMPLES)
    with nn.no_grad():
        a = m.batch_loss(*batch).data
        b = m.batch_loss(*batch).data
    assert a == b


def test_padding_does_not_change_loss():
    m = small().astype(np.float64)
    alone = make_batches(m, EXAMPLES[:1])
    both = make_batches(m, EXAMPLES)
    with nn.no_grad():
        l1 = float(m.batch_loss(*alone).data)
        lb = float(m.batch_loss(*both).data)
        l2 = float(m.batch_loss(*make_batches(m, EXAMPLES[1:])).data)
    n1, n2 = len(EXAMPLES[0].output), len(EXAMPLES[1].output)
    assert lb == pytest.approx((l1 * n1 + l2 * n2) / (n1 + n2), rel=1e-9)


def test_serialization_round_trip_is_bit_exact(tmp_path):
    m = small()
    data = model_to_bytes(m)
    assert data[:4] == b"ULEM" and struct.unpack("<I", data[4:8])[0] == 1
    back = model_from_bytes(data)
    assert model_to_bytes(back) == data
    for k in m.params:
        assert back.params[k].data.tobytes() == m.params[k].data.tobytes()
    save_model(m, tmp_path / "m.bin")
    assert load_model(tmp_path / "m.bin").hyper == m.hyper
    buf = io.BytesIO()
    save_model(m, buf)
    assert buf.getvalue() == data


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: b"XLEM" + d[4:], "magic"),
        (lambda d: d[:4] + struct.pack("<I", 99) + d[8:], "version"),
        (lambda d: d[: len(d) // 2], "truncated|unexpected end"),
        (lambda d: d + b"\0", "trailing"),
    ],
)
def test_corrupt_files_are_rejected(mutate, match):
    with pytest.raises(ModelFormatError, match=match):
        model_from_bytes(mutate(model_to_bytes(small())))


def test_missing_parameter_is_rejected():
    m = small()
    params = dict(m.params)
    params.pop("dec.gen.b")
    with pytest.raises(ModelFormatError):
        Seq2SeqModel(m.hyper, m.input_vocab, m.output_vocab, params)
