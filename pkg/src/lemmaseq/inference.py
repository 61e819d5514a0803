"""Decoding: beam search, UNK copy-through from attention, batch prediction."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .codec import CHAR, encode_input
from .conllu import Token, Treebank
from .model import Seq2SeqModel, pad_batch


@dataclass
class Hypothesis:
    output_ids: tuple = ()
    log_prob: float = 0.0
    attention: tuple = ()  # one weight vector per emitted symbol
    state: object = None


@dataclass
class LemmaPrediction:
    lemma: str
    score: float
    used_copy: bool = False
    failed: bool = False
    hypothesis: Hypothesis | None = field(default=None, repr=False, compare=False)


def max_output_length(form: str) -> int:
    return max(2 * len(form) + 8, 16)


class ModelDecoder:
    """Step interface over a trained model, as consumed by :func:`beam_search`.

    ``start`` returns a one-row state; ``advance`` scores the next symbol for
    every row; ``select`` reorders/duplicates rows.
    """

    def __init__(self, model: Seq2SeqModel):
        self.model = model
        v = model.output_vocab
        self.bos_id = v.bos_id
        self.eos_id = v.eos_id
        self._blocked = [v.pad_id, v.bos_id]

    def start(self, input_ids):
        with nn.no_grad():
            enc = self.model.encode(input_ids)
            return enc, self.model.initial_state(enc)

    def advance(self, state, prev_ids):
        enc, dstate = state
        with nn.no_grad():
            attn_h, weights, dstate = self.model.step(np.asarray(prev_ids, dtype=np.int64), dstate, enc)
            logits = self.model.logits(attn_h).data.astype(np.float64)
        z = logits - logits.max(axis=1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        logp[:, self._blocked] = -np.inf
        return logp, weights.data.astype(np.float64), (enc, dstate)

    def select(self, state, rows):
        enc, dstate = state
        return enc.select(rows), dstate.select(rows)


def _as_decoder(model):
    return ModelDecoder(model) if isinstance(model, Seq2SeqModel) else model


def beam_search(model, input_ids, beam_size: int = 5, max_len: int = 16) -> list[Hypothesis]:
    """Beam search without length normalization.

    At each step every live hypothesis is extended by every symbol; the best
    ``beam_size`` candidates survive, ranked by total log-probability with
    ties broken by the lexicographic order of output ids. Candidates ending
    in EOS are final. Search stops once ``beam_size`` hypotheses are final;
    at the last allowed step only EOS may be emitted.
    """
    if beam_size < 1 or max_len < 1:
        raise ValueError("beam_size and max_len must be >= 1")
    dec = _as_decoder(model)
    eos = dec.eos_id
    state = dec.start(input_ids)
    live = [Hypothesis()]
    finished: list[Hypothesis] = []
    for step in range(max_len):
        prev = [h.output_ids[-1] if h.output_ids else dec.bos_id for h in live]
        logp, attn, state = dec.advance(state, prev)
        last = step == max_len - 1
        cands = []
        for r, h in enumerate(live):
            row = logp[r]
            options = [eos] if last else np.flatnonzero(np.isfinite(row))
            for v in options:
                v = int(v)
                cands.append((h.log_prob + float(row[v]), h.output_ids + (v,), r))
        cands.sort(key=lambda c: (-c[0], c[1]))
        kept_rows, next_live = [], []
        for score, ids, r in cands[:beam_size]:
            hyp = Hypothesis(ids, score, live[r].attention + (attn[r],))
            if ids[-1] == eos:
                finished.append(hyp)
            else:
                next_live.append(hyp)
                kept_rows.append(r)
        if len(finished) >= beam_size or not next_live:
            break
        live = next_live
        state = dec.select(state, kept_rows)
    finished.sort(key=lambda h: (-h.log_prob, h.output_ids))
    return finished


def greedy_search(model, input_ids, max_len: int = 16) -> Hypothesis:
    dec = _as_decoder(model)
    state = dec.start(input_ids)
    hyp = Hypothesis()
    prev = dec.bos_id
    for step in range(max_len):
        logp, attn, state = dec.advance(state, [prev])
        row = logp[0]
        if step == max_len - 1:
            v = dec.eos_id
        else:
            best = np.max(row)
            v = int(np.flatnonzero(row == best)[0])
        hyp = Hypothesis(hyp.output_ids + (v,), hyp.log_prob + float(row[v]), hyp.attention + (attn[0],))
        if v == dec.eos_id:
            break
        prev = v
    return hyp


def replace_unks(hyp: Hypothesis, input_symbols, output_vocab) -> LemmaPrediction:
    """Decode a hypothesis, copying an input character for every UNK.

    The copied character is the input position with maximal attention at
    that step; if that position is a tag or special symbol, the best
    character position is used instead.
    """
    input_symbols = list(input_symbols)
    char_pos = np.array([i for i, s in enumerate(input_symbols) if s.kind == CHAR], dtype=np.int64)
    unk_id = output_vocab.unk_id
    eos_id = output_vocab.eos_id
    out, used_copy, failed = [], False, False
    for t, i in enumerate(hyp.output_ids):
        if i == eos_id:
            break
        if i != unk_id:
            sym = output_vocab.symbols[i]
            if sym.kind == CHAR:
                out.append(sym.text)
            continue
        used_copy = True
        if len(char_pos) == 0:
            failed = True
            continue
        weights = np.asarray(hyp.attention[t])[: len(input_symbols)]
        pos = int(np.argmax(weights))
        if input_symbols[pos].kind != CHAR:
            pos = int(char_pos[np.argmax(weights[char_pos])])
        out.append(input_symbols[pos].text)
    return LemmaPrediction("".join(out), hyp.log_prob, used_copy, failed, hyp)


def predict_input(model: Seq2SeqModel, input_symbols, beam_size: int | None = None, max_len: int | None = None):
    input_symbols = tuple(input_symbols)
    form = "".join(s.text for s in input_symbols if s.kind == CHAR)
    beam = beam_size or model.hyper.beam_size
    ids = model.input_vocab.ids_of(input_symbols)
    hyps = beam_search(model, ids, beam, max_len or max_output_length(form))
    return replace_unks(hyps[0], input_symbols, model.output_vocab)


def lemmatize_token(model: Seq2SeqModel, tok: Token, beam_size: int | None = None) -> LemmaPrediction:
    return predict_input(model, encode_input(tok.form, tok.upos, tok.xpos, tok.feats), beam_size)


def greedy_decode_batch(model: Seq2SeqModel, inputs, batch_size: int = 256) -> list[LemmaPrediction]:
    """Batched greedy decoding with UNK copying (used for dev selection)."""
    results = []
    v = model.output_vocab
    for start in range(0, len(inputs), batch_size):
        chunk = [tuple(x) for x in inputs[start : start + batch_size]]
        ids, lengths, _ = pad_batch([model.input_vocab.ids_of(x) for x in chunk], model.input_vocab.pad_id)
        limits = np.array([max_output_length("".join(s.text for s in x if s.kind == CHAR)) for x in chunk])
        B = len(chunk)
        out = [[] for _ in range(B)]
        atts = [[] for _ in range(B)]
        scores = np.zeros(B)
        done = np.zeros(B, dtype=bool)
        with nn.no_grad():
            enc = model.encode_batch(ids, lengths)
            state = model.initial_state(enc)
            prev = np.full(B, v.bos_id, dtype=np.int64)
            for step in range(int(limits.max())):
                attn_h, w, state = model.step(prev, state, enc)
                logits = model.logits(attn_h).data.astype(np.float64)
                z = logits - logits.max(axis=1, keepdims=True)
                logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
                logp[:, [v.pad_id, v.bos_id]] = -np.inf
                nxt = np.argmax(logp, axis=1)
                nxt[step == limits - 1] = v.eos_id  # same forced stop as greedy_search
                for b in np.flatnonzero(~done):
                    out[b].append(int(nxt[b]))
                    atts[b].append(w.data[b])
                    scores[b] += logp[b, nxt[b]]
                done |= nxt == v.eos_id
                if done.all():
                    break
                prev = nxt
        for b in range(B):
            results.append(replace_unks(Hypothesis(tuple(out[b]), float(scores[b]), tuple(atts[b])), chunk[b], v))
    return results


def attention_csv(pred: LemmaPrediction, input_symbols, output_vocab) -> str:
    """Rows = output steps, columns = input symbols."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    input_symbols = list(input_symbols)
    w.writerow(["output"] + [s.text for s in input_symbols])
    hyp = pred.hypothesis
    for i, weights in zip(hyp.output_ids, hyp.attention):
        sym = output_vocab.symbols[i]
        w.writerow([sym.text] + [f"{x:.6f}" for x in np.asarray(weights)[: len(input_symbols)]])
    return buf.getvalue()


@dataclass
class PredictStats:
    tokens: int = 0
    cache_hits: int = 0
    unique_keys: int = 0
    decodes: int = 0
    copies: int = 0
    failures: int = 0

    def as_line(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.__dict__.items())


def predict_treebank(
    model: Seq2SeqModel | None,
    tb: Treebank,
    cache=None,
    beam_size: int | None = None,
    workers: int = 1,
    on_prediction=None,
):
    """Fill the LEMMA column: cache lookup, then one decode per unique key.

    ``on_prediction(key, input_symbols, prediction)`` is called once per
    decoded key. Returns (treebank, PredictStats). Output order never
    depends on ``workers``.
    """
    stats = PredictStats()
    lemmas: dict = {}
    pending: dict = {}
    for tok in tb.tokens():
        stats.tokens += 1
        key = (tok.form, tok.upos, tok.xpos, tok.feats_str)
        if cache is not None:
            hit = cache.lookup(tok)
            if hit is not None:
                stats.cache_hits += 1
                lemmas[key] = hit
                continue
        if key not in lemmas and key not in pending:
            pending[key] = encode_input(tok.form, tok.upos, tok.xpos, tok.feats)
    stats.unique_keys = len(pending)
    if pending and model is None:
        raise ValueError(f"{len(pending)} tokens missed the cache and no model was given")
    keys = list(pending)

    def run(key):
        return predict_input(model, pending[key], beam_size)

    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            preds = list(pool.map(run, keys))
    else:
        preds = [run(k) for k in keys]
    for key, pred in zip(keys, preds):
        stats.decodes += 1
        stats.copies += pred.used_copy
        stats.failures += pred.failed
        lemmas[key] = pred.lemma
        if on_prediction is not None:
            on_prediction(key, pending[key], pred)
    sents = []
    for sent in tb.sentences:
        sents.append(sent.with_lemmas(lemmas[(t.form, t.upos, t.xpos, t.feats_str)] for t in sent.tokens))
    return Treebank(tuple(sents), tb.name), stats
