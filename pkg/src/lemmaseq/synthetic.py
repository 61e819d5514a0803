"""Deterministic toy agglutinative language for desk-scale experiments.

Stems inflect through one of eight suffix paradigms. A stem-final k/t/p
voices to g/d/b before a vowel-initial suffix (g/d/b never end a bare
stem, so the alternation is reversible). The lemma is the stem plus the
paradigm's citation suffix, and XPOS names the paradigm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conllu import Treebank, treebank_from_tokens
from .lexicon import FrequencyList, LexiconEntry

CONSONANTS = "ptkmnlrsvh"
VOWELS = "aeiou"
VOICING = {"k": "g", "t": "d", "p": "b"}
CASES = ("Nom", "Gen", "Par", "Ine", "Ela", "All")
NUMBERS = ("Sing", "Plur")
TENSES = ("Pres", "Past")
PERSONS = ("1", "2", "3")


@dataclass(frozen=True)
class LexType:
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: tuple

    def row(self):
        return (self.form, self.lemma, self.upos, self.xpos, self.feats)


def attach(stem: str, suffix: str) -> str:
    if suffix and suffix[0] in VOWELS and stem[-1] in VOICING:
        return stem[:-1] + VOICING[stem[-1]] + suffix
    return stem + suffix


def _cells(nominal: bool):
    if nominal:
        return [(("Case", c), ("Number", n)) for n in NUMBERS for c in CASES]
    return [(("Number", n), ("Person", p), ("Tense", t)) for t in TENSES for n in NUMBERS for p in PERSONS]


class ToyLanguage:
    """Paradigm tables for ``n_stems`` stems over ``n_paradigms`` classes."""

    def __init__(self, n_stems: int = 40, n_paradigms: int = 8, seed: int = 7, extra_stems: int = 40):
        rng = np.random.default_rng(seed)
        self.paradigms = []
        for p in range(n_paradigms):
            nominal = p < (n_paradigms * 5) // 8
            cells = _cells(nominal)
            suffixes = set()
            while len(suffixes) < len(cells):
                suffixes.add(self._suffix(rng))
            suffixes = sorted(suffixes)
            rng.shuffle(suffixes)
            # the first cell (Nom.Sing / Pres.Sing.1) doubles as citation form
            table = dict(zip(cells, suffixes))
            self.paradigms.append(("NOUN" if nominal else "VERB", f"P{p + 1}", table, suffixes[0]))
        stems = self._stems(rng, n_stems + extra_stems)
        self.stems = stems[:n_stems]
        self.extra_stems = stems[n_stems:]
        self.n_paradigms = n_paradigms

    @staticmethod
    def _suffix(rng) -> str:
        n = int(rng.integers(1, 4))
        start_vowel = bool(rng.integers(0, 2))
        out = []
        for i in range(n):
            vowel = (i % 2 == 0) == start_vowel
            out.append(str(rng.choice(list(VOWELS if vowel else "lnstmr"))))
        return "".join(out)

    @staticmethod
    def _stems(rng, n):
        finals = list("ktpmnlrs") + list(VOWELS)
        seen, out = set(), []
        while len(out) < n:
            length = int(rng.integers(2, 4))
            body = "".join(
                str(rng.choice(list(CONSONANTS))) + str(rng.choice(list(VOWELS))) for _ in range(length)
            )
            stem = body[:-1] + str(rng.choice(finals))
            if stem not in seen:
                seen.add(stem)
                out.append(stem)
        return out

    def table(self, stem_index: int, stems=None) -> list[LexType]:
        stems = self.stems if stems is None else stems
        stem = stems[stem_index]
        upos, xpos, cells, cite = self.paradigms[stem_index % self.n_paradigms]
        lemma = attach(stem, cite)
        return [LexType(attach(stem, suf), lemma, upos, xpos, feats) for feats, suf in cells.items()]

    def all_types(self, include_extra: bool = False) -> list[LexType]:
        out = [t for i in range(len(self.stems)) for t in self.table(i)]
        if include_extra:
            out += [t for i in range(len(self.extra_stems)) for t in self.table(i, self.extra_stems)]
        keys = [(t.form, t.upos, t.xpos, t.feats) for t in out]
        if len(set(keys)) != len(keys):
            raise RuntimeError("toy language produced colliding (form, tags) keys; change the seed")
        return out


@dataclass
class ToySplit:
    train: Treebank
    dev: Treebank
    test: Treebank
    train_types: set
    lexicon: list
    frequencies: FrequencyList
    language: ToyLanguage


def _sample(rng, types, n, cover=True):
    weights = 1.0 / (1.0 + rng.permutation(len(types)))
    weights /= weights.sum()
    picks = list(range(len(types))) if cover else []
    picks += list(rng.choice(len(types), size=n - len(picks), p=weights))
    rng.shuffle(picks)
    return [types[i].row() for i in picks]


def make_split(
    seed: int = 7,
    n_train: int = 2000,
    n_test: int = 500,
    n_dev: int = 200,
    sentence_size: int = 8,
    heldout_cells: int = 3,
    dev_cells: int = 2,
) -> ToySplit:
    """Train/dev/test treebanks plus a full-table lexicon and frequency list.

    Per stem, ``heldout_cells`` paradigm cells appear only in test and
    ``dev_cells`` only in dev; half of the test tokens come from those
    held-out cells and half from training types.
    """
    lang = ToyLanguage(seed=seed)
    rng = np.random.default_rng(seed + 1)
    train_types, dev_types, test_types = [], [], []
    for i in range(len(lang.stems)):
        table = lang.table(i)
        order = rng.permutation(len(table))
        test_types += [table[j] for j in order[:heldout_cells]]
        dev_types += [table[j] for j in order[heldout_cells : heldout_cells + dev_cells]]
        train_types += [table[j] for j in order[heldout_cells + dev_cells :]]
    train_rows = _sample(rng, train_types, n_train)
    half = n_test // 2
    test_rows = _sample(rng, train_types, half, cover=False) + _sample(rng, test_types, n_test - half, cover=False)
    rng.shuffle(test_rows)
    dhalf = n_dev // 2
    dev_rows = _sample(rng, train_types, dhalf, cover=False) + _sample(rng, dev_types, n_dev - dhalf, cover=False)
    rng.shuffle(dev_rows)
    every = lang.all_types(include_extra=True)
    lexicon = [LexiconEntry(t.form, t.lemma, t.upos, t.xpos, t.feats) for t in every]
    counts = np.floor(20000.0 / (1.0 + rng.permutation(len(every)))).astype(int) + 1
    freq = FrequencyList({t.form: int(c) for t, c in zip(every, counts)})
    return ToySplit(
        train=treebank_from_tokens(train_rows, "toy-train", sentence_size),
        dev=treebank_from_tokens(dev_rows, "toy-dev", sentence_size),
        test=treebank_from_tokens(test_rows, "toy-test", sentence_size),
        train_types={(t.form, t.upos, t.xpos, t.feats) for t in train_types},
        lexicon=lexicon,
        frequencies=freq,
        language=lang,
    )


def shrink(tb: Treebank, n_tokens: int, seed: int, sentence_size: int = 8) -> Treebank:
    """First ``n_tokens`` tokens of a seeded token shuffle, repacked."""
    toks = list(tb.tokens())
    order = np.random.default_rng(seed).permutation(len(toks))[:n_tokens]
    rows = [(toks[i].form, toks[i].lemma, toks[i].upos, toks[i].xpos, toks[i].feats) for i in sorted(order)]
    return treebank_from_tokens(rows, tb.name + f"-{n_tokens}", sentence_size)


def type_key(tok) -> tuple:
    return (tok.form, tok.upos, tok.xpos, tok.feats)

