"""Symbol sequences for the lemmatizer network.

An input is the word's characters followed by its tag symbols
("UPOS=NOUN", "XPOS=NNS", one "Cat=Val" per feature); an output is the
lemma's characters followed by EOS.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .conllu import Token

CHAR = "char"
TAG = "tag"
SPECIAL = "special"

GOLD = "gold"
AUTOENCODER = "autoencoder"
TRANSDUCER = "transducer"
WEIGHT_GROUPS = (GOLD, AUTOENCODER, TRANSDUCER)


@dataclass(frozen=True, order=True)
class Symbol:
    kind: str
    text: str

    def __post_init__(self):
        if self.kind == CHAR and len(self.text) != 1:
            raise ValueError(f"character symbol must be one code point, got {self.text!r}")

    def __str__(self):
        return self.text


PAD = Symbol(SPECIAL, "<pad>")
BOS = Symbol(SPECIAL, "<s>")
EOS = Symbol(SPECIAL, "</s>")
UNK = Symbol(SPECIAL, "<unk>")
UNK_TAG = Symbol(SPECIAL, "<unk-tag>")
AUTOENC = Symbol(SPECIAL, "AUTOENC")

INPUT_SPECIALS = (PAD, BOS, EOS, UNK, UNK_TAG, AUTOENC)
OUTPUT_SPECIALS = (PAD, BOS, EOS, UNK)


def chars(text: str) -> tuple[Symbol, ...]:
    return tuple(Symbol(CHAR, c) for c in text)


def tag_symbols(upos, xpos, feats) -> tuple[Symbol, ...]:
    tags = []
    if upos is not None:
        tags.append(Symbol(TAG, f"UPOS={upos}"))
    if xpos is not None:
        tags.append(Symbol(TAG, f"XPOS={xpos}"))
    tags.extend(Symbol(TAG, f"{c}={v}") for c, v in sorted(feats))
    return tuple(tags)


@dataclass(frozen=True)
class TrainingExample:
    input: tuple[Symbol, ...]
    output: tuple[Symbol, ...]
    weight_group: str = GOLD

    def __post_init__(self):
        seen_tag = False
        for s in self.input:
            if s.kind == CHAR:
                if seen_tag:
                    raise ValueError("character symbols must precede tag symbols")
            else:
                seen_tag = True
        if any(s.kind == TAG for s in self.output):
            raise ValueError("output may not contain tag symbols")

    @property
    def lemma(self) -> str:
        return "".join(s.text for s in self.output if s.kind == CHAR)

    @property
    def form(self) -> str:
        return "".join(s.text for s in self.input if s.kind == CHAR)


def encode_input(form: str, upos=None, xpos=None, feats=()) -> tuple[Symbol, ...]:
    if not form:
        raise ValueError("cannot encode an empty form")
    return chars(form) + tag_symbols(upos, xpos, feats)


def encode_example(tok: Token, weight_group: str = GOLD) -> TrainingExample:
    """Token to example; the output is empty when the lemma is absent."""
    inp = encode_input(tok.form, tok.upos, tok.xpos, tok.feats)
    out = chars(tok.lemma) + (EOS,) if tok.lemma is not None else ()
    return TrainingExample(inp, out, weight_group)


def example_from_entry(form, lemma, upos, xpos, feats, weight_group=GOLD) -> TrainingExample:
    return TrainingExample(encode_input(form, upos, xpos, feats), chars(lemma) + (EOS,), weight_group)


class Vocabulary:
    """Dense symbol <-> id map with training frequencies.

    Characters below ``min_frequency`` are left out and map to UNK; tags are
    kept whenever seen and unseen tags map to UNK_TAG.
    """

    def __init__(self, symbols, frequency=None, min_frequency: int = 1):
        self.symbols = list(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}
        if len(self.index) != len(self.symbols):
            raise ValueError("duplicate symbols in vocabulary")
        self.frequency = dict(frequency or {})
        self.min_frequency = min_frequency
        for special in (BOS, EOS, UNK):
            if special not in self.index:
                raise ValueError(f"vocabulary lacks required symbol {special.text}")

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, sym):
        return sym in self.index

    def __eq__(self, other):
        return (
            isinstance(other, Vocabulary)
            and self.symbols == other.symbols
            and self.frequency == other.frequency
            and self.min_frequency == other.min_frequency
        )

    @property
    def pad_id(self):
        return self.index[PAD]

    @property
    def bos_id(self):
        return self.index[BOS]

    @property
    def eos_id(self):
        return self.index[EOS]

    @property
    def unk_id(self):
        return self.index[UNK]

    def id_of(self, sym: Symbol) -> int:
        i = self.index.get(sym)
        if i is not None:
            return i
        if sym.kind == CHAR:
            return self.index[UNK]
        return self.index.get(UNK_TAG, self.index[UNK])

    def ids_of(self, seq) -> list[int]:
        return [self.id_of(s) for s in seq]

    def decode(self, ids) -> list[Symbol]:
        return [self.symbols[i] for i in ids]

    def char_symbols(self):
        return [s for s in self.symbols if s.kind == CHAR]

    # serialization: "kind<TAB>text<TAB>id<TAB>frequency"
    def to_lines(self) -> list[str]:
        return [
            f"{s.kind}\t{_escape(s.text)}\t{i}\t{self.frequency.get(s, 0)}" for i, s in enumerate(self.symbols)
        ]

    @classmethod
    def from_lines(cls, lines, min_frequency: int = 1) -> "Vocabulary":
        symbols, freq = [], {}
        for n, line in enumerate(lines, start=1):
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"vocabulary line {n}: expected 4 fields")
            kind, text, ident, count = parts
            if int(ident) != len(symbols):
                raise ValueError(f"vocabulary line {n}: ids must be dense and ordered")
            sym = Symbol(kind, _unescape(text))
            symbols.append(sym)
            if int(count):
                freq[sym] = int(count)
        return cls(symbols, freq, min_frequency)


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(text: str) -> str:
    out, i = [], 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}[text[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def build_vocabularies(examples, min_frequency: int = 2) -> tuple[Vocabulary, Vocabulary]:
    """Input and output vocabularies from training examples."""
    examples = list(examples)
    if not examples:
        raise ValueError("cannot build vocabularies from zero examples")
    in_freq, out_freq = Counter(), Counter()
    for ex in examples:
        in_freq.update(ex.input)
        out_freq.update(ex.output)

    def make(freq, specials):
        tags = sorted(s for s in freq if s.kind == TAG)
        kept = sorted(s for s in freq if s.kind == CHAR and freq[s] >= min_frequency)
        syms = list(specials) + [s for s in tags if s not in specials] + kept
        return Vocabulary(syms, {s: freq[s] for s in syms if freq[s]}, min_frequency)

    return make(in_freq, INPUT_SPECIALS), make(out_freq, OUTPUT_SPECIALS)


def example_to_tsv(ex: TrainingExample) -> str:
    """Audit line: space-joined input symbols, output characters, group."""
    return "\t".join(
        [" ".join(s.text for s in ex.input), " ".join(s.text for s in ex.output if s.kind == CHAR), ex.weight_group]
    )
