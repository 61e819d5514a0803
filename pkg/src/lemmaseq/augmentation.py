"""Auxiliary training examples: random-string autoencoding and lexicon mining."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .codec import AUTOENC, AUTOENCODER, CHAR, EOS, TRANSDUCER, TrainingExample, chars, example_from_entry
from .conllu import Treebank

log = logging.getLogger(__name__)

MIN_LEN, MAX_LEN = 3, 12


@dataclass(frozen=True)
class CharDistribution:
    chars: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.chars) != len(self.probs):
            raise ValueError("one probability per character")
        if any(p <= 0 for p in self.probs):
            raise ValueError("character probabilities must be positive")
        if self.chars and abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("character probabilities must sum to 1")

    @classmethod
    def from_counts(cls, counts) -> "CharDistribution":
        items = sorted((c, n) for c, n in dict(counts).items() if n > 0)
        total = sum(n for _, n in items)
        return cls(tuple(c for c, _ in items), tuple(n / total for _, n in items))

    @classmethod
    def from_examples(cls, examples) -> "CharDistribution":
        """Frequencies of input characters in gold examples."""
        counts = Counter(s.text for ex in examples for s in ex.input if s.kind == CHAR)
        return cls.from_counts(counts)

    @classmethod
    def from_treebank(cls, tb: Treebank) -> "CharDistribution":
        return cls.from_counts(Counter(c for tok in tb.tokens() for c in tok.form))


@dataclass(frozen=True)
class AugmentationPlan:
    autoencoder_count: int = 0
    transducer_count: int = 0
    seed: int = 1

    def __post_init__(self):
        if self.autoencoder_count < 0 or self.transducer_count < 0:
            raise ValueError("augmentation counts must be >= 0")


PRESETS = {
    "none": (0, 0),
    "autoencoder-4k": (4000, 0),
    "transducer-4k": (0, 4000),
    "mixed-2k": (2000, 2000),
    "mixed-4k": (4000, 4000),
    "mixed-8k": (8000, 8000),
}


def generate_autoencoder_examples(dist: CharDistribution, n: int, seed: int) -> list[TrainingExample]:
    """``n`` random strings of 3-12 characters copied verbatim to the output.

    The first ``len(dist.chars)`` strings each hold one alphabet character
    (in alphabet order) at a random position, so every character is used.
    """
    if n == 0:
        return []
    alphabet = dist.chars
    if n < len(alphabet):
        raise ValueError(f"need at least {len(alphabet)} autoencoder strings to cover the alphabet, got {n}")
    rng = np.random.default_rng(seed)
    p = np.asarray(dist.probs)
    out = []
    for i in range(n):
        length = int(rng.integers(MIN_LEN, MAX_LEN + 1))
        s = [alphabet[j] for j in rng.choice(len(alphabet), size=length, p=p)]
        if i < len(alphabet):
            s[int(rng.integers(length))] = alphabet[i]
        text = "".join(s)
        out.append(TrainingExample(chars(text) + (AUTOENC,), chars(text) + (EOS,), AUTOENCODER))
    return out


def generate_lexicon_examples(lexicon, freq, train: Treebank, n: int) -> list[TrainingExample]:
    """Examples for the ``n`` most frequent lexicon forms surviving the filters.

    Filters, in order: forms already in the training treebank; entries
    without UPOS; forms having two lemmas under identical tags. Forms absent
    from the frequency list are never picked. Frequency ties go to the
    lexicographically smaller form.
    """
    lexicon = list(lexicon)
    if not lexicon:
        log.warning("empty lexicon; no transducer examples generated")
        return []
    train_forms = {tok.form for tok in train.tokens()}
    entries = [e for e in lexicon if e.form not in train_forms]
    entries = [e for e in entries if e.upos is not None]
    lemmas_by_key = defaultdict(set)
    for e in entries:
        lemmas_by_key[(e.form,) + e.tag_key].add(e.lemma)
    ambiguous = {key[0] for key, ls in lemmas_by_key.items() if len(ls) > 1}
    entries = [e for e in entries if e.form not in ambiguous]
    by_form = defaultdict(set)
    for e in entries:
        by_form[e.form].add(e)
    ranked = sorted((f for f in by_form if freq.get(f, 0) > 0), key=lambda f: (-freq.get(f), f))
    out = []
    for form in ranked[:n]:
        for e in sorted(by_form[form], key=lambda e: (e.tag_key, e.lemma)):
            out.append(example_from_entry(e.form, e.lemma, e.upos, e.xpos, e.feats, TRANSDUCER))
    return out


def mix(gold, plan: AugmentationPlan, *aux_lists) -> list[TrainingExample]:
    """Concatenate gold and auxiliary examples and shuffle with ``plan.seed``."""
    pool = list(gold)
    for aux in aux_lists:
        pool.extend(aux)
    order = np.random.default_rng(plan.seed).permutation(len(pool))
    return [pool[i] for i in order]


def augment(gold, plan: AugmentationPlan, dist=None, lexicon=(), freq=None, train=None):
    """Apply ``plan``: generate both kinds of auxiliary examples and mix."""
    aux = []
    if plan.autoencoder_count:
        dist = dist or CharDistribution.from_examples(gold)
        aux.append(generate_autoencoder_examples(dist, plan.autoencoder_count, plan.seed))
    if plan.transducer_count:
        if freq is None or train is None:
            raise ValueError("transducer augmentation needs a frequency list and the training treebank")
        aux.append(generate_lexicon_examples(lexicon, freq, train, plan.transducer_count))
    return mix(gold, plan, *aux)
