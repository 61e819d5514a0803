"""External morphological lexicons and word-frequency lists.

Lexicon TSV: ``form, lemma, upos, xpos, feats`` with "_" for absent fields;
the tags are expected to be in UD schema already. Frequency list:
``form<TAB>count``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .conllu import ConlluError, Feats, Treebank, format_feats, parse_feats


class LexiconFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LexiconEntry:
    form: str
    lemma: str
    upos: str | None = None
    xpos: str | None = None
    feats: Feats = ()

    def __post_init__(self):
        if not self.form or not self.lemma:
            raise ValueError("lexicon entries need a non-empty form and lemma")

    @property
    def tag_key(self):
        return (self.upos, self.xpos, format_feats(self.feats))

    def to_line(self) -> str:
        return "\t".join([self.form, self.lemma, self.upos or "_", self.xpos or "_", format_feats(self.feats)])


class FrequencyList:
    """form -> count, iterated by count descending (ties: form order)."""

    def __init__(self, counts=None):
        self.counts = {}
        for form, n in dict(counts or {}).items():
            if n < 1:
                raise ValueError(f"frequency for {form!r} must be >= 1")
            self.counts[form] = int(n)

    def __len__(self):
        return len(self.counts)

    def __contains__(self, form):
        return form in self.counts

    def __getitem__(self, form):
        return self.counts[form]

    def get(self, form, default=0):
        return self.counts.get(form, default)

    def __iter__(self):
        return iter(sorted(self.counts, key=lambda f: (-self.counts[f], f)))


def parse_lexicon(lines, source: str = "<lexicon>") -> list[LexiconEntry]:
    out, seen = [], set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise LexiconFormatError(f"{source}:{lineno}: expected 5 tab-separated columns, found {len(cols)}")
        form, lemma, upos, xpos, feats = cols
        try:
            entry = LexiconEntry(
                form,
                lemma,
                None if upos == "_" else upos,
                None if xpos == "_" else xpos,
                parse_feats(feats, lineno),
            )
        except (ConlluError, ValueError) as err:
            raise LexiconFormatError(f"{source}:{lineno}: {err}") from None
        if entry not in seen:
            seen.add(entry)
            out.append(entry)
    return out


def load_lexicon(path) -> list[LexiconEntry]:
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        return parse_lexicon(f, str(path))


def save_lexicon(entries, path):
    Path(path).write_text("".join(e.to_line() + "\n" for e in entries), encoding="utf-8")


def load_frequencies(path) -> FrequencyList:
    counts = {}
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            form, sep, n = line.rpartition("\t")
            if not sep or not n.isdigit():
                raise LexiconFormatError(f"{path}:{lineno}: expected form<TAB>count")
            counts[form] = counts.get(form, 0) + int(n)
    return FrequencyList(counts)


def save_frequencies(freq: FrequencyList, path):
    Path(path).write_text("".join(f"{f}\t{freq[f]}\n" for f in freq), encoding="utf-8")


def coverage_and_recall(lexicon, test: Treebank) -> tuple[float, float]:
    """Token-level share of test words known to the lexicon, and share whose
    gold lemma is among the lexicon's lemmas for that form (tags ignored)."""
    lemmas = defaultdict(set)
    for e in lexicon:
        lemmas[e.form].add(e.lemma)
    total = covered = recalled = 0
    for tok in test.tokens():
        total += 1
        if tok.form in lemmas:
            covered += 1
            if tok.lemma in lemmas[tok.form]:
                recalled += 1
    if total == 0:
        return 0.0, 0.0
    return covered / total, recalled / total
