"""Exact-match (form, UPOS, XPOS, FEATS) -> lemma cache consulted before decoding."""

from __future__ import annotations

from collections import Counter, defaultdict
from pathlib import Path

from .conllu import Token, Treebank


class CacheFormatError(ValueError):
    pass


def _key(tok: Token):
    return (tok.form, tok.upos or "_", tok.xpos or "_", tok.feats_str)


class LemmaCache:
    def __init__(self, entries=None):
        self.entries: dict = dict(entries or {})

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, LemmaCache) and self.entries == other.entries

    def lookup(self, tok: Token) -> str | None:
        return self.entries.get(_key(tok))

    def to_tsv(self) -> str:
        return "".join("\t".join(k) + "\t" + self.entries[k] + "\n" for k in sorted(self.entries))

    @classmethod
    def from_tsv(cls, text: str, source: str = "<cache>") -> "LemmaCache":
        entries = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5 or not cols[0] or not cols[4]:
                raise CacheFormatError(f"{source}:{lineno}: expected form, upos, xpos, feats, lemma")
            key = tuple(cols[:4])
            if key in entries:
                raise CacheFormatError(f"{source}:{lineno}: duplicate key")
            entries[key] = cols[4]
        return cls(entries)


def build_cache(train: Treebank, exclude_ambiguous: bool = False) -> LemmaCache:
    """Most frequent lemma per key; ties go to the lexicographically smaller lemma."""
    counts = defaultdict(Counter)
    for tok in train.tokens():
        if tok.lemma is not None:
            counts[_key(tok)][tok.lemma] += 1
    entries = {}
    for key, c in counts.items():
        if exclude_ambiguous and len(c) > 1:
            continue
        entries[key] = min(c.items(), key=lambda ln: (-ln[1], ln[0]))[0]
    return LemmaCache(entries)


def save_cache(cache: LemmaCache, path):
    Path(path).write_bytes(cache.to_tsv().encode("utf-8"))


def load_cache(path) -> LemmaCache:
    path = Path(path)
    return LemmaCache.from_tsv(path.read_bytes().decode("utf-8"), str(path))
