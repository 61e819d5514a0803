"""Look-up baseline: the most common training lemma per form, else copy the form."""

from __future__ import annotations

from collections import Counter, defaultdict

from .conllu import Treebank


class LookupBaseline:
    def __init__(self, table=None):
        self.table = dict(table or {})

    def predict(self, form: str) -> str:
        return self.table.get(form, form)

    def lemmatize(self, tb: Treebank) -> Treebank:
        sents = [s.with_lemmas(self.predict(t.form) for t in s.tokens) for s in tb.sentences]
        return Treebank(tuple(sents), tb.name)


def build_lookup(train: Treebank) -> LookupBaseline:
    counts = defaultdict(Counter)
    for tok in train.tokens():
        if tok.lemma is not None:
            counts[tok.form][tok.lemma] += 1
    return LookupBaseline({f: min(c.items(), key=lambda ln: (-ln[1], ln[0]))[0] for f, c in counts.items()})


def predict_lookup(baseline: LookupBaseline, form: str) -> str:
    return baseline.predict(form)
