"""How often a word, or a (word, tags) pair, is seen with more than one lemma.

Counts are over running tokens. The tag key is (UPOS, XPOS, sorted FEATS);
forms are compared case-sensitively.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass

from .conllu import Treebank


class MissingLemmaError(ValueError):
    pass


@dataclass(frozen=True)
class AmbiguityReport:
    name: str
    total_tokens: int
    token_ambiguous: int
    tokentag_ambiguous: int

    @property
    def token_rate(self) -> float:
        return self.token_ambiguous / self.total_tokens if self.total_tokens else 0.0

    @property
    def tokentag_rate(self) -> float:
        return self.tokentag_ambiguous / self.total_tokens if self.total_tokens else 0.0


@dataclass(frozen=True)
class SkewEntry:
    form: str
    tags: str
    top_lemma: str
    top_count: int
    second_lemma: str
    second_count: int


def tag_string(key) -> str:
    upos, xpos, feats = key
    return f"{upos or '_'}|{xpos or '_'}|{feats}"


def _checked_tokens(tb: Treebank):
    for n, sent in enumerate(tb.sentences, start=1):
        for tok in sent.tokens:
            if tok.lemma is None:
                label = tb.name or "treebank"
                raise MissingLemmaError(f"{label}: sentence {n}, token {tok.id} ({tok.form!r}) has no lemma")
            yield tok


def compute_ambiguity(tb: Treebank) -> AmbiguityReport:
    form_lemmas = defaultdict(set)
    key_lemmas = defaultdict(set)
    forms, keys = Counter(), Counter()
    for tok in _checked_tokens(tb):
        key = (tok.form,) + tok.tag_key
        form_lemmas[tok.form].add(tok.lemma)
        key_lemmas[key].add(tok.lemma)
        forms[tok.form] += 1
        keys[key] += 1
    total = sum(forms.values())
    tok_amb = sum(n for f, n in forms.items() if len(form_lemmas[f]) > 1)
    tag_amb = sum(n for k, n in keys.items() if len(key_lemmas[k]) > 1)
    return AmbiguityReport(tb.name, total, tok_amb, tag_amb)


def top_ambiguous_skew(tb: Treebank, k: int = 100) -> list[SkewEntry]:
    """The ``k`` most frequent token-tag ambiguous (form, tags) keys with
    their two most frequent lemmas. Ties: form, then tags, then lemma."""
    if k < 1:
        raise ValueError("k must be >= 1")
    counts = defaultdict(Counter)
    for tok in _checked_tokens(tb):
        counts[(tok.form, tag_string(tok.tag_key))][tok.lemma] += 1
    amb = [(key, c) for key, c in counts.items() if len(c) > 1]
    amb.sort(key=lambda kc: (-sum(kc[1].values()), kc[0][0], kc[0][1]))
    out = []
    for (form, tags), c in amb[:k]:
        (l1, n1), (l2, n2) = sorted(c.items(), key=lambda ln: (-ln[1], ln[0]))[:2]
        out.append(SkewEntry(form, tags, l1, n1, l2, n2))
    return out


def pool_treebanks(tbs, name: str = "pooled") -> Treebank:
    tbs = list(tbs)
    if len(tbs) == 1:
        return tbs[0]
    return Treebank(tuple(s for tb in tbs for s in tb.sentences), name)


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["treebank", "tokens", "token_ambiguous", "tokentag_ambiguous", "token_rate", "tokentag_rate"])
    for r in reports:
        w.writerow(
            [r.name, r.total_tokens, r.token_ambiguous, r.tokentag_ambiguous, f"{r.token_rate:.4f}", f"{r.tokentag_rate:.4f}"]
        )
    return buf.getvalue()


def skew_csv(entries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["form", "tags", "lemma1", "count1", "lemma2", "count2"])
    for e in entries:
        w.writerow([e.form, e.tags, e.top_lemma, e.top_count, e.second_lemma, e.second_count])
    return buf.getvalue()
