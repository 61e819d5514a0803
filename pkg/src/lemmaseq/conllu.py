"""CoNLL-U reading and writing.

Sentences are immutable. Multiword-token range lines ("1-2") and empty nodes
("5.1") are kept verbatim for round-tripping but are not Tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

Feats = tuple[tuple[str, str], ...]

PLACEHOLDER = "_"


class ConlluError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


def parse_feats(text: str, line: int | None = None) -> Feats:
    """Split "A=x|B=y" into category-sorted pairs."""
    if text == PLACEHOLDER or text == "":
        return ()
    pairs = {}
    for item in text.split("|"):
        cat, sep, val = item.partition("=")
        if not sep or not cat:
            raise ConlluError(f"malformed FEATS item {item!r}", line)
        if cat in pairs:
            raise ConlluError(f"duplicate FEATS category {cat!r}", line)
        pairs[cat] = val
    return tuple(sorted(pairs.items()))


def format_feats(feats: Feats) -> str:
    if not feats:
        return PLACEHOLDER
    return "|".join(f"{c}={v}" for c, v in sorted(feats))


def _opt(value: str) -> str | None:
    return None if value == PLACEHOLDER else value


def _field(value: str | None) -> str:
    return PLACEHOLDER if value is None else value


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str | None = None
    upos: str | None = None
    xpos: str | None = None
    feats: Feats = ()
    head: str = PLACEHOLDER
    deprel: str = PLACEHOLDER
    deps: str = PLACEHOLDER
    misc: str = PLACEHOLDER

    def __post_init__(self):
        if not self.form:
            raise ValueError("token form must be non-empty")
        cats = [c for c, _ in self.feats]
        if cats != sorted(set(cats)):
            object.__setattr__(self, "feats", parse_feats(format_feats(self.feats)))

    @property
    def feats_str(self) -> str:
        return format_feats(self.feats)

    @property
    def tag_key(self) -> tuple[str | None, str | None, str]:
        """(UPOS, XPOS, canonical FEATS) as used for ambiguity and caching."""
        return (self.upos, self.xpos, self.feats_str)

    def with_lemma(self, lemma: str | None) -> "Token":
        return replace(self, lemma=lemma)

    def to_line(self) -> str:
        return "\t".join(
            [
                str(self.id),
                self.form,
                _field(self.lemma),
                _field(self.upos),
                _field(self.xpos),
                self.feats_str,
                self.head,
                self.deprel,
                self.deps,
                self.misc,
            ]
        )


@dataclass(frozen=True)
class MultiwordRange:
    start: int
    end: int
    surface: str
    line: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()
    multiword: tuple[MultiwordRange, ...] = ()
    # (id of the preceding word, raw line)
    empty_nodes: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        for i, tok in enumerate(self.tokens, start=1):
            if tok.id != i:
                raise ValueError(f"token ids must be 1..n consecutive, found {tok.id} at position {i}")

    def with_lemmas(self, lemmas) -> "Sentence":
        lemmas = list(lemmas)
        if len(lemmas) != len(self.tokens):
            raise ValueError("one lemma per token required")
        return replace(self, tokens=tuple(t.with_lemma(l) for t, l in zip(self.tokens, lemmas)))


@dataclass(frozen=True)
class Treebank:
    sentences: tuple[Sentence, ...] = ()
    name: str = ""

    def tokens(self):
        for sent in self.sentences:
            yield from sent.tokens

    def __len__(self):
        return len(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s.tokens) for s in self.sentences)


def _parse_block(lines, source):
    comments, tokens, ranges, empties = [], [], [], []
    for lineno, line in lines:
        if line.startswith("#"):
            if tokens or ranges or empties:
                raise ConlluError("comment line inside a sentence body", lineno, source)
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 tab-separated columns, found {len(cols)}", lineno, source)
        tid = cols[0]
        if "-" in tid:
            a, _, b = tid.partition("-")
            if not (a.isdigit() and b.isdigit()):
                raise ConlluError(f"bad range id {tid!r}", lineno, source)
            ranges.append(MultiwordRange(int(a), int(b), cols[1], line))
        elif "." in tid:
            a, _, b = tid.partition(".")
            if not (a.isdigit() and b.isdigit()):
                raise ConlluError(f"bad empty-node id {tid!r}", lineno, source)
            empties.append((int(a), line))
        else:
            if not tid.isdigit():
                raise ConlluError(f"bad token id {tid!r}", lineno, source)
            if not cols[1]:
                raise ConlluError("empty FORM", lineno, source)
            if int(tid) != len(tokens) + 1:
                raise ConlluError(f"token id {tid} out of sequence", lineno, source)
            try:
                feats = parse_feats(cols[5], lineno)
            except ConlluError as err:
                raise ConlluError(err.message, lineno, source) from None
            tokens.append(
                Token(
                    id=int(tid),
                    form=cols[1],
                    lemma=_opt(cols[2]),
                    upos=_opt(cols[3]),
                    xpos=_opt(cols[4]),
                    feats=feats,
                    head=cols[6],
                    deprel=cols[7],
                    deps=cols[8],
                    misc=cols[9],
                )
            )
    if not tokens and (ranges or empties):
        raise ConlluError("sentence without word lines", lines[0][0], source)
    return Sentence(tuple(tokens), tuple(comments), tuple(ranges), tuple(empties))


def parse_conllu(text: str, name: str = "", source: str | None = None) -> Treebank:
    """Parse CoNLL-U text. Raises :class:`ConlluError` with a line number."""
    sentences = []
    block = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if line.strip() == "":
            if block:
                sentences.append(_parse_block(block, source))
                block = []
            continue
        block.append((lineno, line))
    if block:
        sentences.append(_parse_block(block, source))
    return Treebank(tuple(s for s in sentences if s.tokens or s.comments), name)


def emit_sentence(sent: Sentence) -> str:
    out = list(sent.comments)
    ranges = {r.start: r for r in sent.multiword}
    empties = {}
    for anchor, line in sent.empty_nodes:
        empties.setdefault(anchor, []).append(line)
    out.extend(empties.get(0, []))
    for tok in sent.tokens:
        if tok.id in ranges:
            out.append(ranges[tok.id].line)
        out.append(tok.to_line())
        out.extend(empties.get(tok.id, []))
    return "\n".join(out) + "\n"


def emit_conllu(tb: Treebank) -> str:
    return "".join(emit_sentence(s) + "\n" for s in tb.sentences)


def read_conllu(path, name: str | None = None) -> Treebank:
    path = Path(path)
    return parse_conllu(path.read_text(encoding="utf-8"), name or path.stem, source=str(path))


def write_conllu(tb: Treebank, path):
    Path(path).write_text(emit_conllu(tb), encoding="utf-8")


def treebank_from_tokens(rows, name: str = "", sentence_size: int | None = None) -> Treebank:
    """Build a treebank from (form, lemma, upos, xpos, feats) tuples.

    Rows are packed into sentences of ``sentence_size`` tokens (one sentence
    if None). ``feats`` may be a FEATS string or a sequence of pairs.
    """
    rows = list(rows)
    size = sentence_size or max(len(rows), 1)
    sents = []
    for start in range(0, len(rows), size):
        toks = []
        for i, (form, lemma, upos, xpos, feats) in enumerate(rows[start : start + size], start=1):
            if isinstance(feats, str):
                feats = parse_feats(feats)
            toks.append(Token(i, form, lemma, upos, xpos, tuple(sorted(feats))))
        sents.append(Sentence(tuple(toks)))
    return Treebank(tuple(sents), name)


def replace_lemma_column(text: str, lemmas) -> str:
    """Rewrite column 3 of every word line in ``text``, in order.

    All other bytes, including comments, range and empty-node lines and
    unnormalized FEATS, are kept as they are.
    """
    lemmas = iter(lemmas)
    out = []
    for line in text.splitlines(keepends=True):
        body = line.rstrip("\r\n")
        head, sep, rest = body.partition("\t")
        if sep and head.isdigit():
            cols = body.split("\t")
            try:
                cols[2] = _field(next(lemmas))
            except StopIteration:
                raise ValueError("fewer lemmas than word lines") from None
            line = "\t".join(cols) + line[len(body) :]
        out.append(line)
    if next(lemmas, None) is not None:
        raise ValueError("more lemmas than word lines")
    return "".join(out)
