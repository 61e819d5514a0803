import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lemmaseq.conllu import (
    ConlluError,
    Sentence,
    Token,
    Treebank,
    emit_conllu,
    parse_conllu,
    parse_feats,
    read_conllu,
    replace_lemma_column,
    treebank_from_tokens,
    write_conllu,
)

LIVES = "1\tlives\tlife\tNOUN\tNNS\tNumber=Plur\t_\t_\t_\t_"

HAND = (
    "# sent_id = 1\n"
    "# text = He lives.\n"
    "1\tHe\the\tPRON\tPRP\tCase=Nom|Number=Sing\t2\tnsubj\t_\t_\n"
    "2\tlives\tlive\tVERB\tVBZ\tNumber=Sing|Person=3\t0\troot\t_\tSpaceAfter=No\n"
    "3\t.\t.\tPUNCT\t.\t_\t2\tpunct\t_\t_\n"
    "\n"
    "# sent_id = 2\n"
    "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tde\tde\tADP\t_\t_\t2\tcase\t_\t_\n"
    "2\tel\tel\tDET\t_\tDefinite=Def\t0\troot\t_\t_\n"
    "\n"
    "1\tok\tok\tINTJ\t_\t_\t0\troot\t_\t_\n"
    "2\tyes\t_\tINTJ\t_\t_\t1\tdiscourse\t_\t_\n"
    "\n"
)


def test_lives_line():
    tb = parse_conllu(LIVES + "\n")
    (tok,) = tb.tokens()
    assert (tok.form, tok.lemma, tok.upos, tok.xpos) == ("lives", "life", "NOUN", "NNS")
    assert tok.feats == (("Number", "Plur"),)


def test_empty_input():
    assert len(parse_conllu("")) == 0


def test_hand_file_round_trips_byte_identically():
    tb = parse_conllu(HAND)
    assert len(tb) == 3 and tb.n_tokens == 7
    assert tb.sentences[1].multiword[0].surface == "del"
    assert list(tb.tokens())[6].lemma is None
    assert emit_conllu(tb) == HAND


def test_empty_nodes_kept():
    text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n1.1\tb\tb\tX\t_\t_\t_\t_\t0:root\t_\n2\tc\tc\tX\t_\t_\t1\tdep\t_\t_\n\n"
    tb = parse_conllu(text)
    assert tb.n_tokens == 2
    assert emit_conllu(tb) == text


def test_feats_are_sorted_and_empty_is_placeholder():
    tb = parse_conllu("1\tx\tx\tX\t_\tNumber=Sing|Case=Nom\t_\t_\t_\t_\n")
    tok = next(tb.tokens())
    assert tok.feats == (("Case", "Nom"), ("Number", "Sing"))
    assert tok.to_line().split("\t")[5] == "Case=Nom|Number=Sing"
    assert Token(1, "y").to_line().split("\t")[5] == "_"


@pytest.mark.parametrize(
    "text, line",
    [
        ("1\tx\tx\tX\t_\t_\t_\t_\t_\n", 1),
        ("# c\n1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n2\ty\ty\tX\t_\tA=b|A=c\t_\t_\t_\t_\n", 3),
        ("1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n3\ty\ty\tX\t_\t_\t_\t_\t_\t_\n", 2),
        ("1\tx\tx\tX\t_\tNoEquals\t_\t_\t_\t_\n", 1),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConlluError) as info:
        parse_conllu(text, source="f.conllu")
    assert info.value.line == line
    assert f"f.conllu:{line}:" in str(info.value)


def test_duplicate_feats_category():
    with pytest.raises(ConlluError, match="duplicate"):
        parse_feats("Case=Nom|Case=Gen")


def test_file_io(tmp_path):
    p = tmp_path / "a.conllu"
    p.write_text(HAND, encoding="utf-8")
    tb = read_conllu(p)
    assert tb.name == "a"
    write_conllu(tb, tmp_path / "b.conllu")
    assert (tmp_path / "b.conllu").read_text(encoding="utf-8") == HAND
    (tmp_path / "bad.conllu").write_text("1\tx\n", encoding="utf-8")
    with pytest.raises(ConlluError, match="bad.conllu:1"):
        read_conllu(tmp_path / "bad.conllu")


def test_sentence_ids_must_be_consecutive():
    with pytest.raises(ValueError):
        Sentence((Token(2, "x"),))


def test_replace_lemma_column_keeps_other_bytes():
    text = "# c\r\n1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\r\n1\tde\t_\tADP\t_\tZ=1|A=2\t_\t_\t_\t_\r\n2\tel\t_\tDET\t_\t_\t_\t_\t_\t_\r\n\r\n"
    out = replace_lemma_column(text, ["de", None])
    assert out == text.replace("1\tde\t_", "1\tde\tde")
    with pytest.raises(ValueError):
        replace_lemma_column(text, ["a"])
    with pytest.raises(ValueError):
        replace_lemma_column(text, ["a", "b", "c"])


def test_treebank_from_tokens_packs_sentences():
    tb = treebank_from_tokens([("a", "a", "X", None, "")] * 5, "t", 2)
    assert [len(s.tokens) for s in tb.sentences] == [2, 2, 1]


# ------------------------------------------------------------ property test

_text = st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs", "Zs", "Zl", "Zp")), min_size=1, max_size=6)
_opt = st.one_of(st.none(), _text.filter(lambda s: s != "_"))
_feats = st.dictionaries(
    st.from_regex(r"[A-Z][a-z]{0,5}", fullmatch=True), st.from_regex(r"[A-Za-z0-9]{1,4}", fullmatch=True), max_size=3
)
_token = st.tuples(_text.filter(lambda s: s != "_"), _opt, _opt, _opt, _feats)


@st.composite
def treebanks(draw):
    sents = []
    for _ in range(draw(st.integers(0, 4))):
        rows = draw(st.lists(_token, min_size=1, max_size=5))
        toks = tuple(
            Token(i, f, l, u, x, tuple(sorted(fe.items()))) for i, (f, l, u, x, fe) in enumerate(rows, start=1)
        )
        comments = tuple("# " + c for c in draw(st.lists(st.from_regex(r"[a-z =]{0,8}", fullmatch=True), max_size=2)))
        sents.append(Sentence(toks, comments))
    return Treebank(tuple(sents))


@settings(max_examples=150, deadline=None)
@given(treebanks())
def test_parse_emit_fixed_point(tb):
    text = emit_conllu(tb)
    again = parse_conllu(text)
    assert again.sentences == tb.sentences
    assert emit_conllu(again) == text
