import pytest

from lemmaseq.cache import CacheFormatError, LemmaCache, build_cache, load_cache, save_cache
from lemmaseq.conllu import Token, Treebank, treebank_from_tokens


def tb(rows, size=3):
    return treebank_from_tokens(rows, "t", size)


def test_modal_lemma_and_ties():
    rows = [("lives", "life", "NOUN", None, "")] * 3 + [("lives", "live", "NOUN", None, "")]
    rows += [("x", "b", "X", None, ""), ("x", "a", "X", None, "")]
    c = build_cache(tb(rows))
    assert c.lookup(Token(1, "lives", None, "NOUN")) == "life"
    assert c.lookup(Token(1, "x", None, "X")) == "a"
    assert c.lookup(Token(1, "unseen", None, "X")) is None


def test_feats_are_part_of_the_key():
    c = build_cache(tb([("a", "a", "N", None, "Case=Nom")]))
    assert c.lookup(Token(1, "a", None, "N", None, (("Case", "Nom"),))) == "a"
    assert c.lookup(Token(1, "a", None, "N", None, (("Case", "Gen"),))) is None


def test_exclude_ambiguous():
    rows = [("a", "x", "N", None, ""), ("a", "y", "N", None, ""), ("b", "b", "N", None, "")]
    c = build_cache(tb(rows), exclude_ambiguous=True)
    assert len(c) == 1 and c.lookup(Token(1, "a", None, "N")) is None


def test_permutation_invariant():
    rows = [("a", "x", "N", None, ""), ("a", "y", "N", None, ""), ("a", "y", "N", None, ""), ("b", "b", "V", "Q", "")]
    t = tb(rows, 1)
    rev = Treebank(tuple(reversed(t.sentences)))
    assert build_cache(t) == build_cache(rev)


def test_round_trip_and_empty(tmp_path):
    save_cache(LemmaCache(), tmp_path / "e.tsv")
    assert (tmp_path / "e.tsv").read_bytes() == b""
    c = build_cache(tb([("b", "b", "N", None, "Case=Nom"), ("a", "á", "V", "VB", "")]))
    save_cache(c, tmp_path / "c.tsv")
    back = load_cache(tmp_path / "c.tsv")
    assert back == c
    assert (tmp_path / "c.tsv").read_text(encoding="utf-8").splitlines()[0] == "a\tV\tVB\t_\tá"
    probe = Token(1, "b", None, "N", None, (("Case", "Nom"),))
    assert back.lookup(probe) == c.lookup(probe) == "b"


def test_hand_file_and_errors(tmp_path):
    p = tmp_path / "h.tsv"
    p.write_text("a\tN\t_\t_\ta\nb\tN\t_\t_\tb\nc\tV\tX\tCase=Nom\tc\n", encoding="utf-8")
    assert len(load_cache(p)) == 3
    p.write_text("a\tN\t_\t_\ta\nb\tN\t_\n", encoding="utf-8")
    with pytest.raises(CacheFormatError, match="h.tsv:2"):
        load_cache(p)
