import pytest

from lemmaseq.ambiguity import (
    MissingLemmaError,
    compute_ambiguity,
    pool_treebanks,
    reports_csv,
    skew_csv,
    top_ambiguous_skew,
)
from lemmaseq.conllu import Sentence, Token, Treebank, treebank_from_tokens
from oracles import brute_ambiguity, brute_skew, random_corpus


def test_lives_noun_vs_verb():
    tb = treebank_from_tokens([("lives", "life", "NOUN", None, ""), ("lives", "live", "VERB", None, "")])
    r = compute_ambiguity(tb)
    assert (r.total_tokens, r.token_ambiguous, r.tokentag_ambiguous) == (2, 2, 0)
    assert r.token_rate == 1.0 and r.tokentag_rate == 0.0


def test_unambiguous_corpus():
    tb = treebank_from_tokens([("a", "a", "X", None, ""), ("b", "b", "X", None, ""), ("a", "a", "X", None, "")])
    r = compute_ambiguity(tb)
    assert r.token_rate == r.tokentag_rate == 0.0
    assert top_ambiguous_skew(tb, 5) == []


def test_vs_skew():
    rows = [("vs.", "vs.", "ADP", "IN", "")] * 17 + [("vs.", "versus", "ADP", "IN", "")]
    (e,) = top_ambiguous_skew(treebank_from_tokens(rows), 100)
    assert (e.form, e.top_lemma, e.top_count, e.second_lemma, e.second_count) == ("vs.", "vs.", 17, "versus", 1)


def test_case_sensitive_forms():
    tb = treebank_from_tokens([("The", "the", "DET", None, ""), ("the", "thee", "DET", None, "")])
    assert compute_ambiguity(tb).token_ambiguous == 0


@pytest.mark.parametrize("seed", range(40))
def test_matches_brute_force(seed):
    tb = random_corpus(seed)
    toks = list(tb.tokens())
    r = compute_ambiguity(tb)
    assert (r.total_tokens, r.token_ambiguous, r.tokentag_ambiguous) == brute_ambiguity(toks)
    assert r.tokentag_rate <= r.token_rate
    got = [(e.form, e.tags, e.top_lemma, e.top_count, e.second_lemma, e.second_count) for e in top_ambiguous_skew(tb, 3)]
    assert got == brute_skew(toks, 3)


def test_missing_lemma_names_sentence():
    tb = Treebank((Sentence((Token(1, "a", "a"),)), Sentence((Token(1, "a", "a"), Token(2, "b")))), "tb")
    with pytest.raises(MissingLemmaError, match="sentence 2, token 2"):
        compute_ambiguity(tb)


def test_pooling():
    a, b = random_corpus(1), random_corpus(2)
    assert pool_treebanks([a]) is a
    pooled = pool_treebanks([a, b])
    assert pooled.n_tokens == a.n_tokens + b.n_tokens
    twice = compute_ambiguity(pool_treebanks([a, a]))
    once = compute_ambiguity(a)
    assert (twice.token_rate, twice.tokentag_rate) == (once.token_rate, once.tokentag_rate)


def test_bad_k():
    with pytest.raises(ValueError):
        top_ambiguous_skew(random_corpus(0), 0)


def test_csv_reports():
    tb = treebank_from_tokens([("lives", "life", "NOUN", None, ""), ("lives", "live", "VERB", None, "")], "en")
    text = reports_csv([compute_ambiguity(tb)])
    assert text.splitlines()[1] == "en,2,2,0,1.0000,0.0000"
    rows = [("vs.", "vs.", "ADP", "IN", "")] * 2 + [("vs.", "versus", "ADP", "IN", "")]
    assert skew_csv(top_ambiguous_skew(treebank_from_tokens(rows), 1)).splitlines()[1] == "vs.,ADP|IN|_,vs.,2,versus,1"
