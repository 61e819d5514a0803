import numpy as np
import pytest

from lemmaseq.conllu import treebank_from_tokens
from lemmaseq.lexicon import (
    FrequencyList,
    LexiconEntry,
    LexiconFormatError,
    coverage_and_recall,
    load_frequencies,
    load_lexicon,
    parse_lexicon,
    save_frequencies,
    save_lexicon,
)


def test_parse_hand_file():
    rows = ["dogs\tdog\tNOUN\tNNS\tNumber=Plur", "ran\trun\tVERB\t_\t_", "x\tx\t_\t_\t_", "dogs\tdog\tNOUN\tNNS\tNumber=Plur"]
    lex = parse_lexicon(rows)
    assert len(lex) == 3
    assert lex[2].upos is None and lex[1].xpos is None and lex[0].feats == (("Number", "Plur"),)
    assert parse_lexicon([]) == []


def test_parse_errors_have_line_numbers():
    with pytest.raises(LexiconFormatError, match="lex.tsv:2"):
        parse_lexicon(["a\ta\tN\t_\t_", "b\tb\tN"], "lex.tsv")
    with pytest.raises(LexiconFormatError, match=":1"):
        parse_lexicon(["a\ta\tN\t_\tBad"])


def test_file_round_trips(tmp_path):
    lex = [LexiconEntry("dogs", "dog", "NOUN", "NNS", (("Number", "Plur"),)), LexiconEntry("a", "a")]
    save_lexicon(lex, tmp_path / "l.tsv")
    assert load_lexicon(tmp_path / "l.tsv") == lex
    freq = FrequencyList({"b": 2, "a": 2, "c": 5})
    assert list(freq) == ["c", "a", "b"]
    save_frequencies(freq, tmp_path / "f.tsv")
    assert load_frequencies(tmp_path / "f.tsv").counts == freq.counts
    (tmp_path / "bad.tsv").write_text("a\tx\n", encoding="utf-8")
    with pytest.raises(LexiconFormatError, match="bad.tsv:1"):
        load_frequencies(tmp_path / "bad.tsv")


def test_full_and_empty_lexicon():
    tb = treebank_from_tokens([("dogs", "dog", "N", None, ""), ("ran", "run", "V", None, "")])
    full = [LexiconEntry(t.form, t.lemma) for t in tb.tokens()]
    assert coverage_and_recall(full, tb) == (1.0, 1.0)
    assert coverage_and_recall([], tb) == (0.0, 0.0)


def test_hand_case_08_06():
    forms = [f"w{i}" for i in range(10)]
    tb = treebank_from_tokens([(f, f + "_gold", "N", None, "") for f in forms])
    lex = [LexiconEntry(f, f + "_gold") for f in forms[:6]] + [LexiconEntry(f, "wrong") for f in forms[6:8]]
    assert coverage_and_recall(lex, tb) == (0.8, 0.6)


@pytest.mark.parametrize("seed", range(20))
def test_recall_never_exceeds_coverage(seed):
    rng = np.random.default_rng(seed)
    forms, lemmas = list("abcdef"), list("xyz")
    tb = treebank_from_tokens([(str(rng.choice(forms)), str(rng.choice(lemmas)), "N", None, "") for _ in range(30)])
    lex = [LexiconEntry(str(rng.choice(forms)), str(rng.choice(lemmas))) for _ in range(int(rng.integers(0, 10)))]
    cov, rec = coverage_and_recall(lex, tb)
    assert 0.0 <= rec <= cov <= 1.0
