from lemmaseq.baseline import build_lookup, predict_lookup
from lemmaseq.conllu import treebank_from_tokens
from lemmaseq.evaluation import evaluate


def test_lookup_examples():
    rows = [("dogs", "dog", "N", None, ""), ("lives", "life", "N", None, ""), ("lives", "life", "N", None, ""), ("lives", "live", "V", None, "")]
    b = build_lookup(treebank_from_tokens(rows))
    assert predict_lookup(b, "dogs") == "dog"
    assert predict_lookup(b, "lives") == "life"
    assert predict_lookup(b, "zzz") == "zzz"
    assert build_lookup(treebank_from_tokens([])).table == {}


def test_perfect_on_unambiguous_training_data():
    rows = [("a", "x", "N", None, ""), ("b", "y", "N", None, ""), ("a", "x", "V", None, "")]
    train = treebank_from_tokens(rows, "t", 2)
    assert evaluate(build_lookup(train).lemmatize(train), train).accuracy == 1.0
