import pytest

from lemmaseq.conllu import treebank_from_tokens
from lemmaseq.evaluation import (
    EvalResult,
    TokenizationMismatch,
    evaluate,
    macro_average,
    relative_error_reduction,
    results_csv,
)


def tb(lemmas, forms=None, name="t"):
    forms = forms or [f"w{i}" for i in range(len(lemmas))]
    return treebank_from_tokens([(f, l, "N", None, "") for f, l in zip(forms, lemmas)], name, 4)


def test_identical_and_nine_of_ten():
    gold = tb([f"l{i}" for i in range(10)])
    assert evaluate(gold, gold).accuracy == 1.0
    pred = tb([f"l{i}" for i in range(9)] + ["wrong"])
    r = evaluate(pred, gold)
    assert (r.total, r.correct) == (10, 9)
    assert r.error_rate == pytest.approx(0.1)


def test_exact_string_match_no_case_folding():
    assert evaluate(tb(["The"]), tb(["the"])).correct == 0


def test_absent_gold_lemmas_are_excluded():
    r = evaluate(tb(["a", "b"]), tb(["a", None]))
    assert (r.total, r.correct, r.excluded) == (1, 1, 1)


def test_tokenization_mismatches():
    with pytest.raises(TokenizationMismatch, match="3 predicted vs 2 gold"):
        evaluate(tb(["a", "b", "c"]), tb(["a", "b"]))
    with pytest.raises(TokenizationMismatch, match="token 2"):
        evaluate(tb(["a", "b"], ["x", "y"]), tb(["a", "b"], ["x", "z"]))
    with pytest.raises(TokenizationMismatch, match="sentence counts"):
        evaluate(tb(["a"] * 5), tb(["a"] * 3))


def test_macro_average():
    r = lambda err: EvalResult("x", 100, 100 - err)
    assert macro_average([r(2)]).macro_error_rate == pytest.approx(0.02)
    assert macro_average([r(2), r(4)]).macro_error_rate == pytest.approx(0.03)
    five = [r(e) for e in (1, 5, 7, 10, 2)]
    assert macro_average(five).macro_error_rate == pytest.approx((1 + 5 + 7 + 10 + 2) / 500)
    assert macro_average(list(reversed(five))).macro_error_rate == macro_average(five).macro_error_rate
    with pytest.raises(ValueError):
        macro_average([])


def test_relative_error_reduction():
    assert relative_error_reduction(0.10, 0.08) == pytest.approx(0.2)
    assert relative_error_reduction(5.0, 5.0) == 0.0
    assert relative_error_reduction(12.75, 8.98) == pytest.approx(0.2957, abs=1e-4)
    assert relative_error_reduction(0.0, 0.0) is None


def test_csv():
    rs = [EvalResult("a", 10, 9), EvalResult("b", 10, 7)]
    lines = results_csv(rs, [macro_average(rs, "g")]).splitlines()
    assert lines[0] == "treebank,tokens,correct,accuracy,error_rate"
    assert lines[1] == "a,10,9,0.9000,10.00"
    assert lines[3] == "macro:g,20,,,20.00"
