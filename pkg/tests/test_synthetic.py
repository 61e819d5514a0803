from lemmaseq.conllu import emit_conllu
from lemmaseq.synthetic import ToyLanguage, attach, make_split, shrink, type_key


def test_voicing_alternation():
    assert attach("lak", "a") == "laga"
    assert attach("lak", "n") == "lakn"
    assert attach("lam", "a") == "lama"


def test_split_is_deterministic_and_disjoint():
    a, b = make_split(seed=7), make_split(seed=7)
    assert emit_conllu(a.train) == emit_conllu(b.train)
    assert emit_conllu(a.test) == emit_conllu(b.test)
    assert a.frequencies.counts == b.frequencies.counts
    test_types = {type_key(t) for t in a.test.tokens()}
    held = test_types - a.train_types
    assert held and len(held) < len(test_types)
    assert a.train.n_tokens == 2000 and a.test.n_tokens == 500


def test_no_colliding_keys():
    types = ToyLanguage(seed=7).all_types(include_extra=True)
    assert len({(t.form, t.upos, t.xpos, t.feats) for t in types}) == len(types)


def test_shrink():
    sp = make_split()
    s1, s2 = shrink(sp.train, 150, 3), shrink(sp.train, 150, 3)
    assert s1.n_tokens == 150 and emit_conllu(s1) == emit_conllu(s2)
