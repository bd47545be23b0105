import pytest

from pqsurf.coset import CosetLimitExceeded, Presentation, enumerate_cosets, evaluate, format_word, parse_word, realize


@pytest.mark.parametrize("gens,rels,order", [
    ("a", "a5", 5),
    ("a,b", "a2, b3, abab", 6),
    ("a,b", "a4, b2, baba", 8),
    ("a,b", "a4, a2b-2, b-1aba", 8),
    ("a,b", "a2, b3, ababab", 12),
    ("a,b", "a2, b3, abababab", 24),
    ("a,b", "a2, b3, ababababab", 60),
    ("a,b", "a2, b2, ab-1a-1b", 4),
])
def test_coset_enumeration_orders(gens, rels, order):
    p = Presentation.parse(gens, rels)
    assert len(enumerate_cosets(p)) == order
    G = realize(p)
    assert G.order == order
    assert all(evaluate(G, w) == 0 for w in p.relators)


def test_infinite_presentation_hits_limit():
    p = Presentation.parse("a,b", "ab-1a-1b")
    with pytest.raises(CosetLimitExceeded):
        enumerate_cosets(p, limit=500)


def test_word_round_trip():
    names = ("x", "y")
    w = parse_word("yxy-1x-3", names)
    assert w == (2, 1, -2, -1, -1, -1)
    assert format_word(w, names) == "yxy-1x-3"


@pytest.mark.parametrize("bad", ["", "x0", "z", "x-", "x 2"])
def test_bad_words(bad):
    with pytest.raises(ValueError):
        parse_word(bad, ("x", "y"))
