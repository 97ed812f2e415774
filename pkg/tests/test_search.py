from partrank.cli import generate_instance
from partrank.matching import MatchingState
from partrank.oracle import brute_force_max_matching, verify_witness
from partrank.search import find_witness_or_walk, longest_inner_walk
from partrank.spacewalk import validate_augmenting

from conftest import fixture


def test_walk_from_empty_matching():
    A = fixture("e1")
    st = MatchingState.build(A, frozenset())
    out = find_witness_or_walk(st, A)
    assert out.witness is None
    assert out.walk == [("b", 0), ("a", 0)]
    assert validate_augmenting(st, out.walk) == []


def test_witness_at_maximum():
    A = fixture("e1")
    st = MatchingState.build(A, frozenset({(0, 0)}))
    out = find_witness_or_walk(st, A)
    assert out.walk is None
    assert verify_witness(out.witness, A, st.r) is None
    assert out.witness.value(A.mu, A.nu) == 2


def test_witness_value_matches_brute_force():
    for seed in range(15):
        A = generate_instance(3, 3, 0.7, 0.5, "gf101" if seed % 2 else "Q",
                              1300 + seed)
        edges, r = brute_force_max_matching(A)
        st = MatchingState.build(A, frozenset(edges))
        out = find_witness_or_walk(st, A)
        assert out.walk is None, seed
        assert verify_witness(out.witness, A, r) is None, seed


def test_walk_below_maximum():
    for seed in range(15):
        A = generate_instance(3, 3, 0.9, 0.3, "Q" if seed % 2 else "gf101",
                              2700 + seed)
        _, r = brute_force_max_matching(A)
        st = MatchingState.build(A, frozenset())
        if r == 0:
            continue
        out = find_witness_or_walk(st, A)
        assert out.walk is not None, seed
        assert validate_augmenting(st, out.walk) == [], seed


def test_search_is_deterministic():
    A = generate_instance(4, 4, 0.9, 0.5, "Q", 99)
    st = MatchingState.build(A, frozenset())
    a = find_witness_or_walk(st, A)
    b = find_witness_or_walk(st, A)
    assert a.walk == b.walk


def test_longest_inner_walk_rank1_component():
    A = fixture("e5")
    I = frozenset({(0, 0)})  # single rank-1 edge component
    from partrank.matching import check_matching

    assert check_matching(I, A) is None
    st = MatchingState.build(A, I)
    for sign in ("+", "-"):
        w = longest_inner_walk(st, ("a", 0), sign)
        if w is None:
            continue
        assert w[0] == ("a", 0)
        assert w[-1][0] == "b"
