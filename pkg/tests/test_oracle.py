from fractions import Fraction

import pytest

from partrank.cli import generate_instance
from partrank.exactfield import PrimeField, Rationals
from partrank.matching import check_matching
from partrank.oracle import (
    brute_force_max_matching,
    dense_rank,
    monte_carlo_rank,
    solve,
    verify_witness,
)

from conftest import fixture

Q = Rationals()
EXPECTED = {"e1": 2, "e2": 1, "e3": 1, "e4": 4, "e5": 4}


def test_dense_rank_rationals():
    rows = [
        [Fraction(1, 2), Fraction(1, 3)],
        [Fraction(3, 2), Fraction(1)],
        [Fraction(2), Fraction(4, 3)],
    ]
    assert dense_rank(rows, Q) == 1
    rows[1][1] = Fraction(2)
    assert dense_rank(rows, Q) == 2
    assert dense_rank([[Fraction(0)]], Q) == 0
    assert dense_rank([], Q) == 0


def test_dense_rank_gf2():
    F = PrimeField(2)
    rows = [[F.el(1), F.el(1)], [F.el(1), F.el(1)]]
    assert dense_rank(rows, F) == 1
    rows[1][1] = F.el(0)
    assert dense_rank(rows, F) == 2


def test_monte_carlo_on_fixtures():
    for name, want in EXPECTED.items():
        A = fixture(name)
        assert monte_carlo_rank(A) == want, name


def test_monte_carlo_small_fields():
    for seed in range(8):
        A = generate_instance(3, 3, 0.8, 0.5, "gf2", 5100 + seed)
        _, r = brute_force_max_matching(A)
        assert monte_carlo_rank(A) == r, seed


def test_brute_force():
    A = fixture("e4")
    edges, r = brute_force_max_matching(A)
    assert r == 4
    assert check_matching(frozenset(edges), A) is None
    big = generate_instance(4, 4, 1.0, 0.0, "gf101", 0)
    with pytest.raises(ValueError):
        brute_force_max_matching(big)


def test_verify_witness_rejects_wrong_value():
    A = fixture("e1")
    res = solve(A)
    assert verify_witness(res.witness, A, res.rank) is None
    assert verify_witness(res.witness, A, res.rank - 1) is not None


def test_solve_result_contents():
    A = fixture("e5")
    res = solve(A, debug=True)
    assert res.rank == 4
    assert check_matching(res.matching.edges, A) is None
    assert dense_rank(res.completion, A.field) == 4
    assert verify_witness(res.witness, A, 4) is None
    assert res.stats["augmentations"] == len(res.stats["theta_trace"])
    assert res.stats["wall_time"] >= 0


def test_solve_empty_instance():
    import json

    from partrank.instance import load

    A = load(json.dumps(
        {"mu": 1, "nu": 1, "field": "Q", "blocks": []}
    ).encode())
    res = solve(A)
    assert res.rank == 0
    assert res.matching.edges == frozenset()
    assert verify_witness(res.witness, A, 0) is None
