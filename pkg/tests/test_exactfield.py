from fractions import Fraction

import pytest

from partrank.exactfield import (
    Mat2,
    PrimeField,
    Rationals,
    Subspace,
    contains,
    disable_rep_stats,
    enable_rep_stats,
    free_line,
    left_kernel,
    mat2_rank,
    perp,
    rep_stats,
    right_kernel,
    subspace_intersect,
    subspace_sum,
)

Q = Rationals()
F101 = PrimeField(101)


def m(field, rows):
    return Mat2(field, tuple(tuple(field.el(x) for x in r) for r in rows))


def test_rationals_arithmetic():
    assert Q.add(Q.el(1), Q.el("1/2")) == Fraction(3, 2)
    assert Q.mul(Q.el("2/3"), Q.el("3/4")) == Fraction(1, 2)
    assert Q.inv(Q.el("-5/7")) == Fraction(-7, 5)
    assert Q.is_zero(Q.sub(Q.el(4), Q.el(4)))
    assert Q.neg(Q.one) == Fraction(-1)


def test_prime_field_arithmetic():
    assert F101.add(F101.el(100), F101.one) == F101.zero
    assert F101.mul(F101.el(51), F101.el(2)) == F101.one
    x = F101.el(37)
    assert F101.mul(x, F101.inv(x)) == F101.one
    with pytest.raises(ZeroDivisionError):
        F101.inv(F101.zero)


def test_prime_field_rejects_composite_modulus():
    with pytest.raises(ValueError):
        PrimeField(100)
    with pytest.raises(ValueError):
        PrimeField(1)


def test_field_equality_and_hash():
    assert PrimeField(101) == F101
    assert PrimeField(7) != F101
    assert Rationals() == Q
    assert hash(PrimeField(101)) == hash(F101)


def test_mat2_rank():
    assert mat2_rank(m(Q, [[0, 0], [0, 0]])) == 0
    assert mat2_rank(m(Q, [[1, 2], [2, 4]])) == 1
    assert mat2_rank(m(Q, [[1, 0], [0, 1]])) == 2
    assert mat2_rank(m(F101, [[3, 6], [5, 10]])) == 1


def test_subspace_canonical_representative():
    a = Subspace.line(Q, (Q.el(2), Q.el(4)))
    b = Subspace.line(Q, (Q.el(1), Q.el(2)))
    assert a == b
    assert a.rep == (Fraction(1), Fraction(2))
    c = Subspace.line(Q, (Q.el(0), Q.el(-7)))
    assert c.rep == (Fraction(0), Fraction(1))
    with pytest.raises(ValueError):
        Subspace.line(Q, (Q.zero, Q.zero))


def test_kernels():
    M = m(Q, [[1, 2], [2, 4]])
    lk = left_kernel(M)
    rk = right_kernel(M)
    assert lk.dim == 1 and rk.dim == 1
    assert lk == Subspace.line(Q, (Q.el(2), Q.el(-1)))
    assert rk == Subspace.line(Q, (Q.el(2), Q.el(-1)))
    assert left_kernel(m(Q, [[1, 0], [0, 1]])).dim == 0
    assert right_kernel(m(Q, [[0, 0], [0, 0]])).dim == 2


def test_perp():
    M = m(Q, [[1, 0], [0, 1]])
    Y = Subspace.line(Q, (Q.el(1), Q.el(0)))
    X = perp(Y, M, "right")
    # x^T M y = 0 for y = (1,0) forces x0 = 0
    assert X == Subspace.line(Q, (Q.el(0), Q.el(1)))
    assert perp(Subspace.zero(Q), M, "left").dim == 2
    assert perp(Subspace.full(Q), M, "left") == right_kernel(M)
    assert perp(Subspace.full(Q), M, "right") == left_kernel(M)
    with pytest.raises(ValueError):
        perp(Y, M, "sideways")


def test_perp_rank1_block():
    M = m(Q, [[1, 2], [2, 4]])
    # any y outside the right kernel maps to the same image line
    for v in ((1, 0), (0, 1), (1, 1)):
        Y = Subspace.line(Q, (Q.el(v[0]), Q.el(v[1])))
        if Y == right_kernel(M):
            continue
        assert perp(Y, M, "left") == left_kernel(M)


def test_sum_intersect_contains():
    e1 = Subspace.line(Q, (Q.one, Q.zero))
    e2 = Subspace.line(Q, (Q.zero, Q.one))
    assert subspace_sum(e1, e2).dim == 2
    assert subspace_sum(e1, e1) == e1
    assert subspace_intersect(e1, e2).dim == 0
    assert subspace_intersect(e1, Subspace.full(Q)) == e1
    assert contains(Subspace.full(Q), e1)
    assert contains(e1, Subspace.zero(Q))
    assert not contains(e1, e2)


def test_free_line_avoids_forbidden():
    e1 = Subspace.line(Q, (Q.one, Q.zero))
    e2 = Subspace.line(Q, (Q.zero, Q.one))
    c = free_line(Q, [e1, e2])
    assert c.dim == 1 and c != e1 and c != e2


def test_rep_stats_tracks_magnitude():
    enable_rep_stats()
    try:
        Subspace.line(Q, (Q.el("2/3"), Q.el("1000/7")))
        assert rep_stats["max_magnitude"] >= 1500
    finally:
        disable_rep_stats()
    before = rep_stats["max_magnitude"]
    Subspace.line(Q, (Q.one, Q.el(10 ** 9)))
    assert rep_stats["max_magnitude"] == before
