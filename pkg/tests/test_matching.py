import itertools
import json

from partrank.cli import generate_instance
from partrank.exactfield import Subspace
from partrank.instance import load
from partrank.matching import (
    MatchingState,
    Witness,
    a_vertex,
    b_vertex,
    canonical_substitution,
    check_matching,
    check_quasi_matching,
    decompose,
    edge_rank,
    eliminate,
    is_isolated_rank2,
    ker_of,
    r_value,
    verify_labeling,
)
from partrank.oracle import dense_rank

from conftest import fixture


def mk(mu, nu, blocks, field="Q"):
    return load(json.dumps({
        "mu": mu, "nu": nu, "field": field,
        "blocks": [
            {"alpha": a + 1, "beta": b + 1, "m": m}
            for (a, b), m in blocks.items()
        ],
    }).encode())


R2 = [[1, 0], [0, 1]]
R1 = [[1, 0], [0, 0]]


def test_edge_rank_and_r_value():
    A = fixture("e5")
    assert edge_rank(A, (0, 0)) == 1
    assert edge_rank(A, (0, 1)) == 2
    assert r_value(frozenset({(0, 1)}), A) == 2  # isolated rank-2 edge
    assert r_value(frozenset({(0, 0)}), A) == 1


def test_decompose_kinds():
    A = fixture("e4")
    comps, coloring = decompose(frozenset(A.edge_keys()), A)
    assert len(comps) == 1
    assert comps[0]["kind"] == "cycle"
    assert len(coloring) == 4
    comps2, _ = decompose(frozenset({(0, 0), (1, 1)}), A)
    assert all(c["kind"] == "path" for c in comps2)
    assert all(is_isolated_rank2(c, A) for c in comps2)


def test_check_matching_fixture_cases():
    A = fixture("e4")
    # two isolated rank-2 edges form a maximum matching of value 4
    I = frozenset({(0, 0), (1, 1)})
    assert check_matching(I, A) is None
    assert r_value(I, A) == 4
    # the full all-rank-2 4-cycle is not even a quasi-matching
    assert check_quasi_matching(frozenset(A.edge_keys()), A) is not None


def test_ker_of():
    A = fixture("e5")
    # unmatched vertex: full kernel
    assert ker_of(frozenset(), a_vertex(0), A).dim == 2
    # matched by one rank-1 edge: 1-dimensional kernel
    k = ker_of(frozenset({(0, 0)}), b_vertex(0), A)
    assert k.dim == 1
    # matched by one rank-2 edge: zero kernel
    assert ker_of(frozenset({(0, 1)}), b_vertex(1), A).dim == 0


def test_canonical_substitution_rank():
    A = fixture("e4")
    I = frozenset({(0, 0), (1, 1)})
    rows = canonical_substitution(I, A)
    assert len(rows) == 2 * A.mu and len(rows[0]) == 2 * A.nu
    assert dense_rank(rows, A.field) == r_value(I, A)


def test_eliminate_path_with_rank1_middle():
    # path b2 - a1 - b1 - a2 with ranks 2, 1, 2: the rank-1 connector
    # must be removed, leaving two isolated rank-2 edges (r = 4)
    A = mk(2, 2, {(0, 1): R2, (0, 0): R1, (1, 0): R2})
    I = frozenset(A.edge_keys())
    bad = check_quasi_matching(I, A)
    assert bad is not None and bad[0] == "Path"
    new, removed = eliminate(I, A)
    assert removed == {(0, 0)}
    assert check_matching(new, A) is None
    assert r_value(new, A) == 4


def test_eliminate_produces_matchings():
    for seed in range(12):
        A = generate_instance(3, 3, 0.8, 0.4, "Q" if seed % 2 else "gf101",
                              4200 + seed)
        edges = sorted(A.edge_keys())
        for k in range(min(len(edges), 5) + 1):
            for I in itertools.combinations(edges, k):
                I = frozenset(I)
                bad = check_quasi_matching(I, A)
                # elimination repairs path/cycle structure; it does not
                # repair degree or labeling failures
                if bad is not None and bad[0] not in ("Path", "Cycle"):
                    continue
                new, removed = eliminate(I, A)
                assert new <= I and removed == I - new
                # structure is always repaired; a valid labeling is only
                # guaranteed when the caller supplies label context
                bad2 = check_matching(new, A)
                assert bad2 is None or bad2[0] == "VL"


def test_matching_state_labels_are_valid():
    for name in ("e1", "e4", "e5"):
        A = fixture(name)
        for I in ({(0, 0)}, {(0, 0), (1, 1)} if A.mu > 1 else {(0, 0)}):
            I = frozenset(e for e in I if e in A.blocks)
            if check_matching(I, A) is not None:
                continue
            st = MatchingState.build(A, I)
            assert st.r == r_value(I, A)
            assert verify_labeling(I, A, st.coloring, st.labels) is None


def test_witness_value():
    Q = fixture("e1").field
    w = Witness(
        X={0: Subspace.zero(Q)},
        Y={0: Subspace.line(Q, (Q.one, Q.zero))},
    )
    assert w.value(1, 1) == 2 + 2 - 0 - 1
