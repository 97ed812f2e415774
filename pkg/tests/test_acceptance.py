"""End-to-end acceptance suite.

A shared random suite of 1200 instances (200 per field x rank-1-fraction
cell, sizes drawn uniformly from 1..6) is solved once with all debug
invariants enabled and then checked against every independent oracle and
structural property.
"""

import math
import random
import time

import pytest

from partrank.cli import generate_instance
from partrank.exactfield import (
    disable_rep_stats,
    enable_rep_stats,
    rep_stats,
)
from partrank.matching import a_vertex, b_vertex, check_matching, ker_of
from partrank.oracle import (
    brute_force_max_matching,
    dense_rank,
    monte_carlo_rank,
    solve,
    verify_witness,
)

CELLS = [
    (field, r1f)
    for field in ("Q", "gf101")
    for r1f in (0.0, 0.5, 1.0)
]
PER_CELL = 200


@pytest.fixture(scope="session")
def suite():
    entries = []
    t0 = time.perf_counter()
    for ci, (field, r1f) in enumerate(CELLS):
        for k in range(PER_CELL):
            seed = 100000 * (ci + 1) + k
            rng = random.Random(seed)
            mu, nu = rng.randint(1, 6), rng.randint(1, 6)
            A = generate_instance(mu, nu, 0.8, r1f, field, seed)
            res = solve(A, debug=True)
            mc = monte_carlo_rank(A, trials=5, prime=2 ** 31 - 1, seed=seed)
            entries.append((A, res, mc))
    elapsed = time.perf_counter() - t0
    return entries, elapsed


def test_criterion_1_oracle_equivalence(suite):
    entries, elapsed = suite
    assert len(entries) == len(CELLS) * PER_CELL
    for A, res, mc in entries:
        assert res.rank == mc
    assert elapsed < 60.0


def test_criterion_2_brute_force_equivalence(suite):
    entries, _ = suite
    t0 = time.perf_counter()
    checked = 0
    for A, res, _ in entries:
        if A.mu > 3 or A.nu > 3:
            continue
        _, r = brute_force_max_matching(A)
        assert res.rank == r
        checked += 1
    assert checked > 0
    assert time.perf_counter() - t0 < 120.0


def test_criterion_3_triple_certificate(suite):
    entries, _ = suite
    for A, res, _ in entries:
        assert verify_witness(res.witness, A, res.rank) is None
        assert res.witness.value(A.mu, A.nu) == res.rank
        assert dense_rank(res.completion, A.field) == res.rank
        assert check_matching(res.matching.edges, A) is None


def test_criterion_4_gf2_completion():
    for k in range(50):
        seed = 700000 + k
        rng = random.Random(seed)
        mu, nu = rng.randint(1, 4), rng.randint(1, 4)
        A = generate_instance(mu, nu, 0.9, 0.5, "gf2", seed)
        res = solve(A, debug=True)
        assert dense_rank(res.completion, A.field) == res.rank


def _basis(Z, field):
    if Z.dim == 0:
        return []
    if Z.dim == 1:
        return [Z.rep]
    return [(field.one, field.zero), (field.zero, field.one)]


def test_criterion_5_kernel_direct_sum(suite):
    entries, _ = suite
    for A, res, _ in entries:
        F = A.field
        I = res.matching.edges
        rows = res.completion
        # left side: row-vertex kernels span the left kernel exactly
        ldims = 0
        for a in range(A.mu):
            K = ker_of(I, a_vertex(a), A)
            ldims += K.dim
            for x in _basis(K, F):
                for j in range(2 * A.nu):
                    s = F.add(
                        F.mul(x[0], rows[2 * a][j]),
                        F.mul(x[1], rows[2 * a + 1][j]),
                    )
                    assert F.is_zero(s)
        assert ldims == 2 * A.mu - res.rank
        # right side: column-vertex kernels span the right kernel exactly
        rdims = 0
        for b in range(A.nu):
            K = ker_of(I, b_vertex(b), A)
            rdims += K.dim
            for y in _basis(K, F):
                for i in range(2 * A.mu):
                    s = F.add(
                        F.mul(rows[i][2 * b], y[0]),
                        F.mul(rows[i][2 * b + 1], y[1]),
                    )
                    assert F.is_zero(s)
        assert rdims == 2 * A.nu - res.rank


def test_criterion_6_theta_strictly_decreases(suite):
    entries, _ = suite
    for A, res, _ in entries:
        for log in res.stats["theta_trace"]:
            assert all(b < a for a, b in zip(log, log[1:]))


def test_criterion_6_rank_progress(suite):
    # every augment call raises r by at least 1, so from the empty
    # matching the number of calls never exceeds the final rank
    entries, _ = suite
    for A, res, _ in entries:
        assert res.stats["augmentations"] <= res.rank


def test_criterion_6_augment_count_bound(suite):
    entries, _ = suite
    for A, res, _ in entries:
        assert res.stats["augmentations"] <= min(A.mu, A.nu), (
            f"mu={A.mu} nu={A.nu} rank={res.rank} "
            f"augmentations={res.stats['augmentations']}"
        )


def test_criterion_7_bit_size_sanity():
    enable_rep_stats()
    try:
        for k in range(10):
            A = generate_instance(6, 6, 1.0, 0.5, "Q", 910000 + k)
            solve(A, debug=True)
        assert rep_stats["max_magnitude"] < 10 ** 6
    finally:
        disable_rep_stats()


def test_criterion_8_scaling():
    times = {}
    for n in (10, 20, 40):
        A = generate_instance(n, n, 1.0, 0.0, "gf101", 42)
        t0 = time.perf_counter()
        res = solve(A)
        times[n] = time.perf_counter() - t0
        assert res.rank == 2 * n
    assert times[40] < 10.0
    slope = math.log(times[40] / times[10]) / math.log(4.0)
    assert slope < 6.0
