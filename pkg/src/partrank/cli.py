"""
Command-line surface: solve instances, verify certificates, generate
random instances, and run the independent rank oracles.

Exit codes: 0 success, 2 parse/usage error, 3 internal invariant
breach.  All results go to stdout as JSON with sorted keys; traces go
to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from .exactfield import Mat2, PrimeField, Rationals, mat2_rank
from .instance import ParseError, PartitionedMatrix, load_file, save
from .matching import check_matching, r_value
from .oracle import (
    brute_force_max_matching,
    dense_rank,
    monte_carlo_rank,
    solve,
    verify_witness,
)


def _parse_field_name(name):
    if name == "Q":
        return Rationals()
    if name.startswith("gf"):
        try:
            return PrimeField(int(name[2:]))
        except ValueError as exc:
            raise ParseError(f"bad field {name!r}: {exc}") from None
    raise ParseError(f"unrecognized field {name!r} (use Q or gf<p>)")


def generate_instance(mu, nu, density, rank1_fraction, field, seed):
    """A reproducible random instance.

    Each block is present independently with probability `density`;
    present blocks are rank-1 (a random outer product) with
    probability `rank1_fraction`, else random rank-2.  Entries are
    single-digit integers over Q and uniform residues over GF(p).
    """
    if not (0 <= density <= 1 and 0 <= rank1_fraction <= 1):
        raise ValueError("density and rank1_fraction must lie in [0, 1]")
    if isinstance(field, str):
        field = _parse_field_name(field)
    rng = random.Random(seed)
    rational = isinstance(field, Rationals)

    def scalar():
        if rational:
            return Fraction(rng.randint(-9, 9))
        return field.el(rng.randrange(field.p))

    def nonzero_vec():
        while True:
            v = (scalar(), scalar())
            if v[0] != field.zero or v[1] != field.zero:
                return v

    def rank1_block():
        u = nonzero_vec()
        v = nonzero_vec()
        return Mat2(
            field,
            (
                (field.mul(u[0], v[0]), field.mul(u[0], v[1])),
                (field.mul(u[1], v[0]), field.mul(u[1], v[1])),
            ),
        )

    def rank2_block():
        while True:
            M = Mat2(field, ((scalar(), scalar()), (scalar(), scalar())))
            if mat2_rank(M) == 2:
                return M

    blocks = {}
    for a in range(mu):
        for b in range(nu):
            if rng.random() >= density:
                continue
            if rng.random() < rank1_fraction:
                blocks[(a, b)] = rank1_block()
            else:
                blocks[(a, b)] = rank2_block()
    return PartitionedMatrix(mu, nu, field, blocks)


def _entry_json(field, e):
    if isinstance(field, Rationals):
        f = Fraction(e)
        if f.denominator == 1:
            return int(f.numerator)
        return f"{f.numerator}/{f.denominator}"
    return int(e)


def _subspace_json(field, Z):
    if Z.dim == 0:
        basis = []
    elif Z.dim == 1:
        basis = [[_entry_json(field, c) for c in Z.rep]]
    else:
        basis = [[1, 0], [0, 1]]
    return {"dim": Z.dim, "basis": basis}


def _result_json(A, res):
    F = A.field
    return {
        "rank": res.rank,
        "matching": [
            {"alpha": a + 1, "beta": b + 1}
            for (a, b) in sorted(res.matching.edges)
        ],
        "completion": [
            [_entry_json(F, e) for e in row] for row in res.completion
        ],
        "witness": {
            "X": {
                str(a + 1): _subspace_json(F, res.witness.X[a])
                for a in range(A.mu)
            },
            "Y": {
                str(b + 1): _subspace_json(F, res.witness.Y[b])
                for b in range(A.nu)
            },
        },
        "stats": {
            "augmentations": res.stats["augmentations"],
            "theta_trace_length": sum(
                len(t) for t in res.stats["theta_trace"]
            ),
            "wall_time": res.stats["wall_time"],
        },
    }


def _emit(doc):
    json.dump(doc, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def _trace_fn(enabled):
    if not enabled:
        return None
    return lambda line: print(line, file=sys.stderr)


def cmd_solve(args):
    A = load_file(args.path)
    tracing = args.trace or os.environ.get("PARTRANK_TRACE") == "1"
    res = solve(A, debug=args.verify, trace=_trace_fn(tracing))
    if args.verify:
        problems = []
        w = verify_witness(res.witness, A, res.rank)
        if w is not None:
            problems.append(f"witness: {w}")
        if dense_rank(res.completion, A.field) != res.rank:
            problems.append("completion rank mismatch")
        m = check_matching(res.matching.edges, A)
        if m is not None:
            problems.append(f"matching fails {m}")
        mc = monte_carlo_rank(A)
        if mc != res.rank:
            problems.append(f"oracle rank {mc} != {res.rank}")
        if problems:
            raise AssertionError("; ".join(problems))
    _emit(_result_json(A, res))
    return 0


def cmd_gen(args):
    A = generate_instance(
        args.mu, args.nu, args.density, args.rank1_fraction,
        args.field, args.seed,
    )
    sys.stdout.write(save(A).decode("utf-8"))
    sys.stdout.write("\n")
    return 0


def cmd_check(args):
    A = load_file(args.path)
    with open(args.matching, "rb") as fh:
        doc = json.loads(fh.read().decode("utf-8"))
    try:
        edges = frozenset(
            (item["alpha"] - 1, item["beta"] - 1) for item in doc
        )
    except (TypeError, KeyError) as exc:
        raise ParseError(f"bad matching document: {exc}") from None
    for e in edges:
        if e not in A.blocks:
            raise ParseError(f"matching uses absent block "
                             f"({e[0] + 1},{e[1] + 1})")
    bad = check_matching(edges, A)
    if bad is None:
        _emit({"ok": True, "r": r_value(edges, A)})
    else:
        _emit({"ok": False, "violated": bad[0], "detail": str(bad[1:])})
    return 0


def cmd_oracle(args):
    A = load_file(args.path)
    if args.brute:
        edges, r = brute_force_max_matching(A)
        _emit({
            "method": "brute_force",
            "rank": r,
            "matching": [
                {"alpha": a + 1, "beta": b + 1} for (a, b) in sorted(edges)
            ],
        })
    else:
        r = monte_carlo_rank(
            A, trials=args.trials, prime=args.prime, seed=args.seed
        )
        _emit({
            "method": "monte_carlo",
            "rank": r,
            "trials": args.trials,
            "prime": args.prime,
            "seed": args.seed,
        })
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="partrank",
        description="Exact rank of (2x2)-block partitioned symbolic "
                    "matrices with checkable certificates.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve an instance file")
    ps.add_argument("path")
    ps.add_argument("--verify", action="store_true",
                    help="run debug invariants and all certificate checks")
    ps.add_argument("--trace", action="store_true",
                    help="per-iteration logs to stderr")
    ps.set_defaults(fn=cmd_solve)

    pg = sub.add_parser("gen", help="generate a random instance")
    pg.add_argument("mu", type=int)
    pg.add_argument("nu", type=int)
    pg.add_argument("density", type=float)
    pg.add_argument("rank1_fraction", type=float)
    pg.add_argument("--field", default="Q", help="Q or gf<p>")
    pg.add_argument("--seed", type=int, default=0)
    pg.set_defaults(fn=cmd_gen)

    pc = sub.add_parser("check", help="check a matching against an instance")
    pc.add_argument("path")
    pc.add_argument("matching",
                    help="JSON list of {alpha, beta} records (1-based)")
    pc.set_defaults(fn=cmd_check)

    po = sub.add_parser("oracle", help="independent rank oracles")
    po.add_argument("path")
    po.add_argument("--brute", action="store_true")
    po.add_argument("--trials", type=int, default=5)
    po.add_argument("--prime", type=int, default=2**31 - 1)
    po.add_argument("--seed", type=int, default=0)
    po.set_defaults(fn=cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
