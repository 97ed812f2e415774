"""
Partitioned-matrix data model and (de)serialization.

A partitioned matrix is a mu x nu grid of 2x2 blocks over an exact
field.  Only nonzero blocks are stored; they induce a bipartite graph
whose left vertices are row-block indices and right vertices are
column-block indices.  Indices are 1-based in the JSON file format and
0-based internally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .exactfield import Mat2, PrimeField, Rationals, mat2_rank


class ParseError(ValueError):
    """Raised on a malformed instance document."""


@dataclass(frozen=True)
class Edge:
    """A nonzero block, viewed as a bipartite edge with cached rank."""

    alpha: int
    beta: int
    rank: int

    @property
    def key(self):
        return (self.alpha, self.beta)


class PartitionedMatrix:
    """A mu x nu grid of 2x2 blocks over an exact field.

    Attributes:
        mu: Number of row blocks.
        nu: Number of column blocks.
        field: Rationals() or PrimeField(p).
        blocks: Dict (alpha, beta) -> Mat2, 0-based keys, nonzero only.
    """

    def __init__(self, mu, nu, field, blocks):
        if mu < 0 or nu < 0:
            raise ParseError("mu and nu must be nonnegative")
        self.mu = mu
        self.nu = nu
        self.field = field
        self.blocks = {}
        for (a, b), M in blocks.items():
            if not (0 <= a < mu and 0 <= b < nu):
                raise ParseError(f"block index out of range: ({a + 1},{b + 1})")
            if not isinstance(M, Mat2):
                M = Mat2(field, M)
            if M.is_zero():
                raise ParseError(f"zero block listed explicitly: ({a + 1},{b + 1})")
            self.blocks[(a, b)] = M
        self._edges = None

    def edges(self):
        """All nonzero blocks as Edge records, sorted by (alpha, beta)."""
        if self._edges is None:
            self._edges = [
                Edge(a, b, mat2_rank(M))
                for (a, b), M in sorted(self.blocks.items())
            ]
        return self._edges

    def edge_keys(self):
        return [e.key for e in self.edges()]

    def block(self, a, b):
        return self.blocks[(a, b)]

    def __eq__(self, other):
        return (
            isinstance(other, PartitionedMatrix)
            and self.mu == other.mu
            and self.nu == other.nu
            and self.field == other.field
            and self.blocks == other.blocks
        )

    def __repr__(self):
        return (
            f"PartitionedMatrix(mu={self.mu}, nu={self.nu}, "
            f"field={self.field}, |blocks|={len(self.blocks)})"
        )


def _parse_field(spec):
    if spec == "Q":
        return Rationals()
    if isinstance(spec, dict) and set(spec) == {"gf"}:
        p = spec["gf"]
        if not isinstance(p, int) or p < 2:
            raise ParseError(f"modulus not prime: {p}")
        try:
            return PrimeField(p)
        except ValueError:
            raise ParseError(f"modulus not prime: {p}") from None
    raise ParseError(f"unrecognized field spec: {spec!r}")


def _parse_entry(field, e):
    if isinstance(e, bool) or not isinstance(e, (int, str)):
        raise ParseError(f"bad matrix entry: {e!r}")
    try:
        return field.el(e)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad matrix entry {e!r}: {exc}") from None


def load(data):
    """Parse an instance document (bytes or str of JSON).

    Returns:
        A PartitionedMatrix.

    Raises:
        ParseError: On malformed documents, out-of-range or duplicate
            block keys, non-prime moduli, or explicitly listed zero
            blocks; the message names the offending key.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    for key in ("mu", "nu", "field", "blocks"):
        if key not in doc:
            raise ParseError(f"missing key: {key}")
    mu, nu = doc["mu"], doc["nu"]
    if not isinstance(mu, int) or not isinstance(nu, int) or mu < 1 or nu < 1:
        raise ParseError("mu and nu must be positive integers")
    field = _parse_field(doc["field"])
    blocks = {}
    for item in doc["blocks"]:
        if not isinstance(item, dict) or not {"alpha", "beta", "m"} <= set(item):
            raise ParseError(f"bad block record: {item!r}")
        a, b = item["alpha"], item["beta"]
        if not isinstance(a, int) or not isinstance(b, int):
            raise ParseError(f"bad block indices: ({a},{b})")
        if not (1 <= a <= mu and 1 <= b <= nu):
            raise ParseError(f"block index out of range: ({a},{b})")
        if (a - 1, b - 1) in blocks:
            raise ParseError(f"duplicate block: ({a},{b})")
        m = item["m"]
        if (
            not isinstance(m, list)
            or len(m) != 2
            or any(not isinstance(row, list) or len(row) != 2 for row in m)
        ):
            raise ParseError(f"block ({a},{b}): m must be a 2x2 array")
        entries = tuple(
            tuple(_parse_entry(field, e) for e in row) for row in m
        )
        M = Mat2(field, entries)
        if M.is_zero():
            raise ParseError(f"zero block listed explicitly: ({a},{b})")
        blocks[(a - 1, b - 1)] = M
    return PartitionedMatrix(mu, nu, field, blocks)


def _entry_to_json(field, e):
    if isinstance(field, Rationals):
        f = Fraction(e)
        if f.denominator == 1:
            return int(f.numerator)
        return f"{f.numerator}/{f.denominator}"
    return int(e)


def save(A):
    """Serialize a PartitionedMatrix to canonical JSON bytes."""
    field_spec = "Q" if isinstance(A.field, Rationals) else {"gf": A.field.p}
    doc = {
        "mu": A.mu,
        "nu": A.nu,
        "field": field_spec,
        "blocks": [
            {
                "alpha": a + 1,
                "beta": b + 1,
                "m": [
                    [_entry_to_json(A.field, e) for e in row]
                    for row in A.blocks[(a, b)].entries
                ],
            }
            for (a, b) in sorted(A.blocks)
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2).encode("utf-8")


def load_file(path):
    with open(path, "rb") as fh:
        return load(fh.read())
