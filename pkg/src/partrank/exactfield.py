"""
Exact field arithmetic and 2-dimensional linear algebra.

Provides arbitrary-precision rationals and prime fields GF(p), 2x2
matrices over those fields, subspaces of F^2 with canonical
representatives, kernels, and orthogonal spaces with respect to the
bilinear form (x, y) -> x^T M y.
"""

from __future__ import annotations

from fractions import Fraction


class Rationals:
    """The field Q; elements are `Fraction` values (always lowest terms)."""

    name = "Q"

    def el(self, v):
        """Coerce an int, Fraction, or "num/den" string to a field element."""
        if isinstance(v, Fraction):
            return v
        if isinstance(v, str):
            return Fraction(v)
        return Fraction(v)

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a

    def is_zero(self, a):
        return a == 0

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "Q"


class PrimeField:
    """The field GF(p) for a prime p; elements are ints in [0, p)."""

    def __init__(self, p):
        if p < 2 or not _is_prime(p):
            raise ValueError(f"modulus not prime: {p}")
        self.p = p
        self.name = f"GF({p})"

    def el(self, v):
        if isinstance(v, str):
            if "/" in v:
                num, den = v.split("/")
                return self.mul(int(num) % self.p, self.inv(int(den) % self.p))
            v = int(v)
        if isinstance(v, Fraction):
            return self.mul(v.numerator % self.p, self.inv(v.denominator % self.p))
        return v % self.p

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def __eq__(self, other):
        return isinstance(other, PrimeField) and self.p == other.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return self.name


def _is_prime(n):
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# Optional instrumentation: when enabled, records the largest
# numerator/denominator magnitude seen while canonicalizing dim-1
# representatives over Q.
rep_stats = {"enabled": False, "max_magnitude": 0}


def enable_rep_stats():
    rep_stats["enabled"] = True
    rep_stats["max_magnitude"] = 0


def disable_rep_stats():
    rep_stats["enabled"] = False


class Mat2:
    """A 2x2 matrix over a field.

    Entries are stored as a tuple of row tuples of field elements.
    """

    __slots__ = ("field", "entries")

    def __init__(self, field, entries):
        self.field = field
        self.entries = (
            (field.el(entries[0][0]), field.el(entries[0][1])),
            (field.el(entries[1][0]), field.el(entries[1][1])),
        )

    def __eq__(self, other):
        return (
            isinstance(other, Mat2)
            and self.field == other.field
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.field, self.entries))

    def __repr__(self):
        return f"Mat2({self.entries})"

    def is_zero(self):
        F = self.field
        return all(F.is_zero(e) for row in self.entries for e in row)


def mat2_rank(M):
    """Rank of a 2x2 matrix, in {0, 1, 2}."""
    F = M.field
    (a, b), (c, d) = M.entries
    det = F.sub(F.mul(a, d), F.mul(b, c))
    if not F.is_zero(det):
        return 2
    if M.is_zero():
        return 0
    return 1


class Subspace:
    """A subspace of F^2: dimension 0, 1, or 2.

    A dim-1 subspace stores a canonical representative vector whose
    first nonzero coordinate equals 1, so equality of subspaces reduces
    to equality of representatives.
    """

    __slots__ = ("field", "dim", "rep")

    def __init__(self, field, dim, rep=None):
        self.field = field
        self.dim = dim
        if dim == 1:
            if rep is None:
                raise ValueError("dim-1 subspace requires a representative")
            self.rep = _canonicalize(field, (field.el(rep[0]), field.el(rep[1])))
        else:
            self.rep = None

    @classmethod
    def zero(cls, field):
        return cls(field, 0)

    @classmethod
    def full(cls, field):
        return cls(field, 2)

    @classmethod
    def line(cls, field, v):
        return cls(field, 1, v)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.field == other.field
            and self.dim == other.dim
            and self.rep == other.rep
        )

    def __hash__(self):
        return hash((self.field, self.dim, self.rep))

    def __repr__(self):
        if self.dim == 0:
            return "Subspace({0})"
        if self.dim == 2:
            return "Subspace(F^2)"
        return f"Subspace(span{{{self.rep}}})"


def _canonicalize(field, v):
    """Scale a nonzero vector so its first nonzero coordinate is 1."""
    a, b = v
    if field.is_zero(a):
        if field.is_zero(b):
            raise ValueError("zero vector has no canonical line form")
        v = (field.zero, field.one)
    else:
        inv = field.inv(a)
        v = (field.one, field.mul(b, inv))
    if rep_stats["enabled"] and isinstance(field, Rationals):
        for coord in v:
            mag = max(abs(coord.numerator), abs(coord.denominator))
            if mag > rep_stats["max_magnitude"]:
                rep_stats["max_magnitude"] = mag
    return v


def _line_kernel(field, row):
    """The subspace {v : row[0]*v0 + row[1]*v1 = 0} of F^2."""
    r0, r1 = row
    if field.is_zero(r0) and field.is_zero(r1):
        return Subspace.full(field)
    return Subspace.line(field, (field.neg(r1), r0))


def left_kernel(M):
    """The subspace {x : x^T M = 0}."""
    F = M.field
    (a, b), (c, d) = M.entries
    return subspace_intersect(_line_kernel(F, (a, c)), _line_kernel(F, (b, d)))


def right_kernel(M):
    """The subspace {y : M y = 0}."""
    F = M.field
    (a, b), (c, d) = M.entries
    return subspace_intersect(_line_kernel(F, (a, b)), _line_kernel(F, (c, d)))


def perp(Z, M, side):
    """Orthogonal space of Z with respect to the bilinear form of M.

    Args:
        Z: Subspace of the row space (side="left") or column space
            (side="right").
        M: Mat2 defining the form (x, y) -> x^T M y.
        side: "left" if Z consists of row vectors x, "right" if Z
            consists of column vectors y.

    Returns:
        For side="left": {y : x^T M y = 0 for all x in Z}.
        For side="right": {x : x^T M y = 0 for all y in Z}.
    """
    F = M.field
    if Z.dim == 0:
        return Subspace.full(F)
    if Z.dim == 2:
        return right_kernel(M) if side == "left" else left_kernel(M)
    (a, b), (c, d) = M.entries
    x0, x1 = Z.rep
    if side == "left":
        row = (F.add(F.mul(x0, a), F.mul(x1, c)), F.add(F.mul(x0, b), F.mul(x1, d)))
    elif side == "right":
        row = (F.add(F.mul(a, x0), F.mul(b, x1)), F.add(F.mul(c, x0), F.mul(d, x1)))
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return _line_kernel(F, row)


def subspace_sum(a, b):
    """The sum a + b of two subspaces of F^2."""
    if a.dim == 2 or b.dim == 2:
        return Subspace.full(a.field)
    if a.dim == 0:
        return b
    if b.dim == 0:
        return a
    if a == b:
        return a
    return Subspace.full(a.field)


def subspace_intersect(a, b):
    """The intersection of two subspaces of F^2."""
    if a.dim == 2:
        return b
    if b.dim == 2:
        return a
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.field)
    if a == b:
        return a
    return Subspace.zero(a.field)


def contains(a, b):
    """Whether subspace a contains subspace b."""
    return subspace_intersect(a, b) == b


def free_line(field, forbidden):
    """A deterministic dim-1 subspace avoiding the given subspaces.

    Picks the first of span{(1,0)}, span{(0,1)}, span{(1,1)} equal to
    none of the forbidden spaces.  At most two lines can be forbidden,
    so a choice always exists.
    """
    for v in ((1, 0), (0, 1), (1, 1)):
        cand = Subspace.line(field, v)
        if all(cand != f for f in forbidden):
            return cand
    raise ValueError("no free line available: too many forbidden spaces")
