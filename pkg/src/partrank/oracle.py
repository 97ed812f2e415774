"""
Independent verification oracles.

Dense exact rank (fraction-free over Q, modular elsewhere), Monte
Carlo symbolic rank by random substitution over a large field,
optimality-witness checking, and brute-force maximum-matching
enumeration for tiny instances.  The solve() driver lives here too,
so its certificates can be checked against these oracles directly.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .exactfield import PrimeField, Rationals, Subspace, contains, perp
from .instance import PartitionedMatrix
from .matching import canonical_substitution, check_matching, r_value


@dataclass
class RankReport:
    rank: int
    method: str
    trials: int = 0
    prime: int = 0
    seed: int = 0

    def to_json(self):
        out = {"rank": self.rank, "method": self.method}
        if self.method == "montecarlo":
            out.update(trials=self.trials, prime=self.prime, seed=self.seed)
        return out


def _lcm(a, b):
    from math import gcd

    return a * b // gcd(a, b)


def _bareiss_rank(rows):
    """Rank of an integer matrix by fraction-free elimination."""
    M = [list(r) for r in rows]
    n = len(M)
    m = len(M[0]) if n else 0
    rank = 0
    prev = 1
    row = 0
    for col in range(m):
        pivot = None
        for r in range(row, n):
            if M[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != row:
            M[row], M[pivot] = M[pivot], M[row]
        for r in range(row + 1, n):
            for c in range(col + 1, m):
                M[r][c] = (M[row][col] * M[r][c] - M[r][col] * M[row][c]) // prev
            M[r][col] = 0
        prev = M[row][col]
        rank += 1
        row += 1
        if row == n:
            break
    return rank


def _generic_rank(rows, field):
    """Rank by Gaussian elimination using the field's operations."""
    M = [list(r) for r in rows]
    n = len(M)
    m = len(M[0]) if n else 0
    rank = 0
    row = 0
    for col in range(m):
        pivot = None
        for r in range(row, n):
            if not field.is_zero(M[r][col]):
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != row:
            M[row], M[pivot] = M[pivot], M[row]
        inv = field.inv(M[row][col])
        for r in range(row + 1, n):
            if field.is_zero(M[r][col]):
                continue
            factor = field.mul(M[r][col], inv)
            for c in range(col, m):
                M[r][c] = field.sub(M[r][c], field.mul(factor, M[row][c]))
        rank += 1
        row += 1
        if row == n:
            break
    return rank


def dense_rank(rows, field):
    """Exact rank of a dense matrix given as a list of row lists."""
    if not rows or not rows[0]:
        return 0
    if isinstance(field, Rationals):
        int_rows = []
        for r in rows:
            den = 1
            for e in r:
                den = _lcm(den, Fraction(e).denominator)
            int_rows.append([int(Fraction(e) * den) for e in r])
        return _bareiss_rank(int_rows)
    return _generic_rank(rows, field)


# ---------------------------------------------------------------------------
# Extension fields GF(p^k), used to embed small-characteristic
# instances into a field large enough for reliable random substitution.
# ---------------------------------------------------------------------------


class ExtensionField:
    """GF(p^k); elements are coefficient tuples of length k over GF(p).

    The defining irreducible polynomial is found by a deterministic
    scan, so the field is reproducible.
    """

    def __init__(self, p, k):
        self.p = p
        self.k = k
        self.base = PrimeField(p)
        self.modulus = self._find_irreducible()
        self.name = f"GF({p}^{k})"

    # polynomial helpers; polynomials are tuples, lowest degree first
    def _poly_trim(self, f):
        while f and f[-1] == 0:
            f = f[:-1]
        return f

    def _poly_mulmod(self, f, g):
        p, k = self.p, self.k
        res = [0] * (len(f) + len(g) - 1) if f and g else []
        for i, a in enumerate(f):
            if a == 0:
                continue
            for j, b in enumerate(g):
                res[i + j] = (res[i + j] + a * b) % p
        # reduce modulo the monic degree-k modulus
        mod = self.modulus
        for d in range(len(res) - 1, k - 1, -1):
            c = res[d]
            if c == 0:
                continue
            res[d] = 0
            for i in range(k):
                res[d - k + i] = (res[d - k + i] - c * mod[i]) % p
        return tuple(self._poly_trim(tuple(res)))

    def _poly_powmod(self, f, e):
        result = (1,)
        base = f
        while e:
            if e & 1:
                result = self._poly_mulmod(result, base)
            base = self._poly_mulmod(base, base)
            e >>= 1
        return result

    def _poly_gcd(self, f, g):
        p = self.p
        f = list(self._poly_trim(tuple(f)))
        g = list(self._poly_trim(tuple(g)))
        while g:
            # f mod g
            inv = pow(g[-1], p - 2, p)
            while len(f) >= len(g) and f:
                c = f[-1] * inv % p
                shift = len(f) - len(g)
                for i in range(len(g)):
                    f[shift + i] = (f[shift + i] - c * g[i]) % p
                f = list(self._poly_trim(tuple(f)))
            f, g = g, f
        return tuple(f)

    def _is_irreducible(self, mod):
        self.modulus = mod
        p, k = self.p, self.k
        x = (0, 1)
        xq = self._poly_powmod(x, p ** k)
        if self._poly_trim(xq) != self._poly_trim(x):
            return False
        divisors = set()
        n, d = k, 2
        while d * d <= n:
            if n % d == 0:
                divisors.add(d)
                while n % d == 0:
                    n //= d
            d += 1
        if n > 1:
            divisors.add(n)
        full = tuple(mod) + (1,)
        for r in divisors:
            xe = self._poly_powmod(x, p ** (k // r))
            diff = list(xe) + [0] * max(0, 2 - len(xe))
            diff[1] = (diff[1] - 1) % p
            g = self._poly_gcd(self._poly_trim(tuple(diff)), full)
            if len(g) != 1:
                return False
        return True

    def _find_irreducible(self):
        p, k = self.p, self.k
        if k == 1:
            return (0,)
        # scan lower coefficients in increasing integer encoding
        n = 1
        while True:
            coeffs = []
            v = n
            for _ in range(k):
                coeffs.append(v % p)
                v //= p
            if v == 0:
                mod = tuple(coeffs)
                if self._is_irreducible(mod):
                    return mod
            n += 1

    def el(self, v):
        if isinstance(v, tuple):
            return v
        v = self.base.el(v)
        return (v,) if v else ()

    @property
    def zero(self):
        return ()

    @property
    def one(self):
        return (1,)

    def add(self, a, b):
        p = self.p
        n = max(len(a), len(b))
        res = tuple(
            ((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p
            for i in range(n)
        )
        return tuple(self._poly_trim(res))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        return tuple((-c) % self.p for c in a)

    def mul(self, a, b):
        return self._poly_mulmod(a, b)

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return self._poly_powmod(a, self.p ** self.k - 2)

    def is_zero(self, a):
        return len(a) == 0

    def random(self, rng):
        v = rng.randrange(self.p ** self.k)
        coeffs = []
        for _ in range(self.k):
            coeffs.append(v % self.p)
            v //= self.p
        return tuple(self._poly_trim(tuple(coeffs)))

    def __eq__(self, other):
        return (
            isinstance(other, ExtensionField)
            and self.p == other.p
            and self.k == other.k
        )

    def __hash__(self):
        return hash(("GFext", self.p, self.k))

    def __repr__(self):
        return self.name


def _substitution_field(A, prime):
    """A field of size >= prime suitable for random substitution,
    plus a map embedding instance entries into it."""
    if isinstance(A.field, Rationals):
        F = PrimeField(prime)

        def embed(e):
            f = Fraction(e)
            return F.mul(f.numerator % prime, F.inv(f.denominator % prime))

        return F, embed
    p = A.field.p
    if p >= prime:
        return A.field, lambda e: e
    k = 1
    size = p
    while size < prime:
        size *= p
        k += 1
    F = ExtensionField(p, k)
    return F, lambda e: F.el(e)


def monte_carlo_rank(A, trials=5, prime=2**31 - 1, seed=0):
    """Symbolic rank by random substitution (max over trials).

    Each block's indeterminate is drawn uniformly from a field of size
    at least `prime`; per-trial failure probability is at most
    degree / field size.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    F, embed = _substitution_field(A, prime)
    best = 0
    size = F.p ** F.k if isinstance(F, ExtensionField) else F.p
    for t in range(trials):
        rng = random.Random(seed + t)
        rows = [[F.zero] * (2 * A.nu) for _ in range(2 * A.mu)]
        for (a, b), M in sorted(A.blocks.items()):
            if isinstance(F, ExtensionField):
                x = F.random(rng)
            else:
                x = rng.randrange(size)
            for i in range(2):
                for j in range(2):
                    rows[2 * a + i][2 * b + j] = F.mul(x, embed(M.entries[i][j]))
        best = max(best, _generic_rank(rows, F))
    return best


def verify_witness(w, A, claimed_r):
    """Check a dual optimality witness against the claimed rank.

    Returns:
        None when every orthogonality constraint holds and the value
        2*mu + 2*nu - sum dim X - sum dim Y equals claimed_r; else a
        string describing the first failure.
    """
    for (a, b) in sorted(A.blocks):
        X = w.X[a]
        Y = w.Y[b]
        M = A.blocks[(a, b)]
        if not contains(perp(X, M, "left"), Y):
            return f"orthogonality fails on block ({a + 1},{b + 1})"
    value = 2 * A.mu + 2 * A.nu
    value -= sum(w.X[a].dim for a in range(A.mu))
    value -= sum(w.Y[b].dim for b in range(A.nu))
    if value != claimed_r:
        return f"value mismatch: witness gives {value}, claimed {claimed_r}"
    return None


def brute_force_max_matching(A):
    """Maximum matching by exhaustive enumeration (tiny instances).

    Returns:
        (edge_set, r) maximizing r over all edge subsets passing
        check_matching; ties broken by the lexicographically smallest
        sorted edge list.

    Raises:
        ValueError: When mu * nu exceeds the enumeration budget of 12.
    """
    if A.mu * A.nu > 12:
        raise ValueError("instance too large for brute force (mu*nu > 12)")
    E = sorted(A.blocks)
    best = (frozenset(), 0)
    best_key = ()
    for mask in range(1 << len(E)):
        I = frozenset(E[i] for i in range(len(E)) if mask >> i & 1)
        if check_matching(I, A) is not None:
            continue
        r = r_value(I, A)
        key = tuple(sorted(I))
        if r > best[1] or (r == best[1] and (best[0] and key < best_key)):
            best = (I, r)
            best_key = key
    return best


@dataclass
class SolveResult:
    rank: int
    matching: object
    completion: list
    witness: object
    stats: dict


def solve(A, debug=False, trace=None):
    """Full solve: maximum matching, rank, and all three certificates.

    Repeatedly runs the labeling search on the current matching; each
    augmenting space-walk is turned into a strictly larger matching
    until the search produces an optimality witness.
    """
    from .augment import augment
    from .matching import MatchingState
    from .search import find_witness_or_walk

    t0 = time.monotonic()
    state = MatchingState.build(A, frozenset())
    augmentations = 0
    theta_log = []
    while True:
        outcome = find_witness_or_walk(state, A, trace=trace)
        if outcome.witness is not None:
            break
        state, log = augment(state, outcome.walk, A, debug=debug, trace=trace)
        augmentations += 1
        theta_log.append(log)
        if debug and augmentations > 2 * min(A.mu, A.nu):
            # Each augmentation raises r by at least 1 and r is capped by
            # 2 * min(mu, nu), so this bound can never trip.
            raise AssertionError("augmentation count exceeded 2*min(mu, nu)")
    stats = {
        "augmentations": augmentations,
        "theta_trace": theta_log,
        "wall_time": time.monotonic() - t0,
    }
    return SolveResult(
        rank=state.r,
        matching=state,
        completion=canonical_substitution(state.edges, A),
        witness=outcome.witness,
        stats=stats,
    )
