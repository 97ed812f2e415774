"""
Labeling search: optimality witness or augmenting space-walk.

Given a matching, the search seeds every column vertex with its
nonzero kernel space and repeatedly looks for a triple
(alpha, beta, Y) — an off-matching edge alpha-beta together with a
label Y at beta whose orthogonal space through the block fails to
contain the running intersection X*_alpha.  Each triple either ends
the search with a walk (case A), extends labels across an isolated
rank-2 edge (case B), or injects the labeling's spaces along the
longest inner walk of a rank-1 component (case C).  When no triple
remains, the label intersections/sums form a dual optimality
witness.  Back pointers recorded at every label addition let the walk
be reconstructed by simple reversal.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactfield import (
    Subspace,
    contains,
    perp,
    right_kernel,
    subspace_intersect,
    subspace_sum,
)
from .matching import (
    Witness,
    a_vertex,
    b_vertex,
    edge_rank,
    is_isolated_rank2,
    other_sign,
)
from .spacewalk import analyze_walk


@dataclass
class SearchOutcome:
    witness: object = None
    walk: list = None


class SearchInvariantError(AssertionError):
    """An internal contract of the search was violated."""


def _x_star(field, labels, v):
    out = Subspace.full(field)
    for Z in labels.get(v, []):
        out = subspace_intersect(out, Z)
    return out


def _basis(field, Z):
    if Z.dim == 1:
        return (Z.rep,)
    return ((field.one, field.zero), (field.zero, field.one))


def _orthogonal(field, M, X, Y):
    """Whether x^T M y = 0 for every x in X and y in Y.

    Division-free equivalent of contains(perp(Y, M, "right"), X); used
    in the hot scan so no representative is built for spaces that are
    only tested and discarded.
    """
    if X.dim == 0 or Y.dim == 0:
        return True
    (a, b), (c, d) = M.entries
    F = field
    for x0, x1 in _basis(F, X):
        r0 = F.add(F.mul(x0, a), F.mul(x1, c))
        r1 = F.add(F.mul(x0, b), F.mul(x1, d))
        for y0, y1 in _basis(F, Y):
            s = F.add(F.mul(r0, y0), F.mul(r1, y1))
            if not F.is_zero(s):
                return False
    return True


def longest_inner_walk(state, alpha, sign):
    """The longest inner walk in alpha's component starting with an
    edge of the given sign.

    Step edges carry the starting sign; each continuation crosses a
    rank-2 connector of the opposite sign.  The walk stops at the
    component's end, at a rank-1 connector, or (as a guard on cycles)
    just before reusing its first edge.

    Returns:
        The vertex sequence [alpha, beta_1, alpha_2, ...] ending at a
        column vertex, or None when alpha has no edge of that sign.
    """
    A = state.A
    comp = state.component_of(alpha)
    if comp is None:
        return None
    incident = {}
    for e in comp["edges"]:
        ea, eb = a_vertex(e[0]), b_vertex(e[1])
        incident.setdefault(ea, []).append(e)
        incident.setdefault(eb, []).append(e)
    step = None
    for e in incident.get(alpha, []):
        if state.coloring[e] == sign:
            step = e
            break
    if step is None:
        return None
    first = step
    verts = [alpha]
    v = alpha
    while True:
        # take the step edge to its column vertex
        b = b_vertex(step[1])
        verts.append(b)
        # continuation: the other edge at b must exist and be rank-2
        nxt = [e for e in incident.get(b, []) if e != step]
        if not nxt:
            break
        conn = nxt[0]
        if edge_rank(A, conn) != 2:
            break
        a2 = a_vertex(conn[0])
        verts.append(a2)
        nxt2 = [e for e in incident.get(a2, []) if e != conn]
        if not nxt2:
            # dead end on a row vertex: retreat to the last column vertex
            verts.pop()
            break
        step = nxt2[0]
        if step == first:
            # all-rank-2 cycle guard: do not reuse the starting edge
            verts.pop()
            break
    return verts


def back_track(back, start):
    """Reverse the back-pointer chain from a (vertex, space) pair into
    the underlying vertex walk of the augmenting space-walk."""
    verts = [start[0]]
    pair = start
    guard = 0
    while pair in back:
        pair = back[pair]
        verts.append(pair[0])
        guard += 1
        if guard > 4 * len(verts) + 10000:
            raise SearchInvariantError("back-pointer cycle")
    verts.reverse()
    return verts


def find_witness_or_walk(state, A, trace=None):
    """Run the labeling procedure on a matching.

    Returns:
        SearchOutcome with either a Witness (maximality certificate)
        or the vertex walk of an irredundant augmenting space-walk.
    """
    field = A.field
    I = state.edges
    labels = {}
    back = {}
    for b in range(A.nu):
        v = b_vertex(b)
        k = state.ker(v)
        if k.dim > 0:
            labels[v] = [k]

    # Running intersections of row-vertex labels and memoized scan
    # outcomes: labels only grow, so both stay valid.
    x_star = {a_vertex(a): Subspace.full(field) for a in range(A.mu)}
    ortho_cache = {}

    def add_label(v, Z, parent):
        lst = labels.setdefault(v, [])
        if Z in lst:
            return False
        lst.append(Z)
        back[(v, Z)] = parent
        if v[0] == "a":
            x_star[v] = subspace_intersect(x_star[v], Z)
        return True

    off_edges = [e for e in sorted(A.blocks) if e not in I]
    max_rounds = 4 * (A.mu + A.nu) * max(1, len(A.blocks)) + 16
    for _round in range(max_rounds):
        triple = None
        for e in off_edges:
            va, vb = a_vertex(e[0]), b_vertex(e[1])
            xs = x_star[va]
            for Y in labels.get(vb, []):
                key = (e, Y, xs)
                ok = ortho_cache.get(key)
                if ok is None:
                    ok = _orthogonal(field, A.blocks[e], xs, Y)
                    ortho_cache[key] = ok
                if not ok:
                    Xp = perp(Y, A.blocks[e], "right")
                    triple = (va, vb, Y, Xp, e)
                    break
            if triple:
                break
        if triple is None:
            X = {a: x_star[a_vertex(a)] for a in range(A.mu)}
            Yw = {}
            for b in range(A.nu):
                s = Subspace.zero(field)
                for Z in labels.get(b_vertex(b), []):
                    s = subspace_sum(s, Z)
                Yw[b] = s
            return SearchOutcome(witness=Witness(X=X, Y=Yw))

        va, vb, Y, Xp, e = triple
        deg = state.degree(va)
        comp = state.component_of(va)
        iso = comp is not None and is_isolated_rank2(comp, state.A)
        ker = state.ker(va)

        if deg == 0 or (not iso and deg == 1 and Xp != ker):
            if trace:
                trace(f"search: case A at edge {e}")
            back[(va, Xp)] = (vb, Y)
            verts = back_track(back, (va, Xp))
            sw = analyze_walk(state, verts)
            if not sw.ok:
                raise SearchInvariantError(
                    f"search produced an invalid walk: {sw.problems}"
                )
            return SearchOutcome(walk=verts)

        if iso:
            if trace:
                trace(f"search: case B at edge {e}")
            add_label(va, Xp, (vb, Y))
            iso_edge = comp["edges"][0]
            vb2 = b_vertex(iso_edge[1])
            Yp = perp(Xp, A.blocks[iso_edge], "left")
            add_label(vb2, Yp, (va, Xp))
            continue

        # case C: alpha in a rank-1 component with degree 2, or degree 1
        # with the orthogonal space equal to its kernel space
        if trace:
            trace(f"search: case C at edge {e}")
        Up = state.labels[va]["+"]
        Um = state.labels[va]["-"]
        if Xp == Up:
            additions = [("+", Up)]
        elif Xp == Um:
            additions = [("-", Um)]
        else:
            additions = [("+", Up), ("-", Um)]
        progressed = False
        for sign, X in additions:
            if not add_label(va, X, (vb, Y)):
                continue
            progressed = True
            walk = longest_inner_walk(state, va, sign)
            if walk is None:
                continue
            prev = (va, X)
            for i in range(1, len(walk)):
                g = walk[i]
                gsign = sign if g[0] == "a" else other_sign(sign)
                Z = state.labels[g][gsign]
                add_label(g, Z, prev)
                prev = (g, Z)
        if not progressed:
            raise SearchInvariantError(
                f"no label progress on triple at edge {e}"
            )

    raise SearchInvariantError("labeling procedure failed to terminate")
