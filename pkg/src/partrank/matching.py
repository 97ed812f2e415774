"""
Matching and quasi-matching structure over the block bipartite graph.

An edge subset I of the bipartite graph induced by a partitioned
matrix is a matching when it satisfies four conditions:

  (Deg)    every vertex has degree at most 2 in I;
  (Path)   every path component with at least two edges has rank-1
           edges at both ends;
  (Cycle)  every cycle component has a rank-1 edge in each of its two
           alternation classes;
  (VL)     a valid labeling exists: two distinct lines per incident
           vertex satisfying the orthogonality and kernel-pinning
           rules below.

Quasi-matchings relax (Cycle) to (q-Cycle): at least one rank-1 edge
per cycle.  This module provides the component decomposition with a
deterministic +/- edge coloring, labeling construction, the r value,
per-vertex kernels, the canonical 0/1 substitution, and the
elimination repair that turns a quasi-matching into a matching without
decreasing r.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .exactfield import (
    Subspace,
    contains,
    free_line,
    left_kernel,
    perp,
    right_kernel,
    subspace_intersect,
)


class StructureError(ValueError):
    """Raised when a structural precondition on an edge set fails."""


def a_vertex(alpha):
    return ("a", alpha)


def b_vertex(beta):
    return ("b", beta)


def edge_vertices(e):
    return (a_vertex(e[0]), b_vertex(e[1]))


def other_sign(s):
    return "-" if s == "+" else "+"


def degrees(I):
    """Vertex -> degree map over the edge set I."""
    deg = {}
    for (a, b) in I:
        for v in (a_vertex(a), b_vertex(b)):
            deg[v] = deg.get(v, 0) + 1
    return deg


def adjacency(I):
    """Vertex -> sorted list of incident edges."""
    adj = {}
    for e in sorted(I):
        for v in edge_vertices(e):
            adj.setdefault(v, []).append(e)
    return adj


def edge_rank(A, e):
    from .exactfield import mat2_rank

    return mat2_rank(A.blocks[e])


def decompose(I, A):
    """Partition I into path/cycle components with a proper coloring.

    Paths (including single edges) are traversed from their
    lexicographically smallest endpoint and colored alternately
    starting with "+".  Cycles are traversed from their smallest
    vertex toward the smaller of its two incident edges, first edge
    colored "+".

    Returns:
        (components, coloring) where each component is a dict with
        keys "kind" ("path" or "cycle"), "vertices" (traversal order)
        and "edges" (traversal order), and coloring maps each edge of
        I to "+" or "-".

    Raises:
        StructureError: If some vertex has degree greater than 2.
    """
    deg = degrees(I)
    for v, d in sorted(deg.items()):
        if d > 2:
            raise StructureError(f"degree {d} > 2 at vertex {v}")
    adj = adjacency(I)
    seen_edges = set()
    components = []
    coloring = {}

    endpoints = sorted(v for v, d in deg.items() if d == 1)
    for start in endpoints:
        if all(e in seen_edges for e in adj[start]):
            continue
        verts, edges = _traverse(adj, start, seen_edges)
        components.append({"kind": "path", "vertices": verts, "edges": edges})

    for start in sorted(adj):
        fresh = [e for e in adj[start] if e not in seen_edges]
        if not fresh:
            continue
        verts, edges = _traverse(adj, start, seen_edges, cycle=True)
        components.append({"kind": "cycle", "vertices": verts, "edges": edges})

    components.sort(key=lambda c: min(c["vertices"]))
    for comp in components:
        sign = "+"
        for e in comp["edges"]:
            coloring[e] = sign
            sign = other_sign(sign)
    return components, coloring


def _traverse(adj, start, seen_edges, cycle=False):
    verts = [start]
    edges = []
    v = start
    prev_edge = None
    while True:
        nxt = [e for e in adj[v] if e is not prev_edge and e not in seen_edges]
        if not nxt:
            break
        e = nxt[0]
        seen_edges.add(e)
        edges.append(e)
        va, vb = edge_vertices(e)
        v = vb if v == va else va
        prev_edge = e
        if cycle and v == start:
            return verts, edges
        verts.append(v)
    return verts, edges


def is_isolated_rank2(comp, A):
    """Whether a component is a single rank-2 edge."""
    return len(comp["edges"]) == 1 and edge_rank(A, comp["edges"][0]) == 2


def is_rank1_component(comp, A):
    """Whether a component contains a rank-1 edge (i.e. is not an
    isolated rank-2 edge)."""
    return not is_isolated_rank2(comp, A)


def isolated_rank2_edges(I, A):
    deg = degrees(I)
    out = []
    for e in sorted(I):
        va, vb = edge_vertices(e)
        if deg[va] == 1 and deg[vb] == 1 and edge_rank(A, e) == 2:
            out.append(e)
    return out


def r_value(I, A):
    """|I| plus the number of isolated rank-2 edges of I."""
    return len(I) + len(isolated_rank2_edges(I, A))


def ker_of(I, gamma, A):
    """The kernel space of a vertex with respect to I.

    Full space for an unmatched vertex; the side kernel of its edge if
    the vertex is incident to exactly one edge and that edge is
    rank-1; the zero space otherwise.
    """
    side, idx = gamma
    incident = [e for e in I if (e[0] if side == "a" else e[1]) == idx]
    F = A.field
    if not incident:
        return Subspace.full(F)
    if len(incident) == 1 and edge_rank(A, incident[0]) == 1:
        M = A.blocks[incident[0]]
        return left_kernel(M) if side == "a" else right_kernel(M)
    return Subspace.zero(F)


def canonical_substitution(I, A):
    """The dense 2mu x 2nu matrix with blocks kept on I, zero off I."""
    F = A.field
    rows = [[F.zero] * (2 * A.nu) for _ in range(2 * A.mu)]
    for (a, b) in I:
        M = A.blocks[(a, b)]
        for i in range(2):
            for j in range(2):
                rows[2 * a + i][2 * b + j] = M.entries[i][j]
    return rows


# ---------------------------------------------------------------------------
# Valid labelings
# ---------------------------------------------------------------------------
#
# A labeling assigns to every vertex incident to I two distinct lines
# (one per sign).  The rules:
#   * orthogonality: for every edge ab of I,
#       A_ab(U_a^+, V_b^-) = A_ab(U_a^-, V_b^+) = {0};
#   * pinning: for every rank-1 edge ab of I with color s,
#       U_a^s = left_kernel(A_ab) and V_b^s = right_kernel(A_ab).
#
# Rank-1 edges impose only pins (their orthogonality constraints are
# automatic), while rank-2 edges link U_a^t with V_b^(-t) bijectively
# through the orthogonal-space map.  Construction: place pins and any
# caller-provided seeds, propagate forced values through rank-2 links,
# then fill remaining slots (preferring caller-provided old labels)
# with rollback on conflict.


class LabelingFailure(Exception):
    """Valid labeling does not exist; carries the degenerate vertex."""

    def __init__(self, vertex):
        super().__init__(f"degenerate vertex {vertex}")
        self.vertex = vertex


def _rank2_links(I, A, coloring):
    """For each rank-2 edge of I, the two (slot, slot, edge) links.

    A slot is a (vertex, sign) pair.  Knowing one endpoint of a link
    forces the other through the orthogonal-space map of the block.
    """
    links = []
    for e in sorted(I):
        if edge_rank(A, e) != 2:
            continue
        va, vb = edge_vertices(e)
        links.append(((va, "+"), (vb, "-"), e))
        links.append(((va, "-"), (vb, "+"), e))
    return links


def _link_image(A, slot_from, slot_to, e, space):
    side = "left" if slot_from[0][0] == "a" else "right"
    return perp(space, A.blocks[e], side)


class _LabelBuilder:
    def __init__(self, I, A, coloring):
        self.I = I
        self.A = A
        self.coloring = coloring
        self.slots = {}
        self.link_of = {}
        for s1, s2, e in _rank2_links(I, A, coloring):
            self.link_of.setdefault(s1, []).append((s2, e))
            self.link_of.setdefault(s2, []).append((s1, e))
        self.vertices = sorted({v for e in I for v in edge_vertices(e)})

    def set_slot(self, slot, space, journal=None):
        """Set a slot and propagate through rank-2 links.

        Raises LabelingFailure on any conflict.  If journal is given,
        every newly set slot is recorded there for rollback.
        """
        stack = [(slot, space)]
        while stack:
            slot, space = stack.pop()
            if space.dim != 1:
                raise LabelingFailure(slot[0])
            cur = self.slots.get(slot)
            if cur is not None:
                if cur != space:
                    raise LabelingFailure(slot[0])
                continue
            partner = self.slots.get((slot[0], other_sign(slot[1])))
            if partner is not None and partner == space:
                raise LabelingFailure(slot[0])
            self.slots[slot] = space
            if journal is not None:
                journal.append(slot)
            for other, e in self.link_of.get(slot, []):
                stack.append((other, _link_image(self.A, slot, other, e, space)))

    def rollback(self, journal):
        for slot in journal:
            del self.slots[slot]

    def place_pins(self):
        for e in sorted(self.I):
            if edge_rank(self.A, e) != 1:
                continue
            s = self.coloring[e]
            va, vb = edge_vertices(e)
            M = self.A.blocks[e]
            self.set_slot((va, s), left_kernel(M))
            self.set_slot((vb, s), right_kernel(M))

    def fill(self, old_labels):
        F = self.A.field
        for v in self.vertices:
            for sign in ("+", "-"):
                slot = (v, sign)
                if slot in self.slots:
                    continue
                candidates = []
                if old_labels and v in old_labels:
                    for s2 in (sign, other_sign(sign)):
                        sp = old_labels[v].get(s2)
                        if sp is not None and sp.dim == 1 and sp not in candidates:
                            candidates.append(sp)
                for vec in ((1, 0), (0, 1), (1, 1)):
                    sp = Subspace.line(F, vec)
                    if sp not in candidates:
                        candidates.append(sp)
                placed = False
                for sp in candidates:
                    journal = []
                    try:
                        self.set_slot(slot, sp, journal)
                        placed = True
                        break
                    except LabelingFailure:
                        self.rollback(journal)
                if not placed:
                    raise LabelingFailure(v)

    def result(self):
        labels = {}
        for (v, sign), sp in self.slots.items():
            labels.setdefault(v, {})[sign] = sp
        return labels


def complete_labeling(I, A, coloring, seeds=None, old_labels=None):
    """Build a valid labeling for I under the given coloring.

    Args:
        I: Edge set satisfying (Deg).
        A: The partitioned matrix.
        coloring: Proper edge coloring of I.
        seeds: Optional dict (vertex, sign) -> dim-1 Subspace of
            required label values (beyond the pins).
        old_labels: Optional previous labeling; its values are
            preferred when filling free slots.

    Returns:
        Dict vertex -> {"+": Subspace, "-": Subspace}.

    Raises:
        LabelingFailure: If no valid labeling extends the pins and
            seeds; carries the degenerate vertex.
    """
    builder = _LabelBuilder(I, A, coloring)
    builder.place_pins()
    if seeds:
        for slot, sp in sorted(seeds.items()):
            builder.set_slot(slot, sp)
    builder.fill(old_labels)
    return builder.result()


def compute_valid_labeling(I, A, components=None, coloring=None, old_labels=None):
    """A valid labeling for I, or a LabelingFailure if none exists."""
    if coloring is None:
        components, coloring = decompose(I, A)
    return complete_labeling(I, A, coloring, old_labels=old_labels)


def verify_labeling(I, A, coloring, labels):
    """Check all labeling invariants; returns None or an error string."""
    for e in sorted(I):
        va, vb = edge_vertices(e)
        for v in (va, vb):
            if v not in labels or "+" not in labels[v] or "-" not in labels[v]:
                return f"missing label at {v}"
            if labels[v]["+"] == labels[v]["-"]:
                return f"equal labels at {v}"
        M = A.blocks[e]
        for sa, sb in (("+", "-"), ("-", "+")):
            U = labels[va][sa]
            V = labels[vb][sb]
            if not contains(perp(U, M, "left"), V):
                return f"orthogonality fails on edge {e} ({sa},{sb})"
        if edge_rank(A, e) == 1:
            s = coloring[e]
            if labels[va][s] != left_kernel(M):
                return f"pin fails at {va} on edge {e}"
            if labels[vb][s] != right_kernel(M):
                return f"pin fails at {vb} on edge {e}"
    return None


# ---------------------------------------------------------------------------
# Condition checks
# ---------------------------------------------------------------------------


def _check_conditions(I, A, cycle_mode):
    deg = degrees(I)
    for v, d in sorted(deg.items()):
        if d > 2:
            return ("Deg", f"degree {d} at {v}")
    components, coloring = decompose(I, A)
    for comp in components:
        if comp["kind"] == "path" and len(comp["edges"]) >= 2:
            first, last = comp["edges"][0], comp["edges"][-1]
            if edge_rank(A, first) != 1 or edge_rank(A, last) != 1:
                return ("Path", f"rank-2 end edge in path at {comp['vertices'][0]}")
    for comp in components:
        if comp["kind"] != "cycle":
            continue
        classes = {"+": [], "-": []}
        for e in comp["edges"]:
            classes[coloring[e]].append(e)
        has_r1 = {
            s: any(edge_rank(A, e) == 1 for e in es) for s, es in classes.items()
        }
        if cycle_mode == "full":
            if not (has_r1["+"] and has_r1["-"]):
                return ("Cycle", f"cycle at {comp['vertices'][0]}")
        else:
            if not (has_r1["+"] or has_r1["-"]):
                return ("q-Cycle", f"cycle at {comp['vertices'][0]}")
    try:
        complete_labeling(I, A, coloring)
    except LabelingFailure as exc:
        return ("VL", f"degenerate vertex {exc.vertex}")
    return None


def check_matching(I, A):
    """ok (None) or the first violated condition among Deg, Path,
    Cycle, VL as a (name, detail) pair."""
    return _check_conditions(I, A, "full")


def check_quasi_matching(I, A):
    """ok (None) or the first violated condition among Deg, Path,
    q-Cycle, VL."""
    return _check_conditions(I, A, "quasi")


# ---------------------------------------------------------------------------
# Matching state
# ---------------------------------------------------------------------------


@dataclass
class MatchingState:
    """An edge set with its decomposition, coloring, labeling and r."""

    A: object
    edges: frozenset
    components: list
    coloring: dict
    labels: dict
    r: int
    comp_index: dict = dc_field(default_factory=dict)

    @classmethod
    def build(cls, A, edges, coloring=None, seeds=None, old_labels=None):
        edges = frozenset(edges)
        components, auto_coloring = decompose(edges, A)
        if coloring is None:
            coloring = auto_coloring
        else:
            coloring = dict(coloring)
            _check_proper(edges, coloring)
        labels = complete_labeling(edges, A, coloring, seeds=seeds,
                                   old_labels=old_labels)
        state = cls(A, edges, components, coloring, labels,
                    r_value(edges, A))
        state._index()
        return state

    def _index(self):
        self.comp_index = {}
        for i, comp in enumerate(self.components):
            for v in comp["vertices"]:
                self.comp_index[v] = i

    def component_of(self, v):
        i = self.comp_index.get(v)
        return None if i is None else self.components[i]

    def degree(self, v):
        side, idx = v
        return sum(1 for e in self.edges if (e[0] if side == "a" else e[1]) == idx)

    def ker(self, v):
        return ker_of(self.edges, v, self.A)

    def label(self, v, sign):
        return self.labels[v][sign]


def _check_proper(I, coloring):
    adj = adjacency(I)
    for e in I:
        if e not in coloring:
            raise StructureError(f"missing color for edge {e}")
    for v, es in adj.items():
        if len(es) == 2 and coloring[es[0]] == coloring[es[1]]:
            raise StructureError(f"improper coloring at {v}")


def recolor_component(state, comp):
    """Swap +/- on a component's edges and labels; returns a new state."""
    coloring = dict(state.coloring)
    for e in comp["edges"]:
        coloring[e] = other_sign(coloring[e])
    labels = {v: dict(d) for v, d in state.labels.items()}
    for v in set(comp["vertices"]):
        labels[v] = {"+": labels[v]["-"], "-": labels[v]["+"]}
    new = MatchingState(state.A, state.edges, state.components, coloring,
                        labels, state.r)
    new._index()
    return new


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------


def _trim_path_from_end(edges_in_order, ranks):
    """Edges to remove when trimming a path from its first edge.

    The path's edges alternate step, connector, step, connector, ...
    as seen from the trimmed end.  While the current step edge is
    rank-2 and a following connector exists, the connector is removed
    (detaching the step edge as an isolated rank-2 edge); trimming
    stops at the first rank-1 step edge.
    """
    removed = []
    i = 0
    while i < len(edges_in_order):
        if ranks[i] != 2:
            break
        if i + 1 >= len(edges_in_order):
            break
        removed.append(edges_in_order[i + 1])
        i += 2
    return removed


def eliminate(I, A, coloring=None):
    """Repair a quasi-matching into a matching without decreasing r.

    Cycle components violating (Cycle) lose one alternation class:
    the class containing the rank-1 edges when the cycle has any
    (leaving the all-rank-2 class as isolated rank-2 edges), else the
    "-" class of the given or canonical coloring.  Path components
    with a rank-2 end edge are trimmed from that end, the
    lexicographically smaller end first.

    Returns:
        (new_edge_set, removed_edges).
    """
    I = set(I)
    components, auto_coloring = decompose(I, A)
    if coloring is None:
        coloring = auto_coloring
    removed = set()
    for comp in components:
        if comp["kind"] == "cycle":
            classes = {"+": [], "-": []}
            for e in comp["edges"]:
                classes[coloring[e]].append(e)
            has_r1 = {
                s: any(edge_rank(A, e) == 1 for e in es)
                for s, es in classes.items()
            }
            if has_r1["+"] and has_r1["-"]:
                continue
            if has_r1["+"] or has_r1["-"]:
                bad = "+" if has_r1["+"] else "-"
            else:
                bad = "-"
            removed.update(classes[bad])
        else:
            edges = comp["edges"]
            if len(edges) < 2:
                continue
            ranks = [edge_rank(A, e) for e in edges]
            i = 0
            while i < len(edges) and ranks[i] == 2 and i + 1 < len(edges):
                removed.add(edges[i + 1])
                i += 2
            # The connectors removed so far detach everything before
            # position i; only the remaining contiguous segment can be
            # trimmed from the other end.
            seg = edges[i:]
            segr = ranks[i:]
            if len(seg) >= 2 and segr[-1] == 2:
                j = len(seg) - 1
                while j >= 1 and segr[j] == 2:
                    removed.add(seg[j - 1])
                    j -= 2
    return I - removed, removed


def eliminate_from(I, A, v):
    """Trim only the path end at vertex v (directional elimination).

    Returns:
        (new_edge_set, removed_edges); unchanged when v's end edge is
        rank-1 or v is not a path endpoint of a multi-edge path.
    """
    I = set(I)
    components, _ = decompose(I, A)
    for comp in components:
        if comp["kind"] != "path" or len(comp["edges"]) < 2:
            continue
        if comp["vertices"][0] == v:
            edges = comp["edges"]
        elif comp["vertices"][-1] == v:
            edges = list(reversed(comp["edges"]))
        else:
            continue
        ranks = [edge_rank(A, e) for e in edges]
        if ranks[0] != 2:
            return I, set()
        removed = set(_trim_path_from_end(edges, ranks))
        return I - removed, removed
    return I, set()


@dataclass
class Witness:
    """Dual optimality certificate: one subspace per vertex with
    A(X_alpha, Y_beta) = {0} on every block; its value is
    2*mu + 2*nu - sum dim X - sum dim Y."""

    X: dict
    Y: dict

    def value(self, mu, nu):
        return (
            2 * mu + 2 * nu
            - sum(self.X[a].dim for a in range(mu))
            - sum(self.Y[b].dim for b in range(nu))
        )
