"""
Outer/inner space-walks and augmenting space-walk validation.

An outer walk alternates off-matching edges (entered from a column
vertex) with isolated rank-2 matching edges; its spaces are produced
by orthogonal-space propagation.  An inner walk lies inside one
rank-1 matching component and carries the labeling's spaces.  An
augmenting space-walk is a compatible alternating concatenation
P_0 Q_1 P_1 ... Q_m P_m of outer and inner space-walks whose first
outer space equals the kernel space of its initial vertex and whose
final space avoids the kernel space of its last vertex.

Walks are represented by their underlying vertex sequences; the full
decoration (edge classification, run structure, per-position
subspaces, and every validity condition) is reconstructed from the
current matching state by analyze_walk.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .exactfield import Subspace, contains, perp, right_kernel
from .matching import (
    a_vertex,
    b_vertex,
    edge_rank,
    is_rank1_component,
    other_sign,
)


def edge_between(u, v):
    """The edge key joining a row vertex and a column vertex."""
    if u[0] == "a" and v[0] == "b":
        return (u[1], v[1])
    if u[0] == "b" and v[0] == "a":
        return (v[1], u[1])
    raise ValueError(f"vertices {u}, {v} are on the same side")


def walk_edges(verts):
    return [edge_between(verts[i], verts[i + 1]) for i in range(len(verts) - 1)]


def concat_walks(a, b):
    """Concatenate two vertex sequences, merging equal junction ends."""
    if a and b and a[-1] == b[0]:
        return list(a) + list(b[1:])
    return list(a) + list(b)


def front_propagate(A, space, verts):
    """Propagate a subspace forward along a walk's vertex sequence.

    The input space lives at verts[0]; each step applies the
    orthogonal-space map of the traversed block.  Returns one
    subspace per vertex position.
    """
    spaces = [space]
    for i in range(1, len(verts)):
        e = edge_between(verts[i - 1], verts[i])
        M = A.blocks[e]
        side = "right" if verts[i - 1][0] == "b" else "left"
        spaces.append(perp(spaces[-1], M, side))
    return spaces


def back_propagate(A, verts, space):
    """Propagate a subspace backward along a walk's vertex sequence.

    The input space lives at verts[-1].  Returns one subspace per
    vertex position (in walk order).
    """
    spaces = [space]
    for i in range(len(verts) - 1, 0, -1):
        e = edge_between(verts[i - 1], verts[i])
        M = A.blocks[e]
        side = "right" if verts[i][0] == "b" else "left"
        spaces.append(perp(spaces[-1], M, side))
    spaces.reverse()
    return spaces


def inner_walk_spaces(state, verts):
    """The labeling's spaces along an inner walk (alpha to beta).

    The step sign is read off the first edge's color; row vertices
    carry U^s and column vertices carry V^(-s).
    """
    if verts[0][0] != "a" or verts[-1][0] != "b":
        raise ValueError("inner walk must run from a row vertex to a column vertex")
    first = edge_between(verts[0], verts[1])
    s = state.coloring[first]
    spaces = []
    for v in verts:
        sign = s if v[0] == "a" else other_sign(s)
        spaces.append(state.labels[v][sign])
    return spaces


@dataclass
class Run:
    """A maximal outer ('P') or inner ('Q') stretch of the walk.

    lo/hi are inclusive vertex indices into the walk; consecutive
    runs share their junction vertex.
    """

    kind: str
    lo: int
    hi: int


@dataclass
class SpaceWalk:
    """A fully decorated augmenting space-walk candidate."""

    verts: list
    edges: list
    edge_kinds: list
    runs: list
    spaces: list
    problems: list = dc_field(default_factory=list)

    @property
    def ok(self):
        return not self.problems

    def outer_runs(self):
        return [r for r in self.runs if r.kind == "P"]

    def inner_runs(self):
        return [r for r in self.runs if r.kind == "Q"]

    @property
    def m(self):
        return len(self.inner_runs())

    def run_verts(self, run):
        return self.verts[run.lo : run.hi + 1]

    def run_edges(self, run):
        return self.edges[run.lo : run.hi]

    def last_outer(self):
        return self.runs[-1]

    def X_final(self):
        return self.spaces[-1]

    def Y_initial(self):
        return self.spaces[0]

    def inner_sign(self, state, run):
        first = self.edges[run.lo]
        return state.coloring[first]


def _classify_edge(state, e):
    if e not in state.edges:
        return "off"
    comp = state.component_of(a_vertex(e[0]))
    if comp is None or e not in comp["edges"]:
        comp = state.component_of(b_vertex(e[1]))
    if is_rank1_component(comp, state.A):
        return "inner"
    return "iso"


def analyze_walk(state, verts):
    """Reconstruct and validate an augmenting space-walk from its
    underlying vertex sequence under the given matching state.

    Every violated condition is recorded in the result's problems
    list; an empty list means the walk is a valid irredundant
    augmenting space-walk.
    """
    A = state.A
    problems = []
    if len(verts) < 2:
        return SpaceWalk(list(verts), [], [], [], [], ["walk too short"])
    for i in range(len(verts) - 1):
        if verts[i][0] == verts[i + 1][0]:
            return SpaceWalk(
                list(verts), [], [], [], [],
                [f"consecutive vertices on the same side at position {i}"],
            )
    edges = walk_edges(verts)
    for e in edges:
        if e not in A.blocks:
            return SpaceWalk(
                list(verts), edges, [], [], [], [f"walk uses absent block {e}"]
            )
    kinds = [_classify_edge(state, e) for e in edges]

    # Partition into maximal P (off/iso) and Q (inner) runs.
    runs = []
    i = 0
    while i < len(edges):
        kind = "Q" if kinds[i] == "inner" else "P"
        j = i
        while j < len(edges) and (kinds[j] == "inner") == (kind == "Q"):
            j += 1
        runs.append(Run(kind, i, j))
        i = j
    if runs[0].kind != "P" or runs[-1].kind != "P":
        problems.append("walk must start and end with an outer run")
    for k in range(1, len(runs)):
        if runs[k].kind == runs[k - 1].kind:
            problems.append("adjacent runs of the same kind")

    if verts[0][0] != "b":
        problems.append("walk must start at a column vertex")
    if verts[-1][0] != "a":
        problems.append("walk must end at a row vertex")
    if problems:
        return SpaceWalk(list(verts), edges, kinds, runs, [], problems)

    spaces = [None] * len(verts)
    ker0 = state.ker(verts[0])
    if ker0.dim == 0:
        problems.append("(A_i) fails: zero kernel space at the initial vertex")
    spaces[0] = ker0

    for idx, run in enumerate(runs):
        if run.kind == "P":
            _decorate_outer(state, verts, edges, kinds, run, spaces, problems)
        else:
            _decorate_inner(state, verts, edges, run, spaces, problems)

    kerL = state.ker(verts[-1])
    X_final = spaces[-1]
    if kerL.dim == 0:
        problems.append("(A_l) fails: zero kernel space at the last vertex")
    elif X_final is not None and contains(X_final, kerL):
        problems.append("(A_l) fails: final space covers the kernel space")

    _check_irredundancy(verts, spaces, problems)

    return SpaceWalk(list(verts), edges, kinds, runs, spaces, problems)


def _decorate_outer(state, verts, edges, kinds, run, spaces, problems):
    A = state.A
    if verts[run.lo][0] != "b":
        problems.append(f"outer run starts at a row vertex (position {run.lo})")
        return
    if spaces[run.lo] is None:
        problems.append(f"no junction space at position {run.lo}")
        return
    for i in range(run.lo, run.hi):
        e = edges[i]
        M = A.blocks[e]
        from_v = verts[i]
        expected = "off" if from_v[0] == "b" else "iso"
        if kinds[i] != expected:
            problems.append(
                f"outer run edge {e} should be {expected}, is {kinds[i]}"
            )
            spaces[i + 1] = perp(
                spaces[i], M, "right" if from_v[0] == "b" else "left"
            )
            continue
        if from_v[0] == "b":
            Y = spaces[i]
            if contains(right_kernel(M), Y):
                problems.append(
                    f"outer space at position {i} lies in the right kernel of {e}"
                )
            spaces[i + 1] = perp(Y, M, "right")
        else:
            spaces[i + 1] = perp(spaces[i], M, "left")


def _decorate_inner(state, verts, edges, run, spaces, problems):
    A = state.A
    if verts[run.lo][0] != "a" or verts[run.hi][0] != "b":
        problems.append(
            f"inner run must go from a row vertex to a column vertex "
            f"(positions {run.lo}..{run.hi})"
        )
        return
    comp = state.component_of(verts[run.lo])
    for i in range(run.lo, run.hi):
        e = edges[i]
        if comp is None or e not in comp["edges"]:
            problems.append(f"inner run leaves its component at edge {e}")
            return
        from_v = verts[i]
        if from_v[0] == "b" and edge_rank(A, e) != 2:
            problems.append(f"inner connector {e} is not rank-2")
    s = state.coloring[edges[run.lo]]
    for i in range(run.lo, run.hi + 1):
        v = verts[i]
        sign = s if v[0] == "a" else other_sign(s)
        if v not in state.labels or sign not in state.labels[v]:
            problems.append(f"missing label at {v}")
            return
        label_space = state.labels[v][sign]
        if i == run.lo:
            # Junction with the preceding outer run: its arrival space
            # stays in place; the sign condition compares it with the
            # opposite label.
            X_prev = spaces[i]
            forbidden = state.labels[v][other_sign(sign)]
            if X_prev is not None and X_prev == forbidden:
                problems.append(
                    f"junction at {v}: outer space equals the opposite label"
                )
        else:
            spaces[i] = label_space


def _check_irredundancy(verts, spaces, problems):
    occurrences = {}
    for i, v in enumerate(verts):
        occurrences.setdefault(v, []).append(i)
    for v, occ in sorted(occurrences.items()):
        if len(occ) > 2:
            problems.append(f"vertex {v} appears {len(occ)} times")
            continue
        if len(occ) == 2:
            s1, s2 = spaces[occ[0]], spaces[occ[1]]
            if s1 is None or s2 is None:
                continue
            if v[0] == "a":
                if contains(s2, s1):
                    problems.append(
                        f"row vertex {v} repeats with contained space"
                    )
            else:
                if contains(s1, s2):
                    problems.append(
                        f"column vertex {v} repeats with containing space"
                    )


def validate_augmenting(state, verts):
    """All violated augmenting space-walk conditions (empty = ok)."""
    return analyze_walk(state, verts).problems
