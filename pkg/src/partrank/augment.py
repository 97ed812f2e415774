"""
Augmentation: turn a matching plus an augmenting space-walk into a
strictly larger matching.

The driver keeps a pair (I, T) -- a quasi-matching and an augmenting
space-walk for it, represented by its underlying vertex sequence --
and rewrites it while an integer potential (theta) strictly decreases.
Each round first restores the revisit condition on the last outer
stretch (every vertex of the last outer stretch that appears twice
must carry the back-propagated space at its first appearance), then
dispatches on the shape of that stretch:

  * base case: the walk is one simple outer stretch; its edges join
    the matching, a valid labeling is rebuilt from an anchor seed at
    the final vertex, and the elimination repair yields the enlarged
    matching.
  * simple case: the last outer stretch is simple and preceded by an
    inner stretch; depending on whether the inner stretch's rank-1
    component is a cycle or a path, and on its degree/end patterns,
    the matching and walk are rewired -- possibly with directional
    elimination and prefix surgery that reuses earlier stretches.
  * nonsimple case: the last outer stretch revisits a column vertex;
    the enclosed loop is rerouted through its isolated rank-2 edges.

Walks are stored as vertex sequences only; after every rewrite the
full decoration is rebuilt against the new matching state and, in
debug mode, any violated invariant aborts with a diagnostic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .exactfield import contains, free_line, left_kernel, perp, right_kernel
from .matching import (
    LabelingFailure,
    MatchingState,
    a_vertex,
    b_vertex,
    check_matching,
    check_quasi_matching,
    edge_rank,
    edge_vertices,
    eliminate,
    eliminate_from,
    is_rank1_component,
    ker_of,
    other_sign,
    recolor_component,
)
from .spacewalk import (
    _classify_edge,
    analyze_walk,
    back_propagate,
    edge_between,
    walk_edges,
)


class AugmentError(AssertionError):
    """An internal contract of the augmentation procedure failed."""


@dataclass
class AugmentState:
    """A quasi-matching with an augmenting space-walk over it."""

    state: MatchingState
    verts: list
    sw: object


def _make(state, verts, debug=False, where=""):
    sw = analyze_walk(state, verts)
    if debug and not sw.ok:
        raise AugmentError(f"invalid walk after {where}: {sw.problems}")
    return AugmentState(state, verts, sw)


def _has_repeated_edge(edges):
    return len(set(edges)) != len(edges)


def theta(state, verts):
    """Potential: edges in the extended support plus inner-double edges.

    The extended support is the union of the walk's edges and the
    edges of every rank-1 component sharing a vertex with the walk.
    An inner-double edge appears at least twice across the walk's
    inner stretches.
    """
    sw = analyze_walk(state, verts)
    support = set(sw.edges)
    walk_vs = set(verts)
    for comp in state.components:
        if is_rank1_component(comp, state.A) and any(
            v in walk_vs for v in comp["vertices"]
        ):
            support.update(comp["edges"])
    counts = Counter()
    for run in sw.inner_runs():
        counts.update(sw.run_edges(run))
    inner_double = sum(1 for c in counts.values() if c >= 2)
    return len(support) + inner_double


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _component_incidence(comp):
    inc = {}
    for e in comp["edges"]:
        va, vb = edge_vertices(e)
        inc.setdefault(va, []).append(e)
        inc.setdefault(vb, []).append(e)
    return inc


def _derive_coloring(A, edges, forced, old_coloring):
    """A proper coloring of an edge set honoring forced edge signs.

    Components containing a forced edge are oriented to match it
    (all forced edges in one component must agree); components made
    entirely of previously colored edges keep their old signs.
    """
    from .matching import decompose

    components, canon = decompose(frozenset(edges), A)
    coloring = {}
    for comp in components:
        comp_edges = comp["edges"]
        anchor = None
        for e in comp_edges:
            if e in forced:
                anchor = (e, forced[e])
                break
        if anchor is None:
            for e in comp_edges:
                if e in old_coloring:
                    anchor = (e, old_coloring[e])
                    break
        if anchor is None:
            anchor = (comp_edges[0], canon[comp_edges[0]])
        flip = canon[anchor[0]] != anchor[1]
        for e in comp_edges:
            coloring[e] = other_sign(canon[e]) if flip else canon[e]
        for e in comp_edges:
            if e in forced and coloring[e] != forced[e]:
                raise AugmentError(
                    f"inconsistent forced coloring at edge {e}"
                )
    return coloring


def _anchor_seeds(state, verts, sw, start, sign):
    """Label seeds reproducing the walk-suffix labeling construction.

    The final vertex gets its kernel space (degree one) or a free line
    avoiding the walk's final space (degree zero) as its anchor label.
    If some forward space on a column vertex of the suffix is
    2-dimensional, the deepest such vertex gets a free anchor avoiding
    the back-propagated space there.
    """
    A = state.A
    F = A.field
    end = verts[-1]
    seeds = {}
    if state.degree(end) == 1:
        anchor = state.ker(end)
        if anchor.dim != 1:
            raise AugmentError(f"unusable kernel space at anchor {end}")
    else:
        Xk = sw.spaces[-1]
        forbid = [Xk] if Xk is not None and Xk.dim == 1 else []
        anchor = free_line(F, forbid)
    seeds[(end, sign)] = anchor
    suffix = verts[start:]
    back = back_propagate(A, suffix, anchor)
    deep = None
    for i in range(start, len(verts)):
        sp = sw.spaces[i]
        if verts[i][0] == "b" and sp is not None and sp.dim == 2:
            deep = i
    if deep is not None:
        bp = back[deep - start]
        forbid = [bp] if bp.dim == 1 else []
        seeds[(verts[deep], sign)] = free_line(F, forbid)
    return seeds


def _build_state(A, edges, coloring, seeds, old_labels, where):
    try:
        return MatchingState.build(
            A, frozenset(edges), coloring=coloring, seeds=seeds,
            old_labels=old_labels,
        )
    except LabelingFailure as exc:
        raise AugmentError(f"labeling failed during {where}: {exc}") from exc


def _eliminate_end(st, v):
    """Directional elimination from a path end; rebuilds the state."""
    edges2, removed = eliminate_from(set(st.edges), st.A, v)
    if not removed:
        return st, set()
    col2 = {e: st.coloring[e] for e in edges2}
    st2 = _build_state(st.A, edges2, col2, None, st.labels, "elimination")
    return st2, removed


def _check_intermediate(st, prev_r, A, where, allow_path_failure=False):
    bad = check_quasi_matching(st.edges, A)
    if bad is not None and not (allow_path_failure and bad[0] == "Path"):
        raise AugmentError(f"intermediate set fails {bad} during {where}")
    if st.r < prev_r:
        raise AugmentError(f"r decreased during {where}")


def _common_prefix_len(a, b):
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


# ---------------------------------------------------------------------------
# Revisit condition on the last outer stretch
# ---------------------------------------------------------------------------


def _revisit_violation(aug):
    sw, verts, state = aug.sw, aug.verts, aug.state
    pm = sw.runs[-1]
    pm_verts = sw.run_verts(pm)
    pm_back = back_propagate(state.A, pm_verts, state.ker(verts[-1]))
    occ = {}
    for i, v in enumerate(verts):
        occ.setdefault(v, []).append(i)
    outer_pos = set()
    for r in sw.outer_runs():
        outer_pos.update(range(r.lo, r.hi + 1))
    best = None
    for v in set(pm_verts):
        positions = occ[v]
        if len(positions) < 2:
            continue
        i_first, i_last = positions[0], positions[-1]
        if i_first not in outer_pos or i_last < pm.lo:
            continue
        want = pm_back[i_last - pm.lo]
        have = sw.spaces[i_first]
        if have is not None and have == want:
            continue
        if best is None or i_first < best[1]:
            if v == verts[-1] and i_last == len(verts) - 1:
                kind = "alpha-last"
            elif v[0] == "a":
                kind = "alpha"
            else:
                kind = "beta"
            best = (kind, i_first, i_last)
    return best


def enforce_No(aug, debug=False, trace=None):
    """Rewrite the walk until the revisit condition holds.

    Every vertex of the last outer stretch appearing twice must carry,
    at its first appearance, the back-propagated space of the last
    outer stretch at its last appearance; otherwise the walk is
    shortcut through the earlier appearance.
    """
    for _ in range(4 * len(aug.verts) + 16):
        viol = _revisit_violation(aug)
        if viol is None:
            return aug
        kind, i_first, _i_last = viol
        verts = aug.verts
        pm = aug.sw.runs[-1]
        if kind == "alpha-last":
            # Truncation at the earlier outer stretch; flagged because
            # walks produced by the search are not expected to reach it.
            run = next(
                r for r in aug.sw.outer_runs() if r.lo <= i_first <= r.hi
            )
            if trace:
                trace("augment: revisit truncation (unexpected case)")
            new = verts[: run.hi + 1]
        elif kind == "alpha":
            new = verts[: i_first + 1] + verts[_i_last + 1:]
        else:
            new = verts[: i_first + 1] + verts[pm.lo + 1:]
        if trace:
            trace(f"augment: revisit rewrite at {verts[i_first]}")
        aug = _make(aug.state, new, debug, "revisit rewrite")
    raise AugmentError("revisit enforcement failed to terminate")


# ---------------------------------------------------------------------------
# Base case: the walk is one simple outer stretch
# ---------------------------------------------------------------------------


def base_case(aug, debug=False, trace=None):
    """Add the walk's edges to the matching and repair; returns the
    enlarged matching state."""
    state, verts, sw = aug.state, aug.verts, aug.sw
    pm = sw.runs[-1]
    if sw.m != 0 or _has_repeated_edge(sw.edges):
        raise AugmentError("base case requires one simple outer stretch")
    A = state.A
    enlarged = set(state.edges) | set(sw.edges)
    forced = {sw.edges[i]: "+" for i in range(0, len(sw.edges), 2)}
    coloring = _derive_coloring(A, enlarged, forced, state.coloring)
    seeds = _anchor_seeds(state, verts, sw, pm.lo, "-")
    st1 = _build_state(A, enlarged, coloring, seeds, state.labels, "base case")
    if debug:
        _check_intermediate(st1, state.r, A, "base case",
                            allow_path_failure=True)
        if st1.r <= state.r:
            raise AugmentError("enlarged set did not increase r")
    final_edges, _removed = eliminate(st1.edges, A, coloring=st1.coloring)
    fin = _build_state(A, final_edges, None, None, st1.labels, "base case")
    bad = check_matching(fin.edges, A)
    if bad is not None:
        raise AugmentError(f"augmented set is not a matching: {bad}")
    if fin.r <= state.r:
        raise AugmentError("augmentation did not increase r")
    if trace:
        trace(f"augment: base case, r {state.r} -> {fin.r}")
    return fin


# ---------------------------------------------------------------------------
# Inner-shortcut condition
# ---------------------------------------------------------------------------


def _inner_route(state, inc, alpha, first_edge, target_b):
    """The inner walk from alpha along first_edge ending at target_b,
    or None when the route dies or needs a rank-1 connector."""
    A = state.A
    route = [alpha]
    e = first_edge
    used = set()
    while True:
        if e in used:
            return None
        used.add(e)
        b = b_vertex(e[1])
        route.append(b)
        if b == target_b:
            return route
        nxt = [f for f in inc.get(b, []) if f != e]
        if not nxt:
            return None
        conn = nxt[0]
        if conn in used or edge_rank(A, conn) != 2:
            return None
        used.add(conn)
        a2 = a_vertex(conn[0])
        route.append(a2)
        nxt2 = [f for f in inc.get(a2, []) if f != conn]
        if not nxt2:
            return None
        e = nxt2[0]


def _inner_shortcut(aug):
    state, verts, sw = aug.state, aug.verts, aug.sw
    P = sw.outer_runs()
    Q = sw.inner_runs()
    m = len(Q)
    if m < 2:
        return None
    pm = P[-1]
    pm_verts = sw.run_verts(pm)
    beta_star = pm_verts[0]
    comp = state.component_of(beta_star)
    if comp is None:
        return None
    y_vee = back_propagate(state.A, pm_verts, state.ker(verts[-1]))[0]
    inc = _component_incidence(comp)
    for ell in range(m - 1):
        run = P[ell]
        alpha = verts[run.hi]
        if state.component_of(alpha) is not comp:
            continue
        X = sw.spaces[run.hi]
        for e in inc.get(alpha, []):
            route = _inner_route(state, inc, alpha, e, beta_star)
            if route is None:
                continue
            s = state.coloring[e]
            if X is not None and X == state.labels[alpha][other_sign(s)]:
                continue
            y_route = state.labels[beta_star][other_sign(s)]
            if y_route == y_vee:
                continue
            return verts[: run.hi + 1] + route[1:] + pm_verts[1:]
    return None


def enforce_Ni(aug, debug=False, trace=None):
    """Rewrite the walk while an earlier outer stretch admits a
    compatible inner shortcut to the last inner stretch's end vertex
    carrying a space different from the back-propagated one."""
    for _ in range(len(aug.verts) + 8):
        rewrite = _inner_shortcut(aug)
        if rewrite is None:
            return aug
        if trace:
            trace("augment: inner shortcut rewrite")
        aug = _make(aug.state, rewrite, debug, "inner shortcut")
    raise AugmentError("inner-shortcut enforcement failed to terminate")


# ---------------------------------------------------------------------------
# Simple case context
# ---------------------------------------------------------------------------


@dataclass
class _Ctx:
    aug: object
    state: object
    verts: list
    sw: object
    pm: object
    pm_verts: list
    qm: object
    alpha_pm: tuple
    alpha_qm: tuple
    beta_star: tuple
    comp: dict
    qplus: list
    qminus: list
    y_vee: object


def _maximal_inner_to(state, beta_star, sign):
    """The maximal inner walk in beta_star's component ending at
    beta_star whose last edge carries the given sign, as a vertex
    list, or None when no such edge exists."""
    comp = state.component_of(beta_star)
    if comp is None:
        return None
    inc = _component_incidence(comp)
    start_edge = None
    for e in inc.get(beta_star, []):
        if state.coloring[e] == sign:
            start_edge = e
            break
    if start_edge is None:
        return None
    rev = [beta_star, a_vertex(start_edge[0])]
    used = {start_edge}
    e = start_edge
    a = rev[-1]
    while True:
        nxt = [f for f in inc.get(a, []) if f != e]
        if not nxt:
            break
        conn = nxt[0]
        if conn in used or edge_rank(state.A, conn) != 2:
            break
        b = b_vertex(conn[1])
        if b == beta_star:
            break
        nxt2 = [f for f in inc.get(b, []) if f != conn]
        if not nxt2:
            break
        step = nxt2[0]
        if step in used:
            break
        rev.append(b)
        rev.append(a_vertex(step[0]))
        used.add(conn)
        used.add(step)
        e = step
        a = rev[-1]
    return list(reversed(rev))


def _context(aug):
    state, verts, sw = aug.state, aug.verts, aug.sw
    pm = sw.runs[-1]
    qm = sw.inner_runs()[-1]
    beta_star = verts[qm.hi]
    ctx = _Ctx(
        aug=aug,
        state=state,
        verts=verts,
        sw=sw,
        pm=pm,
        pm_verts=sw.run_verts(pm),
        qm=qm,
        alpha_pm=verts[-1],
        alpha_qm=verts[qm.lo],
        beta_star=beta_star,
        comp=state.component_of(beta_star),
        qplus=_maximal_inner_to(state, beta_star, "+"),
        qminus=_maximal_inner_to(state, beta_star, "-"),
        y_vee=None,
    )
    ctx.y_vee = back_propagate(
        state.A, ctx.pm_verts, state.ker(ctx.alpha_pm)
    )[0]
    return ctx


def _case1_walk(ctx):
    """The rewired walk ending along the '+'-side inner stretch."""
    if ctx.qplus is None or ctx.alpha_qm not in ctx.qplus:
        raise AugmentError("last inner stretch is not on the '+' side")
    j = ctx.qplus.index(ctx.alpha_qm)
    portion = list(reversed(ctx.qplus[: j + 1]))
    return ctx.verts[: ctx.qm.lo + 1] + portion[1:]


def _case1_state(ctx, debug):
    """The rewired quasi-matching: add the last outer stretch's edges,
    drop the '+'-edges of the '+'-side inner walk, rebuild labels."""
    state = ctx.state
    A = state.A
    pm_edges = ctx.sw.edges[ctx.pm.lo:]
    qplus_edges = walk_edges(ctx.qplus) if ctx.qplus else []
    plus_edges = {e for e in qplus_edges if state.coloring[e] == "+"}
    enlarged = (set(state.edges) | set(pm_edges)) - plus_edges
    forced = {pm_edges[i]: "+" for i in range(0, len(pm_edges), 2)}
    coloring = _derive_coloring(A, enlarged, forced, state.coloring)
    seeds = _anchor_seeds(state, ctx.verts, ctx.sw, ctx.pm.lo, "-")
    st1 = _build_state(A, enlarged, coloring, seeds, state.labels,
                       "stretch rewiring")
    if debug:
        _check_intermediate(st1, state.r, A, "stretch rewiring",
                            allow_path_failure=True)
    return st1


# ---------------------------------------------------------------------------
# Simple case: cycle component
# ---------------------------------------------------------------------------


def _cycle_case1(ctx, debug, trace):
    if trace:
        trace("augment: cycle rewiring (rank-1 case)")
    st1 = _case1_state(ctx, debug)
    st2, _removed = _eliminate_end(st1, ctx.alpha_pm)
    return _make(st2, _case1_walk(ctx), debug, "cycle rewiring")


def _cycle_other_route(ctx):
    """The route around the cycle from the last inner stretch's start
    to its end vertex, avoiding the stretch's first edge."""
    inc = _component_incidence(ctx.comp)
    avoid = ctx.sw.edges[ctx.qm.lo]
    first = [f for f in inc.get(ctx.alpha_qm, []) if f != avoid]
    if not first:
        raise AugmentError("no alternate route around the cycle")
    route = [ctx.alpha_qm]
    e = first[0]
    v = ctx.alpha_qm
    for _ in range(2 * len(ctx.comp["edges"]) + 2):
        va, vb = edge_vertices(e)
        w = vb if v == va else va
        route.append(w)
        if w == ctx.beta_star:
            return route
        nxt = [f for f in inc.get(w, []) if f != e]
        if not nxt:
            raise AugmentError("cycle route dead end")
        e = nxt[0]
        v = w
    raise AugmentError("cycle route failed to close")


def _cycle_case2(ctx, debug, trace, depth):
    state = ctx.state
    A = state.A
    plus_edges = {
        e for e in ctx.comp["edges"] if state.coloring[e] == "+"
    }
    reduced = set(state.edges) - plus_edges
    route = _cycle_other_route(ctx)
    candidate = ctx.verts[: ctx.qm.lo + 1] + route[1:] + ctx.pm_verts[1:]
    col2 = {e: state.coloring[e] for e in reduced}
    st2 = _build_state(A, reduced, col2, None, state.labels,
                       "cycle stripping")
    sw2 = analyze_walk(st2, candidate)
    if sw2.ok:
        if trace:
            trace("augment: cycle rewiring (all-rank-2 case, committed)")
        if debug:
            _check_intermediate(st2, state.r, A, "cycle stripping")
        return AugmentState(st2, candidate, sw2)
    # Keep the matching; reroute the walk through the other side of the
    # cycle as an inner stretch, renormalize, and rerun the dispatch.
    if trace:
        trace("augment: cycle rewiring (all-rank-2 case, rerouted)")
    aug2 = _make(state, candidate, debug, "cycle reroute")
    return _simple_dispatch(aug2, debug, trace, depth + 1)


# ---------------------------------------------------------------------------
# Simple case: path component
# ---------------------------------------------------------------------------


def _trimmed_path(ctx, removed, with_qminus):
    """The reverse path from the last vertex through the removed
    edges: its vertex list and the farthest removed-edge vertex."""
    full = list(reversed(ctx.pm_verts))
    if with_qminus and ctx.qminus:
        full += list(reversed(ctx.qminus))[1:]
    dvs = {v for e in removed for v in edge_vertices(e)}
    idxs = [i for i, v in enumerate(full) if v in dvs]
    if not idxs:
        raise AugmentError("no trimmed edge on the end path")
    top = max(idxs)
    return full[: top + 1], top


def _path_case1_T(ctx, st2, removed, pat_a):
    """Walk surgery after trimming from the last vertex."""
    verts, sw = ctx.verts, ctx.sw
    R, top = _trimmed_path(ctx, removed, with_qminus=True)
    dvs = {v for e in removed for v in edge_vertices(e)}
    pm_set = set(ctx.pm_verts)
    r_pm = set(R) & pm_set
    P = sw.outer_runs()
    Q = sw.inner_runs()
    m = len(Q)
    ell = None
    for i, run in enumerate(P):
        if any(verts[p] in r_pm for p in range(run.lo, run.hi + 1)):
            ell = i
            break
    kk = None
    k_cand = None
    if ctx.qminus and top >= len(ctx.pm_verts):
        r_qm = set(R) & set(ctx.qminus)
        for k in range(1, m):
            qrun = Q[k - 1]
            if not any(
                verts[p] in r_qm for p in range(qrun.lo, qrun.hi + 1)
            ):
                continue
            a_qk = verts[qrun.lo]
            if a_qk not in ctx.qminus:
                continue
            j = ctx.qminus.index(a_qk)
            cand = (
                verts[: qrun.lo + 1]
                + list(reversed(ctx.qminus[: j + 1]))[1:]
            )
            if analyze_walk(st2, cand).ok:
                kk = k
                k_cand = cand
                break
    if kk is not None and (ell is None or kk <= ell):
        return k_cand
    if ell is None:
        raise AugmentError("no outer stretch meets the trimmed path")
    if ell < m:
        run = P[ell]
        rset = set(R)
        pos = next(
            (p for p in range(run.lo, run.hi + 1)
             if verts[p] in dvs and verts[p] in rset),
            None,
        )
        if pos is None:
            # The meeting vertex can be the shared last vertex itself,
            # incident only to kept edges; the same surgery applies.
            pos = next(
                (p for p in range(run.lo, run.hi + 1) if verts[p] in rset),
                None,
            )
        if pos is None:
            raise AugmentError("outer stretch lost its trimmed vertex")
        alpha = verts[pos]
        ridx = R.index(alpha)
        return verts[: pos + 1] + R[ridx + 1:]
    base = _case1_walk(ctx)
    if pat_a:
        return base + R[1:]
    return base


def _l_path(ctx, removed):
    """The path from the farthest removed-edge vertex back to the
    start of the last outer stretch (vertex list), through the old
    component of the last vertex when the trimming entered it."""
    state = ctx.state
    full = list(ctx.pm_verts)
    cprime = None
    if state.degree(ctx.alpha_pm) == 1:
        cprime = state.component_of(ctx.alpha_pm)
        cvs = cprime["vertices"]
        if cvs[0] == ctx.alpha_pm:
            full += cvs[1:]
        elif cvs[-1] == ctx.alpha_pm:
            full += list(reversed(cvs))[1:]
    dvs = {v for e in removed for v in edge_vertices(e)}
    idxs = [i for i, v in enumerate(full) if v in dvs]
    if not idxs:
        raise AugmentError("no trimmed edge on the start path")
    top = max(idxs)
    return list(reversed(full[: top + 1])), cprime


def _find_p2(ctx, l_set):
    """The latest earlier outer stretch exiting the last outer stretch
    at a column vertex of the trimmed start path: (index, position)."""
    verts, sw = ctx.verts, ctx.sw
    pm_set = set(ctx.pm_verts)
    P = sw.outer_runs()
    m = len(sw.inner_runs())
    for i in range(m - 1, -1, -1):
        run = P[i]
        for p in range(run.hi, run.lo - 1, -1):
            v = verts[p]
            if v in pm_set:
                if v in l_set and v[0] == "b":
                    return i, p
                break
    return None


def _q22_outer_test(ctx, st2, k):
    """Whether the k-th inner stretch merges with its neighbors into a
    single outer stretch for the rewired matching, staying compatible
    with the following inner stretch."""
    sw, verts = ctx.sw, ctx.verts
    P = sw.outer_runs()
    Q = sw.inner_runs()
    qrun = Q[k - 1]
    prun = P[k]
    cur = sw.spaces[qrun.lo]
    if cur is None or cur.dim != 1:
        return False
    seg = verts[qrun.lo: prun.hi + 1]
    for t in range(len(seg) - 1):
        e = edge_between(seg[t], seg[t + 1])
        kind = _classify_edge(st2, e) if e in st2.edges else "off"
        if seg[t][0] == "b":
            if kind != "off":
                return False
            M = st2.A.blocks[e]
            if contains(right_kernel(M), cur):
                return False
            cur = perp(cur, M, "right")
        else:
            if kind != "iso":
                return False
            cur = perp(cur, st2.A.blocks[e], "left")
    if k < len(Q):
        nrun = Q[k]
        fe = sw.edges[nrun.lo]
        if fe not in st2.edges or _classify_edge(st2, fe) != "inner":
            return False
        v = verts[nrun.lo]
        s2 = st2.coloring.get(fe)
        opp = st2.labels.get(v, {}).get(other_sign(s2))
        if opp is not None and cur == opp:
            return False
    return True


def _path_case2_T(ctx, st2, removed, base):
    """Prefix surgery after trimming from the start vertex of the last
    outer stretch."""
    state, verts, sw = ctx.state, ctx.verts, ctx.sw
    A = state.A
    L, cprime = _l_path(ctx, removed)
    beta0 = L[0]
    l_set = set(L)
    l_edges = set(walk_edges(L))
    P = sw.outer_runs()
    Q = sw.inner_runs()
    m = len(Q)
    p2 = _find_p2(ctx, l_set)
    kk = None
    k_beta = None
    dsign = None
    if cprime is not None:
        cp_edges = set(cprime["edges"])
        dset = [e for e in removed if e in cp_edges]
        if dset:
            dsign = state.coloring[dset[0]]
    if dsign is not None:
        for k in range(m - 1, 0, -1):
            qrun = Q[k - 1]
            qverts = [verts[p] for p in range(qrun.lo, qrun.hi + 1)]
            if not any(v in l_set for v in qverts):
                continue
            first_e = sw.edges[qrun.lo]
            if beta0 in qverts and first_e not in l_edges:
                continue  # passes through the far end; stays in place
            if first_e not in l_edges:
                continue
            if state.coloring[first_e] == dsign:
                kk = k
                k_beta = verts[qrun.hi]
                break
            if _q22_outer_test(ctx, st2, k):
                continue  # merges into an outer stretch; no surgery
            kk = k
            k_beta = verts[qrun.hi]
            break
    if p2 is not None and (kk is None or p2[0] >= kk):
        _ell, p_beta = p2
        beta = verts[p_beta]
        if ker_of(st2.edges, beta0, A).dim == 0:
            raise AugmentError("zero kernel space at the trimmed far end")
        li = L.index(beta)
        return L[: li + 1] + verts[p_beta + 1: ctx.qm.lo + 1] + base[
            ctx.qm.lo + 1:
        ]
    if kk is not None:
        prun = P[kk]
        if k_beta not in L:
            raise AugmentError("inner stretch exit missing from start path")
        if ker_of(st2.edges, beta0, A).dim == 0:
            raise AugmentError("zero kernel space at the trimmed far end")
        li = L.index(k_beta)
        return L[: li + 1] + verts[prun.lo + 1: ctx.qm.lo + 1] + base[
            ctx.qm.lo + 1:
        ]
    return base


def _path_case(ctx, debug, trace):
    state = ctx.state
    A = state.A
    pat_a = ctx.qplus is not None and ctx.alpha_pm == ctx.qplus[0]
    pat_b = state.degree(ctx.beta_star) == 1
    st1 = _case1_state(ctx, debug)
    pm_edges = ctx.sw.edges[ctx.pm.lo:]
    last_rank = edge_rank(A, pm_edges[-1])

    if pat_a and pat_b:
        if all(edge_rank(A, e) == 2 for e in pm_edges):
            # The rewired set already has strictly larger r: repair it
            # into a matching and finish.
            final_edges, _ = eliminate(st1.edges, A, coloring=st1.coloring)
            fin = _build_state(A, final_edges, None, None, st1.labels,
                               "path rewiring")
            bad = check_matching(fin.edges, A)
            if bad is not None:
                raise AugmentError(f"augmented set is not a matching: {bad}")
            if fin.r <= state.r:
                raise AugmentError("augmentation did not increase r")
            if trace:
                trace(f"augment: path rewiring finished, r {state.r} -> "
                      f"{fin.r}")
            return fin
        st2, d_beta = (st1, set())
        first_off = pm_edges[0]
        if edge_rank(A, first_off) == 2:
            st2, d_beta = _eliminate_end(st1, ctx.beta_star)
        st2, d_alpha = _eliminate_end(st2, ctx.alpha_pm)
        if last_rank == 1 or not d_alpha:
            T1 = _case1_walk(ctx)
        else:
            T1 = _path_case1_T(ctx, st2, d_alpha, pat_a)
        if d_beta:
            L, _cp = _l_path(ctx, d_beta)
            common = _common_prefix_len(T1, ctx.verts)
            p2 = _find_p2(ctx, set(L))
            if p2 is not None and p2[1] < common:
                _ell, p_beta = p2
                beta = ctx.verts[p_beta]
                li = L.index(beta)
                T1 = L[: li + 1] + T1[p_beta + 1:]
        if trace:
            trace("augment: path rewiring (both end patterns)")
        return _make(st2, T1, debug, "path rewiring")

    if pat_a:
        if last_rank == 1:
            if trace:
                trace("augment: path rewiring (rank-1 end)")
            return _make(st1, _case1_walk(ctx), debug, "path rewiring")
        st2, removed = _eliminate_end(st1, ctx.alpha_pm)
        if not removed:
            return _make(st2, _case1_walk(ctx), debug, "path rewiring")
        if trace:
            trace("augment: path rewiring (trimmed end)")
        return _make(st2, _path_case1_T(ctx, st2, removed, pat_a), debug,
                     "path rewiring")

    if pat_b:
        first_off = pm_edges[0]
        if edge_rank(A, first_off) == 1:
            if last_rank == 1:
                return _make(st1, _case1_walk(ctx), debug, "path rewiring")
            st2, removed = _eliminate_end(st1, ctx.alpha_pm)
            if not removed:
                return _make(st2, _case1_walk(ctx), debug, "path rewiring")
            return _make(st2, _path_case1_T(ctx, st2, removed, pat_a),
                         debug, "path rewiring")
        st2, d_beta = _eliminate_end(st1, ctx.beta_star)
        st2, _d_alpha = _eliminate_end(st2, ctx.alpha_pm)
        if trace:
            trace("augment: path rewiring (trimmed start)")
        T = _path_case2_T(ctx, st2, d_beta, _case1_walk(ctx))
        return _make(st2, T, debug, "path rewiring")

    # Neither end pattern.
    st2, _removed = _eliminate_end(st1, ctx.alpha_pm)
    if trace:
        trace("augment: path rewiring")
    return _make(st2, _case1_walk(ctx), debug, "path rewiring")


# ---------------------------------------------------------------------------
# Simple case dispatch
# ---------------------------------------------------------------------------


def _simple_dispatch(aug, debug, trace, depth):
    if depth > 3:
        raise AugmentError("simple-case renormalization loop")
    state, sw = aug.state, aug.sw
    qm = sw.inner_runs()[-1]
    beta_star = aug.verts[qm.hi]
    last_edge = sw.edges[qm.hi - 1]
    if state.coloring[last_edge] == "-":
        state = recolor_component(state, state.component_of(beta_star))
        aug = _make(state, aug.verts, debug, "recoloring")
    ctx = _context(aug)
    if ctx.comp is None:
        raise AugmentError("last inner stretch lost its component")
    if ctx.comp["kind"] == "cycle":
        has_r1_minus = any(
            ctx.state.coloring[e] == "-" and edge_rank(ctx.state.A, e) == 1
            for e in ctx.comp["edges"]
        )
        if has_r1_minus:
            return _cycle_case1(ctx, debug, trace)
        return _cycle_case2(ctx, debug, trace, depth)
    return _path_case(ctx, debug, trace)


def simple_case(aug, debug=False, trace=None):
    """Handle a simple last outer stretch preceded by inner stretches.

    Returns either a rewired AugmentState with smaller potential or,
    when the rewired set's r already grew, the finished matching.
    """
    sw = aug.sw
    pm = sw.runs[-1]
    if sw.m < 1:
        raise AugmentError("simple case requires an inner stretch")
    if _has_repeated_edge(sw.edges[pm.lo:]):
        raise AugmentError("simple case requires a simple last stretch")
    aug = enforce_Ni(aug, debug, trace)
    return _simple_dispatch(aug, debug, trace, 0)


# ---------------------------------------------------------------------------
# Nonsimple case
# ---------------------------------------------------------------------------


def nonsimple_case(aug, debug=False, trace=None):
    """Reroute the loop enclosed by the last outer stretch's repeated
    column vertex; returns a rewired AugmentState."""
    state, verts, sw = aug.state, aug.verts, aug.sw
    A = state.A
    pm = sw.runs[-1]
    pm_verts = sw.run_verts(pm)
    if not _has_repeated_edge(sw.edges[pm.lo:]):
        raise AugmentError("nonsimple case requires a repeated edge")
    occ = {}
    for i, v in enumerate(pm_verts):
        occ.setdefault(v, []).append(i)
    repeats = [(o[0], v) for v, o in occ.items() if len(o) >= 2]
    if not repeats:
        raise AugmentError("repeated edge without a repeated vertex")
    i0, beta0 = max(repeats)
    if beta0[0] != "b":
        raise AugmentError("loop closure is not at a column vertex")
    i1 = occ[beta0][-1]
    if i0 == 0 or pm_verts[i0 - 1] != pm_verts[i1 - 1]:
        raise AugmentError("unexpected loop shape")
    k = (i1 - i0) // 2

    def loop_off(i):  # the i-th added edge around the loop, i = 1..k
        return edge_between(pm_verts[i0 + 2 * i - 2], pm_verts[i0 + 2 * i - 1])

    def loop_iso(i):  # the i-th matched edge around the loop, i = 1..k
        return edge_between(pm_verts[i0 - 1 + 2 * i], pm_verts[i0 + 2 * i])

    off_ranks = [edge_rank(A, loop_off(i)) for i in range(1, k + 1)]

    if all(rk == 2 for rk in off_ranks):
        removed = {loop_iso(i) for i in range(1, k + 1)}
        rewired = (
            set(state.edges) | {loop_off(i) for i in range(1, k + 1)}
        ) - removed
        col2 = _derive_coloring(A, rewired, {}, state.coloring)
        st2 = _build_state(A, rewired, col2, None, state.labels,
                           "loop rewiring")
        if debug:
            _check_intermediate(st2, state.r, A, "loop rewiring")
        alpha_positions = {
            pm_verts[i0 - 1 + 2 * i]: i0 - 1 + 2 * i for i in range(1, k + 1)
        }
        g = None
        for run in sw.outer_runs():
            for p in range(run.lo, run.hi + 1):
                if verts[p] in alpha_positions:
                    g = p
                    break
            if g is not None:
                break
        if g is None:
            raise AugmentError("no outer stretch meets the loop")
        i_s = alpha_positions[verts[g]]
        portion = list(reversed(pm_verts[i0: i_s + 1]))
        T = verts[: g + 1] + portion[1:] + pm_verts[i1 + 1:]
        if trace:
            trace("augment: loop rewiring (all-rank-2 loop)")
        return _make(st2, T, debug, "loop rewiring")

    r = max(i for i in range(1, k + 1) if off_ranks[i - 1] == 1)
    suffix_edges = sw.edges[pm.lo + i0:]
    removed = {loop_iso(i) for i in range(r, k + 1)}
    rewired = (set(state.edges) | set(suffix_edges)) - removed
    forced = {}
    for i in range(1, r + 1):
        forced[loop_off(i)] = "+"
    t = i1
    while t + 1 < len(pm_verts):
        forced[edge_between(pm_verts[t], pm_verts[t + 1])] = "-"
        t += 2
    col2 = _derive_coloring(A, rewired, forced, state.coloring)
    seeds = _anchor_seeds(state, verts, sw, pm.lo + i1, "+")
    alpha_r = pm_verts[i0 - 1 + 2 * r]
    pin = left_kernel(A.blocks[loop_off(r)])
    seeds[(alpha_r, "-")] = free_line(A.field,
                                      [pin] if pin.dim == 1 else [])
    st1 = _build_state(A, rewired, col2, seeds, state.labels,
                       "loop rewiring")
    if debug:
        _check_intermediate(st1, state.r, A, "loop rewiring",
                            allow_path_failure=True)
    st2, _d = _eliminate_end(st1, verts[-1])
    alpha_positions = {
        pm_verts[i0 - 1 + 2 * i]: i0 - 1 + 2 * i for i in range(r, k + 1)
    }
    g = None
    for run in sw.outer_runs():
        for p in range(run.lo, run.hi + 1):
            if verts[p] in alpha_positions:
                g = p
                break
        if g is not None:
            break
    if g is None:
        raise AugmentError("no outer stretch meets the loop")
    i_s = alpha_positions[verts[g]]
    portion = list(reversed(pm_verts[i0 - 1 + 2 * r: i_s + 1]))
    T = verts[: g + 1] + portion[1:]
    if trace:
        trace("augment: loop rewiring (rank-1 loop edge)")
    return _make(st2, T, debug, "loop rewiring")


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def augment(state, walk, A, debug=False, trace=None):
    """Transform (matching, walk) into a strictly larger matching.

    Args:
        state: Current MatchingState (a matching).
        walk: Vertex sequence of an irredundant augmenting space-walk.
        A: The partitioned matrix.
        debug: Validate every intermediate state and walk.
        trace: Optional callable receiving one line per step.

    Returns:
        (new_state, theta_values) where theta_values lists the
        potential at each round.

    Raises:
        AugmentError: When the potential fails to strictly decrease or
            any internal contract is violated.
    """
    aug = _make(state, list(walk), debug, "search output")
    start_r = state.r
    theta_log = []
    prev = None
    bound = theta(state, aug.verts) + 16
    for _ in range(bound):
        aug = enforce_No(aug, debug, trace)
        th = theta(aug.state, aug.verts)
        theta_log.append(th)
        if prev is not None and th >= prev:
            raise AugmentError(
                f"theta failed to decrease: {prev} -> {th}"
            )
        prev = th
        if debug:
            bad = check_quasi_matching(aug.state.edges, A)
            if bad is not None:
                raise AugmentError(f"round set fails {bad}")
            if aug.state.r < start_r:
                raise AugmentError("r decreased across rounds")
            if not aug.sw.ok:
                raise AugmentError(f"round walk invalid: {aug.sw.problems}")
        pm = aug.sw.runs[-1]
        simple = not _has_repeated_edge(aug.sw.edges[pm.lo:])
        if trace:
            shape = "simple" if simple else "nonsimple"
            trace(
                f"augment: theta={th} r={aug.state.r} m={aug.sw.m} {shape}"
            )
        if not simple:
            aug = nonsimple_case(aug, debug, trace)
            continue
        if aug.sw.m == 0:
            return base_case(aug, debug, trace), theta_log
        result = simple_case(aug, debug, trace)
        if isinstance(result, MatchingState):
            return result, theta_log
        aug = result
    raise AugmentError("augmentation failed to terminate")
