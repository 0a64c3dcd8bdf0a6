"""FCI: PC-stable skeleton, Possible-D-SEP pruning, Zhang rules R1-R4.

Selection-bias rules (R5-R7) and the final tail rules (R8-R10) are omitted:
the datasets this package targets are not selection-biased, and R1-R4
already fix every arrowhead needed downstream (the fairness mapping treats
circles conservatively).
"""

from itertools import combinations

from ..graphs import ARROW, CIRCLE, TAIL, MixedGraph
from ..stats import Dataset
from .pc import _ci_independent, stable_skeleton


def _circles_graph(skeleton: MixedGraph) -> MixedGraph:
    g = MixedGraph(skeleton.node_names)
    for a, b, _, _ in skeleton.edges():
        g.add_edge(a, b, CIRCLE, CIRCLE)
    return g


def _orient_colliders(g: MixedGraph, sepsets) -> None:
    """R0: arrowheads at c for unshielded a *-* c *-* b with c not in sepset."""
    for c in range(g.n):
        for a, b in combinations(g.adjacent(c), 2):
            if g.is_adjacent(a, b):
                continue
            sep = sepsets.get(frozenset((a, b)))
            if sep is None or c in sep:
                continue
            g.set_mark(c, a, ARROW)
            g.set_mark(c, b, ARROW)


def possible_d_sep(g: MixedGraph, x: int):
    """Possible-D-SEP(x): nodes reachable along collider-or-triangle paths.

    A path step u - v - w may be extended when v is a collider on it (arrow
    marks at v on both edges) or u and w are adjacent (triangle). Mirrors
    pcalg's qreach.
    """
    out = set()
    visited = set()  # ordered steps (u, v)
    queue = []
    for v in g.adjacent(x):
        out.add(v)
        visited.add((x, v))
        queue.append((x, v))
    while queue:
        prev, cur = queue.pop(0)
        for nxt in g.adjacent(cur):
            if nxt == prev or (cur, nxt) in visited:
                continue
            collider = (
                g.mark_at(cur, prev) is ARROW and g.mark_at(cur, nxt) is ARROW
            )
            triangle = g.is_adjacent(prev, nxt)
            if collider or triangle:
                visited.add((cur, nxt))
                queue.append((cur, nxt))
                out.add(nxt)
    out.discard(x)
    return out


def _pdsep_prune(g: MixedGraph, sepsets, corr, n, cfg) -> None:
    """Retest every remaining edge against subsets of Possible-D-SEP sets."""
    pdsep = {x: possible_d_sep(g, x) for x in range(g.n)}
    for a, b in sorted(g._edges):
        removed = False
        for x, y in ((a, b), (b, a)):
            pool = sorted(pdsep[x] - {x, y})
            limit = len(pool)
            if cfg.max_cond_set is not None:
                limit = min(limit, cfg.max_cond_set)
            limit = min(limit, n - 4)  # Fisher-Z degrees of freedom
            for size in range(limit + 1):
                for cond in combinations(pool, size):
                    if _ci_independent(corr, n, x, y, cond, cfg.alpha):
                        g.remove_edge(a, b)
                        sepsets[frozenset((a, b))] = set(cond)
                        removed = True
                        break
                if removed:
                    break
            if removed:
                break


def _apply_zhang_rules(g: MixedGraph, sepsets) -> None:
    """Close under Zhang's R1-R4; mutates ``g`` to the fixed point."""
    changed = True
    while changed:
        changed = False
        changed |= _rule1(g)
        changed |= _rule2(g)
        changed |= _rule3(g)
        changed |= _rule4(g, sepsets)


def _rule1(g: MixedGraph) -> bool:
    # a *-> b o-* c, a and c nonadjacent  =>  b -> c
    hit = False
    for b in range(g.n):
        adj = g.adjacent(b)
        for a in adj:
            if g.mark_at(b, a) is not ARROW:
                continue
            for c in adj:
                if c == a or g.is_adjacent(a, c):
                    continue
                if g.mark_at(b, c) is CIRCLE:
                    g.set_mark(b, c, TAIL)
                    g.set_mark(c, b, ARROW)
                    hit = True
    return hit


def _rule2(g: MixedGraph) -> bool:
    # (a -> b *-> c) or (a *-> b -> c), a *-o c  =>  a *-> c
    hit = False
    for a in range(g.n):
        for c in g.adjacent(a):
            if g.mark_at(c, a) is not CIRCLE:
                continue
            for b in g.adjacent(a):
                if b == c or not g.is_adjacent(b, c):
                    continue
                chain1 = g.has_directed_edge(a, b) and g.mark_at(c, b) is ARROW
                chain2 = g.mark_at(b, a) is ARROW and g.has_directed_edge(b, c)
                if chain1 or chain2:
                    g.set_mark(c, a, ARROW)
                    hit = True
                    break
    return hit


def _rule3(g: MixedGraph) -> bool:
    # a *-> b <-* c, a *-o d o-* c, a and c nonadjacent, d *-o b  =>  d *-> b
    hit = False
    for b in range(g.n):
        adj_b = g.adjacent(b)
        for a, c in combinations(adj_b, 2):
            if g.is_adjacent(a, c):
                continue
            if g.mark_at(b, a) is not ARROW or g.mark_at(b, c) is not ARROW:
                continue
            for d in adj_b:
                if d in (a, c) or g.mark_at(b, d) is not CIRCLE:
                    continue
                if not (g.is_adjacent(d, a) and g.is_adjacent(d, c)):
                    continue
                if g.mark_at(d, a) is CIRCLE and g.mark_at(d, c) is CIRCLE:
                    g.set_mark(b, d, ARROW)
                    hit = True
    return hit


def _discriminating_theta(g: MixedGraph, a: int, b: int, c: int):
    """Endpoint of a discriminating path <theta, ..., a, b, c>, or None.

    Every vertex between theta and b must be a collider on the path and a
    parent of c; theta itself must not be adjacent to c.
    """
    stack = [[b, a]]
    while stack:
        path = stack.pop()
        end = path[-1]
        for v in sorted(g.adjacent(end)):
            if v in path or v == c:
                continue
            if g.mark_at(end, v) is not ARROW:
                continue  # end must collide on the path
            if not g.is_adjacent(v, c):
                return v
            if g.mark_at(v, end) is ARROW and g.has_directed_edge(v, c):
                stack.append(path + [v])
    return None


def _rule4(g: MixedGraph, sepsets) -> bool:
    # discriminating path <theta,...,a,b,c> with b o-* c:
    #   b in sepset(theta, c)  =>  b -> c;  otherwise a <-> b <-> c
    hit = False
    for b in range(g.n):
        for c in g.adjacent(b):
            if g.mark_at(b, c) is not CIRCLE:
                continue
            for a in g.adjacent(b):
                if a == c or not g.is_adjacent(a, c):
                    continue
                # a must collide toward b and be a parent of c
                if g.mark_at(a, b) is not ARROW:
                    continue
                if not g.has_directed_edge(a, c):
                    continue
                theta = _discriminating_theta(g, a, b, c)
                if theta is None:
                    continue
                sep = sepsets.get(frozenset((theta, c)))
                if sep is not None and b in sep:
                    g.set_mark(b, c, TAIL)
                    g.set_mark(c, b, ARROW)
                else:
                    g.set_mark(a, b, ARROW)
                    g.set_mark(b, a, ARROW)
                    g.set_mark(b, c, ARROW)
                    g.set_mark(c, b, ARROW)
                hit = True
                break
    return hit


def fci(data: Dataset, cfg) -> MixedGraph:
    """FCI; returns a PAG with tail/arrow/circle endpoint marks."""
    from . import prepare

    data = prepare(data, cfg)
    skeleton, sepsets, corr = stable_skeleton(data, cfg)

    staged = _circles_graph(skeleton)
    _orient_colliders(staged, sepsets)
    _pdsep_prune(staged, sepsets, corr, data.n, cfg)

    pag = _circles_graph(staged)  # reorient everything to circles
    _orient_colliders(pag, sepsets)
    _apply_zhang_rules(pag, sepsets)
    return pag
