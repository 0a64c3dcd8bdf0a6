"""Greedy equivalence search with the decomposable Gaussian BIC.

Forward and backward phases over CPDAGs using Chickering's Insert and
Delete operators. After each applied operator the state is re-completed:
take a consistent DAG extension, then the CPDAG of that DAG.
"""

from itertools import combinations

from .. import _kernels
from ..errors import GraphError
from ..graphs import (
    ARROW,
    TAIL,
    MixedGraph,
    cpdag_of,
    pdag_to_dag,
)
from ..stats import Dataset, _mle_covariance

# minimum score gain to accept an operator; guards against float dither
_GAIN_EPS = 1e-9


class BicScoreCache:
    """Memoized Gaussian BIC local scores over one dataset."""

    def __init__(self, data: Dataset):
        self.cov = _mle_covariance(data.values)
        self.n = data.n
        self._cache = {}

    def local(self, node: int, parents: frozenset) -> float:
        key = (node, parents)
        hit = self._cache.get(key)
        if hit is None:
            hit, _ = _kernels.gauss_bic_local(
                self.cov, self.n, node, sorted(parents)
            )
            self._cache[key] = hit
        return hit

    def total(self, dag) -> float:
        return sum(
            self.local(v, frozenset(dag.parents(v))) for v in range(dag.n)
        )


def _is_clique(g: MixedGraph, nodes) -> bool:
    return all(g.is_adjacent(a, b) for a, b in combinations(sorted(nodes), 2))


def _blocks_all_semidirected(g: MixedGraph, src: int, dst: int, blocked) -> bool:
    """True when every semi-directed path src => dst meets ``blocked``.

    Semi-directed: undirected edges both ways, directed edges along their
    direction. Source itself is never considered blocked.
    """
    if src == dst:
        return False
    seen = {src}
    frontier = [src]
    while frontier:
        u = frontier.pop()
        steps = g.children(u) + g.undirected_neighbors(u)
        for w in steps:
            if w == dst:
                return False
            if w not in seen and w not in blocked:
                seen.add(w)
                frontier.append(w)
    return True


def _na(g: MixedGraph, y: int, x: int):
    """Undirected neighbors of y that are adjacent to x."""
    return {u for u in g.undirected_neighbors(y) if g.is_adjacent(u, x)}


def _subsets(items):
    items = sorted(items)
    for size in range(len(items) + 1):
        yield from combinations(items, size)


def _best_insert(g: MixedGraph, score: BicScoreCache):
    best = None
    for y in range(g.n):
        pa_y = frozenset(g.parents(y))
        for x in range(g.n):
            if x == y or g.is_adjacent(x, y):
                continue
            na = _na(g, y, x)
            t_pool = [
                u for u in g.undirected_neighbors(y) if not g.is_adjacent(u, x)
            ]
            for t in _subsets(t_pool):
                both = na | set(t)
                if not _is_clique(g, both):
                    continue
                if not _blocks_all_semidirected(g, y, x, both):
                    continue
                base = pa_y | both
                gain = score.local(y, base | {x}) - score.local(y, base)
                key = (x, y, t)
                if gain > _GAIN_EPS and (
                    best is None
                    or gain > best[0] + 1e-12
                    or (abs(gain - best[0]) <= 1e-12 and key < best[1])
                ):
                    best = (gain, key)
    return best


def _best_delete(g: MixedGraph, score: BicScoreCache):
    best = None
    for y in range(g.n):
        pa_y = frozenset(g.parents(y))
        for x in range(g.n):
            if x == y:
                continue
            if not (g.has_directed_edge(x, y) or g.has_undirected_edge(x, y)):
                continue
            na = _na(g, y, x)
            for h in _subsets(na):
                if not _is_clique(g, na - set(h)):
                    continue
                aux = pa_y | (na - set(h))
                gain = score.local(y, aux - {x}) - score.local(y, aux | {x})
                key = (x, y, h)
                if gain > _GAIN_EPS and (
                    best is None
                    or gain > best[0] + 1e-12
                    or (abs(gain - best[0]) <= 1e-12 and key < best[1])
                ):
                    best = (gain, key)
    return best


def _recomplete(pdag: MixedGraph) -> MixedGraph:
    return cpdag_of(pdag_to_dag(pdag))


def _apply_insert(g: MixedGraph, x: int, y: int, t) -> MixedGraph:
    out = g.copy()
    out.add_edge(x, y, TAIL, ARROW)
    for u in t:
        out.set_mark(u, y, TAIL)
        out.set_mark(y, u, ARROW)
    return _recomplete(out)


def _apply_delete(g: MixedGraph, x: int, y: int, h) -> MixedGraph:
    out = g.copy()
    out.remove_edge(x, y)
    for u in h:
        if out.has_undirected_edge(y, u):
            out.set_mark(y, u, TAIL)
            out.set_mark(u, y, ARROW)
        if out.has_undirected_edge(x, u):
            out.set_mark(x, u, TAIL)
            out.set_mark(u, x, ARROW)
    return _recomplete(out)


def ges(data: Dataset, cfg, trace: list = None) -> MixedGraph:
    """Two-phase GES; returns a CPDAG.

    When ``trace`` is a list, every accepted operator appends a tuple
    (phase, operator, total score after the move).
    """
    from . import prepare

    data = prepare(data, cfg)
    score = BicScoreCache(data)
    g = MixedGraph(data.names)

    while True:  # forward: best valid Insert while the score improves
        best = _best_insert(g, score)
        if best is None:
            break
        _, (x, y, t) = best
        try:
            g = _apply_insert(g, x, y, t)
        except GraphError:
            break
        if trace is not None:
            trace.append(("insert", (x, y, t), score.total(pdag_to_dag(g))))
    while True:  # backward: best valid Delete while the score improves
        best = _best_delete(g, score)
        if best is None:
            break
        _, (x, y, h) = best
        try:
            g = _apply_delete(g, x, y, h)
        except GraphError:
            break
        if trace is not None:
            trace.append(("delete", (x, y, h), score.total(pdag_to_dag(g))))
    return g


def total_bic(data: Dataset, graph: MixedGraph, cfg=None) -> float:
    """Total decomposable BIC of a CPDAG or DAG (via a consistent extension)."""
    if cfg is not None:
        from . import prepare

        data = prepare(data, cfg)
    dag = pdag_to_dag(graph)
    return BicScoreCache(data).total(dag)
