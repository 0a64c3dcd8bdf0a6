"""Graph representation shared by discovery, metrics and the fairness mapping.

A :class:`MixedGraph` stores at most one edge per unordered node pair, as a
pair of endpoint marks. The same structure serves as a DAG (tail-arrow edges,
acyclic), a CPDAG (tail-arrow and tail-tail edges) and a PAG (circle marks
allowed). Nodes are addressed by integer index into ``node_names``.
"""

import enum
import re
from itertools import combinations

from .errors import GraphError


class Mark(enum.Enum):
    TAIL = "tail"
    ARROW = "arrow"
    CIRCLE = "circle"


TAIL = Mark.TAIL
ARROW = Mark.ARROW
CIRCLE = Mark.CIRCLE

# edge-list tokens, keyed by (mark at left node, mark at right node)
_TOKEN_OF = {
    (TAIL, ARROW): "->",
    (TAIL, TAIL): "--",
    (CIRCLE, CIRCLE): "o-o",
    (CIRCLE, ARROW): "o->",
    (ARROW, ARROW): "<->",
}
_MARKS_OF = {tok: marks for marks, tok in _TOKEN_OF.items()}


def normalize_name(name: str) -> str:
    """Canonical form used when matching variables across sources.

    Case-insensitive; whitespace, hyphens and underscores are stripped so that
    e.g. ``Serum_Sodium`` in an expert graph file matches ``serum sodium`` in
    a CSV header.
    """
    return re.sub(r"[\s_\-]+", "", name).lower()


class MixedGraph:
    """Labeled graph with per-endpoint marks.

    Mutation is intended for the construction phase only; all algorithms in
    this package treat finished graphs as read-only values.
    """

    def __init__(self, node_names, edges=()):
        self.node_names = list(node_names)
        if len(set(self.node_names)) != len(self.node_names):
            raise GraphError("duplicate node names")
        self._edges = {}  # (a, b) with a < b -> (mark_at_a, mark_at_b)
        for a, b, ma, mb in edges:
            self.add_edge(a, b, ma, mb)

    # -- construction -----------------------------------------------------

    def add_edge(self, a: int, b: int, mark_a: Mark, mark_b: Mark) -> None:
        a, b = int(a), int(b)
        self._check_node(a)
        self._check_node(b)
        if a == b:
            raise GraphError(f"self-loop at node {self.node_names[a]}")
        key = (a, b) if a < b else (b, a)
        if key in self._edges:
            raise GraphError(
                f"duplicate edge {self.node_names[a]} / {self.node_names[b]}"
            )
        self._edges[key] = (mark_a, mark_b) if a < b else (mark_b, mark_a)

    def remove_edge(self, a: int, b: int) -> None:
        key = (a, b) if a < b else (b, a)
        del self._edges[key]

    def set_mark(self, at: int, other: int, mark: Mark) -> None:
        """Set the mark at node ``at`` on the edge between ``at`` and ``other``."""
        key = (at, other) if at < other else (other, at)
        ma, mb = self._edges[key]
        if key[0] == at:
            self._edges[key] = (mark, mb)
        else:
            self._edges[key] = (ma, mark)

    def _check_node(self, v: int) -> None:
        if not 0 <= v < len(self.node_names):
            raise IndexError(f"node index {v} out of range")

    # -- queries ----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.node_names)

    def index(self, name: str) -> int:
        """Index of a node by normalized-name match."""
        want = normalize_name(name)
        for i, nm in enumerate(self.node_names):
            if normalize_name(nm) == want:
                return i
        raise KeyError(f"no node named {name!r}")

    def has_edge(self, a: int, b: int) -> bool:
        key = (a, b) if a < b else (b, a)
        return key in self._edges

    def marks(self, a: int, b: int):
        """Marks ``(at_a, at_b)`` of the edge between ``a`` and ``b``."""
        key = (a, b) if a < b else (b, a)
        ma, mb = self._edges[key]
        return (ma, mb) if key[0] == a else (mb, ma)

    def mark_at(self, at: int, other: int) -> Mark:
        return self.marks(at, other)[0]

    def edges(self):
        """Edges as ``(a, b, mark_at_a, mark_at_b)`` with ``a < b``, sorted."""
        return [(a, b, ma, mb) for (a, b), (ma, mb) in sorted(self._edges.items())]

    def edge_count(self) -> int:
        return len(self._edges)

    def adjacent(self, v: int):
        out = []
        for a, b in self._edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    def is_adjacent(self, a: int, b: int) -> bool:
        return self.has_edge(a, b)

    def has_directed_edge(self, parent: int, child: int) -> bool:
        if not self.has_edge(parent, child):
            return False
        ma, mb = self.marks(parent, child)
        return ma is TAIL and mb is ARROW

    def has_undirected_edge(self, a: int, b: int) -> bool:
        if not self.has_edge(a, b):
            return False
        return self.marks(a, b) == (TAIL, TAIL)

    def parents(self, v: int):
        return [u for u in self.adjacent(v) if self.has_directed_edge(u, v)]

    def children(self, v: int):
        return [u for u in self.adjacent(v) if self.has_directed_edge(v, u)]

    def undirected_neighbors(self, v: int):
        return [u for u in self.adjacent(v) if self.has_undirected_edge(v, u)]

    def directed_edges(self):
        out = []
        for (a, b), (ma, mb) in self._edges.items():
            if ma is TAIL and mb is ARROW:
                out.append((a, b))
            elif ma is ARROW and mb is TAIL:
                out.append((b, a))
        return sorted(out)

    def is_dag_view(self) -> bool:
        all_directed = all(
            {ma, mb} == {TAIL, ARROW} for ma, mb in self._edges.values()
        )
        return all_directed and not _has_directed_cycle(self)

    def is_cpdag_view(self) -> bool:
        for ma, mb in self._edges.values():
            if {ma, mb} != {TAIL, ARROW} and (ma, mb) != (TAIL, TAIL):
                return False
        return not _has_directed_cycle(self)

    # -- value semantics ---------------------------------------------------

    def copy(self) -> "MixedGraph":
        g = MixedGraph(self.node_names)
        g._edges = dict(self._edges)
        return g

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self.node_names == other.node_names and self._edges == other._edges

    def __hash__(self):
        return hash((tuple(self.node_names), frozenset(self._edges.items())))

    def __repr__(self):
        return f"MixedGraph({len(self.node_names)} nodes, {len(self._edges)} edges)"


class Dag(MixedGraph):
    """MixedGraph restricted to the DAG view; validated on construction."""

    def __init__(self, node_names, edges=()):
        super().__init__(node_names, edges)
        self.validate()

    def validate(self) -> None:
        for ma, mb in self._edges.values():
            if {ma, mb} != {TAIL, ARROW}:
                raise GraphError("Dag requires directed (tail-arrow) edges only")
        if _has_directed_cycle(self):
            raise GraphError("directed cycle in Dag")

    @classmethod
    def from_parent_lists(cls, node_names, parent_map):
        """Build from ``{child_name: [parent_name, ...]}``."""
        g = cls(node_names)
        idx = {nm: i for i, nm in enumerate(node_names)}
        for child, parents in parent_map.items():
            for p in parents:
                g.add_edge(idx[p], idx[child], TAIL, ARROW)
        g.validate()
        return g


def _has_directed_cycle(g: MixedGraph) -> bool:
    """Three-color DFS over the directed part of ``g``."""
    children = {v: [] for v in range(g.n)}
    for p, c in g.directed_edges():
        children[p].append(c)
    color = [0] * g.n  # 0 white, 1 gray, 2 black
    for root in range(g.n):
        if color[root]:
            continue
        stack = [(root, iter(children[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for u in it:
                if color[u] == 1:
                    return True
                if color[u] == 0:
                    color[u] = 1
                    stack.append((u, iter(children[u])))
                    advanced = True
                    break
            if not advanced:
                color[v] = 2
                stack.pop()
    return False


def is_acyclic(g: MixedGraph) -> bool:
    """True iff the all-directed graph ``g`` has no directed cycle."""
    for ma, mb in g._edges.values():
        if {ma, mb} != {TAIL, ARROW}:
            raise GraphError("mixed marks in DAG check")
    return not _has_directed_cycle(g)


def topological_order(g: MixedGraph):
    """Topological order of the directed part; raises on a cycle."""
    indeg = [0] * g.n
    children = {v: [] for v in range(g.n)}
    for p, c in g.directed_edges():
        indeg[c] += 1
        children[p].append(c)
    ready = sorted(v for v in range(g.n) if indeg[v] == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for c in sorted(children[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
        ready.sort()
    if len(order) != g.n:
        raise GraphError("directed cycle")
    return order


def _reachable(v, step):
    """All nodes reachable from ``v`` through ``step`` (v excluded)."""
    seen = {v}
    frontier = [v]
    while frontier:
        nxt = []
        for u in frontier:
            for w in step(u):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    seen.discard(v)
    return seen


def ancestors(g: MixedGraph, v: int):
    """All ``u`` with a directed path u => v (v excluded)."""
    g._check_node(v)
    return _reachable(v, g.parents)


def descendants(g: MixedGraph, v: int):
    g._check_node(v)
    return _reachable(v, g.children)


def directed_paths_through(g: MixedGraph, src: int, dst: int):
    """Intermediate vertices on at least one directed path src => dst.

    In an acyclic graph this is exactly descendants(src) & ancestors(dst):
    any such vertex splices two directed paths into one, and directed walks
    cannot revisit vertices.
    """
    if src == dst:
        raise GraphError("src and dst must differ")
    return descendants(g, src) & ancestors(g, dst)


def _possible_step(g: MixedGraph, u: int):
    """Successors of ``u`` under the possibly-directed traversal rule.

    An edge is traversable from u to w when it could be a cause of w in some
    member of the equivalence class: the mark at u is not an arrowhead and
    the mark at w is not a tail. Tail-tail (CPDAG undirected) edges are
    traversable both ways; arrow-arrow (bidirected) edges never are.
    """
    out = []
    for w in g.adjacent(u):
        mu, mw = g.marks(u, w)
        if (mu is not ARROW and mw is not TAIL) or (mu is TAIL and mw is TAIL):
            out.append(w)
    return out


def possible_ancestors(g: MixedGraph, v: int):
    """All ``u`` with a possibly-directed path u => v (v excluded)."""
    g._check_node(v)
    back = lambda u: [
        w
        for w in g.adjacent(u)
        if u in _possible_step(g, w)
    ]
    return _reachable(v, back)


def possible_descendants(g: MixedGraph, v: int):
    g._check_node(v)
    return _reachable(v, lambda u: _possible_step(g, u))


# -- orientation machinery -------------------------------------------------


def _would_create_cycle(g: MixedGraph, a: int, b: int) -> bool:
    """True if orienting a -> b closes a directed cycle."""
    if a == b:
        return True
    seen = {b}
    frontier = [b]
    while frontier:
        u = frontier.pop()
        for c in g.children(u):
            if c == a:
                return True
            if c not in seen:
                seen.add(c)
                frontier.append(c)
    return False


def apply_meek_rules(g: MixedGraph, forbidden=None) -> MixedGraph:
    """Close a partially directed graph under Meek rules R1-R4.

    ``forbidden`` is the background-knowledge hook: a set of ordered pairs
    (a, b) that must not be oriented a -> b. It defaults to empty, in which
    case R4 never fires on v-structure-closed inputs but is still applied.

    The closure never removes an edge, never reverses a directed edge, and
    skips any orientation that would close a directed cycle.
    """
    for ma, mb in g._edges.values():
        if {ma, mb} != {TAIL, ARROW} and (ma, mb) != (TAIL, TAIL):
            raise GraphError("Meek rules need a partially directed graph")
    forbidden = forbidden or set()
    out = g.copy()

    def orient(a, b):
        if (a, b) in forbidden:
            return False
        if not out.has_undirected_edge(a, b):
            return False
        if _would_create_cycle(out, a, b):
            return False
        out.set_mark(a, b, TAIL)
        out.set_mark(b, a, ARROW)
        return True

    changed = True
    while changed:
        changed = False
        # R1: a -> b, b - c, a and c nonadjacent  =>  b -> c
        for b, c in list(out._edges):
            for x, y in ((b, c), (c, b)):
                if not out.has_undirected_edge(x, y):
                    continue
                for a in out.parents(x):
                    if a != y and not out.is_adjacent(a, y):
                        changed |= orient(x, y)
                        break
        # R2: a -> b -> c, a - c  =>  a -> c
        for a, c in list(out._edges):
            for x, y in ((a, c), (c, a)):
                if not out.has_undirected_edge(x, y):
                    continue
                for b in out.children(x):
                    if out.has_directed_edge(b, y):
                        changed |= orient(x, y)
                        break
        # R3: a - b, a - c, a - d, c -> b, d -> b, c and d nonadjacent  =>  a -> b
        for a in range(out.n):
            for b in out.undirected_neighbors(a):
                into_b = [
                    c
                    for c in out.parents(b)
                    if out.has_undirected_edge(a, c)
                ]
                hit = any(
                    not out.is_adjacent(c, d)
                    for c, d in combinations(into_b, 2)
                )
                if hit:
                    changed |= orient(a, b)
        # R4: a - d, a - b, b -> c, c -> d, b and d nonadjacent  =>  a -> d
        for a in range(out.n):
            for d in out.undirected_neighbors(a):
                done = False
                for b in out.undirected_neighbors(a):
                    if b == d or out.is_adjacent(b, d):
                        continue
                    for c in out.children(b):
                        if out.has_directed_edge(c, d):
                            changed |= orient(a, d)
                            done = True
                            break
                    if done:
                        break
    return out


def orient_v_structures(skeleton: MixedGraph, sepsets) -> MixedGraph:
    """Orient unshielded colliders a -> c <- b from a sepset map.

    ``sepsets`` maps frozensets {a, b} of nonadjacent pairs to the separating
    set found for them. Triples are scanned in index order; with inconsistent
    test results later triples can conflict with earlier ones, so an
    orientation is skipped when it would reverse an existing arrow or close
    a directed cycle (the output must stay a valid partial DAG).
    """
    g = skeleton.copy()
    for c in range(g.n):
        for a, b in combinations(g.adjacent(c), 2):
            if g.is_adjacent(a, b):
                continue
            sep = sepsets.get(frozenset((a, b)))
            if sep is None or c in sep:
                continue
            for x in (a, b):
                if g.has_undirected_edge(x, c) and not _would_create_cycle(g, x, c):
                    g.set_mark(x, c, TAIL)
                    g.set_mark(c, x, ARROW)
    return g


def cpdag_of(dag: MixedGraph) -> MixedGraph:
    """CPDAG of a DAG: skeleton + v-structures, closed under Meek rules."""
    if not is_acyclic(dag):
        raise GraphError("cpdag_of requires an acyclic input")
    skel = MixedGraph(dag.node_names)
    for a, b, _, _ in dag.edges():
        skel.add_edge(a, b, TAIL, TAIL)
    pdag = skel
    for c in range(dag.n):
        for a, b in combinations(dag.parents(c), 2):
            if not dag.is_adjacent(a, b):
                for x in (a, b):
                    if pdag.has_undirected_edge(x, c):
                        pdag.set_mark(x, c, TAIL)
                        pdag.set_mark(c, x, ARROW)
    return apply_meek_rules(pdag)


def pdag_to_dag(g: MixedGraph) -> Dag:
    """Consistent DAG extension of a PDAG (Dor & Tarsi 1992).

    Raises GraphError when no extension exists.
    """
    work = g.copy()
    result = {}  # oriented edges (parent, child)
    for p, c in work.directed_edges():
        result[(p, c)] = None
    alive = set(range(work.n))
    while alive:
        found = None
        for v in sorted(alive):
            if work.children(v):
                continue
            nbrs = work.undirected_neighbors(v)
            others = [u for u in work.adjacent(v)]
            ok = all(
                u == w or work.is_adjacent(u, w)
                for u in nbrs
                for w in others
                if w != u
            )
            if ok:
                found = v
                break
        if found is None:
            raise GraphError("PDAG admits no consistent DAG extension")
        for u in work.undirected_neighbors(found):
            result[(u, found)] = None
        for u in list(work.adjacent(found)):
            work.remove_edge(u, found)
        alive.remove(found)
    dag = Dag(g.node_names)
    for p, c in result:
        dag.add_edge(p, c, TAIL, ARROW)
    dag.validate()
    return dag


# -- edge-list text format ---------------------------------------------------


def format_edge_list(g: MixedGraph) -> str:
    """Serialize to the edge-list text format.

    One line per node (pins the variable order and keeps isolated nodes),
    then one line per edge. Directed edges are written tail first.
    """
    lines = [f"# {g.n} nodes, {g.edge_count()} edges"]
    lines.extend(g.node_names)
    for a, b, ma, mb in g.edges():
        if (ma, mb) in _TOKEN_OF:
            lines.append(f"{g.node_names[a]} {_TOKEN_OF[(ma, mb)]} {g.node_names[b]}")
        elif (mb, ma) in _TOKEN_OF:
            lines.append(f"{g.node_names[b]} {_TOKEN_OF[(mb, ma)]} {g.node_names[a]}")
        else:
            raise GraphError(
                f"edge marks ({ma.value}, {mb.value}) have no edge-list token"
            )
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> MixedGraph:
    """Parse the edge-list text format.

    Grammar per line: a comment (``# ...``), a bare node name, or an edge
    ``A <tok> B`` with tok in {->, --, o-o, o->, <->}. Unknown tokens and
    duplicate pair edges are errors that carry the line number. Node order
    is order of first appearance.
    """
    names = []
    index = {}
    pending = []

    def intern(name, lineno):
        if any(ch.isspace() for ch in name):
            raise GraphError(f"line {lineno}: node name may not contain spaces")
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1:
            intern(parts[0], lineno)
            continue
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'A <mark> B', got {raw!r}")
        left, tok, right = parts
        if tok not in _MARKS_OF:
            raise GraphError(f"line {lineno}: unknown mark token {tok!r}")
        a = intern(left, lineno)
        b = intern(right, lineno)
        pending.append((lineno, a, b, *_MARKS_OF[tok]))

    g = MixedGraph(names)
    for lineno, a, b, ma, mb in pending:
        try:
            g.add_edge(a, b, ma, mb)
        except GraphError as exc:
            raise GraphError(f"line {lineno}: {exc}") from None
    return g


def relabel_to(g: MixedGraph, node_names) -> MixedGraph:
    """Re-index ``g`` onto a reference node order, matching normalized names.

    Raises GraphError listing any difference between the two name sets.
    """
    ref = {normalize_name(nm): i for i, nm in enumerate(node_names)}
    got = {normalize_name(nm): i for i, nm in enumerate(g.node_names)}
    missing = sorted(set(ref) - set(got))
    extra = sorted(set(got) - set(ref))
    if missing or extra:
        raise GraphError(
            f"variable names differ: missing={missing}, unexpected={extra}"
        )
    out = MixedGraph(list(node_names))
    for a, b, ma, mb in g.edges():
        na = ref[normalize_name(g.node_names[a])]
        nb = ref[normalize_name(g.node_names[b])]
        out.add_edge(na, nb, ma, mb)
    return out


def skeleton_pairs(g: MixedGraph):
    """Unordered adjacent index pairs ``(a, b)`` with a < b."""
    return set(g._edges)


def unshielded_triples(g: MixedGraph):
    """Triples (a, c, b) with a-c, c-b adjacent and a, b nonadjacent."""
    out = []
    for c in range(g.n):
        for a, b in combinations(g.adjacent(c), 2):
            if not g.is_adjacent(a, b):
                out.append((a, c, b))
    return out
