"""Map a graph plus (protected, outcome) designation to the Standard
Fairness Model: mediators W, confounders Z, and dropped variables.

Mediators are variables on directed paths from the protected attribute to
the outcome; confounders are ancestors of the outcome that are neither the
protected attribute nor mediators. Strict mode walks only directed edges
(DAG semantics); Possible mode also walks undirected and circle edges in
both directions, the conservative reading for CPDAG/PAG inputs. Bidirected
edges carry no causal direction in either mode.
"""

from dataclasses import dataclass

from .errors import GraphError
from .graphs import (
    MixedGraph,
    ancestors,
    descendants,
    possible_ancestors,
    possible_descendants,
    topological_order,
)

STRICT = "strict"
POSSIBLE = "possible"


@dataclass(frozen=True)
class SfmAssignment:
    x: int
    y: int
    w: tuple  # mediators, topologically ordered where the graph directs them
    z: tuple  # confounders, index order
    dropped: tuple
    mode: str
    node_names: tuple

    def as_dict(self) -> dict:
        nm = self.node_names
        return {
            "protected": nm[self.x],
            "outcome": nm[self.y],
            "mediators": [nm[i] for i in self.w],
            "confounders": [nm[i] for i in self.z],
            "dropped": [nm[i] for i in self.dropped],
            "mode": self.mode,
        }


def default_mode(g: MixedGraph) -> str:
    """Strict for DAG inputs, Possible for anything partially oriented."""
    return STRICT if g.is_dag_view() else POSSIBLE


def derive_sfm(g: MixedGraph, x: int, y: int, mode: str = None) -> SfmAssignment:
    """Partition the variables of ``g`` around protected ``x`` and outcome ``y``."""
    if x == y:
        raise GraphError("protected attribute and outcome must differ")
    g._check_node(x)
    g._check_node(y)
    if mode is None:
        mode = default_mode(g)
    if mode == STRICT:
        anc_y = ancestors(g, y)
        desc_x = descendants(g, x)
    elif mode == POSSIBLE:
        anc_y = possible_ancestors(g, y)
        desc_x = possible_descendants(g, x)
    else:
        raise GraphError(f"unknown SFM mode {mode!r}")

    w = (desc_x & anc_y) - {x, y}
    z = anc_y - w - {x, y}
    dropped = set(range(g.n)) - w - z - {x, y}
    return SfmAssignment(
        x=x,
        y=y,
        w=tuple(_mediator_order(g, w)),
        z=tuple(sorted(z)),
        dropped=tuple(sorted(dropped)),
        mode=mode,
        node_names=tuple(g.node_names),
    )


def derive_sfm_named(g: MixedGraph, protected: str, outcome: str,
                     mode: str = None) -> SfmAssignment:
    return derive_sfm(g, g.index(protected), g.index(outcome), mode)


def _mediator_order(g: MixedGraph, w):
    """Mediators ordered by the directed part of the graph.

    A topological order of the directed relation, so mediator models respect
    mediator-to-mediator edges when the graph has them. Index order is the
    fallback when the directed part does not order the graph (e.g. a PAG
    whose arrowheads happen to cycle).
    """
    try:
        order = topological_order(g)
    except GraphError:
        return sorted(w)
    rank = {v: k for k, v in enumerate(order)}
    return sorted(w, key=lambda v: (rank[v], v))
