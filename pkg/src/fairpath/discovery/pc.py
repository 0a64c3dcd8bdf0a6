"""Order-independent (stable) PC with the Fisher-Z test."""

from itertools import combinations

from .. import _kernels
from ..errors import DataError
from ..graphs import TAIL, MixedGraph, apply_meek_rules, orient_v_structures
from ..stats import CORR_CLAMP, Dataset, correlation_matrix


def _ci_independent(corr, n, i, j, cond, alpha) -> bool:
    """Fisher-Z independence decision straight from the correlation matrix."""
    try:
        r = _kernels.partial_correlation(corr, i, j, list(cond))
    except Exception:  # singular conditioning set: treat as dependent
        return False
    if abs(r) >= CORR_CLAMP:
        return False
    stat = _kernels.fisher_z_stat(r, n, len(cond))
    return _kernels.normal_sf2(stat) > alpha


def stable_skeleton(data: Dataset, cfg):
    """PC-stable skeleton phase.

    At each conditioning-set size, the adjacency sets that conditioning
    candidates are drawn from are frozen before any removal, which makes the
    resulting skeleton invariant to the column order of the input.

    Returns ``(skeleton, sepsets, corr)`` where the skeleton is an
    undirected MixedGraph and sepsets maps frozenset pairs to the separating
    set that removed the edge.
    """
    n, d = data.n, data.d
    if n - 3 < 1:
        raise DataError(f"dataset too small for the Fisher-Z test (n={n})")
    corr = correlation_matrix(data)

    g = MixedGraph(data.names)
    for a, b in combinations(range(d), 2):
        g.add_edge(a, b, TAIL, TAIL)
    sepsets = {}

    level = 0
    while True:
        if n - level - 3 < 1:
            break
        if cfg.max_cond_set is not None and level > cfg.max_cond_set:
            break
        frozen_adj = {v: set(g.adjacent(v)) for v in range(d)}
        testable = False
        for a, b in sorted(g._edges):
            if not g.has_edge(a, b):
                continue
            removed = False
            for x, y in ((a, b), (b, a)):
                candidates = sorted(frozen_adj[x] - {y})
                if len(candidates) < level:
                    continue
                testable = True
                for cond in combinations(candidates, level):
                    if _ci_independent(corr, n, x, y, cond, cfg.alpha):
                        g.remove_edge(a, b)
                        sepsets[frozenset((a, b))] = set(cond)
                        removed = True
                        break
                if removed:
                    break
        if not testable:
            break
        level += 1
    return g, sepsets, corr


def pc(data: Dataset, cfg):
    """Stable PC. Returns ``(cpdag, sepsets)``."""
    from . import prepare

    data = prepare(data, cfg)
    skeleton, sepsets, _ = stable_skeleton(data, cfg)
    pdag = orient_v_structures(skeleton, sepsets)
    return apply_meek_rules(pdag), sepsets
