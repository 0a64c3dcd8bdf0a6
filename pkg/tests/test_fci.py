import numpy as np
import pytest

from conftest import random_weighted_spec
from fairpath.discovery import DiscoveryConfig, fci
from fairpath.discovery.fci import possible_d_sep
from fairpath.discovery.pc import stable_skeleton
from fairpath.graphs import ARROW, CIRCLE, TAIL, Mark, MixedGraph, skeleton_pairs
from fairpath.scm import ScmEdge, ScmLatent, ScmNode, ScmSpec, sample
from fairpath.stats import CONTINUOUS, Dataset

CFG = DiscoveryConfig()


def latent_pair_spec(seed):
    # L -> A, L -> B with no observed A-B cause
    return ScmSpec(
        nodes=(ScmNode("a"), ScmNode("b"), ScmNode("c")),
        edges=(ScmEdge("a", "c", 1.0), ScmEdge("b", "c", 1.0)),
        latents=(ScmLatent("l", (("a", 1.0), ("b", 1.0))),),
        seed=seed,
    )


class TestFci:
    def test_independent_columns_empty_pag(self):
        rng = np.random.default_rng(0)
        ds = Dataset(rng.normal(size=(5000, 4)),
                     ("a", "b", "c", "d"), (CONTINUOUS,) * 4)
        assert fci(ds, CFG).edge_count() == 0

    def test_latent_confounder_leaves_noncausal_marks(self):
        # under a hidden common cause the A-B edge must never become a
        # directed tail-arrow claim in either direction
        hits = 0
        for seed in range(20):
            ds = sample(latent_pair_spec(seed), 10000)
            pag = fci(ds, CFG)
            if not pag.is_adjacent(0, 1):
                continue
            ma, mb = pag.marks(0, 1)
            if {ma, mb} == {TAIL, ARROW}:
                continue
            hits += 1
        assert hits >= 16  # >= 80% of seeds

    def test_pure_collider_orients_arrowheads(self):
        hits = 0
        for seed in range(20):
            spec = ScmSpec(
                nodes=(ScmNode("x"), ScmNode("y"), ScmNode("z")),
                edges=(ScmEdge("x", "z", 1.0), ScmEdge("y", "z", 1.0)),
                seed=seed,
            )
            ds = sample(spec, 10000)
            pag = fci(ds, CFG)
            ok = (
                pag.is_adjacent(0, 2)
                and pag.is_adjacent(1, 2)
                and not pag.is_adjacent(0, 1)
                and pag.mark_at(2, 0) is ARROW
                and pag.mark_at(2, 1) is ARROW
            )
            hits += ok
        assert hits >= 18

    def test_marks_are_tail_arrow_circle(self):
        rng = np.random.default_rng(1)
        for seed in range(5):
            spec, _ = random_weighted_spec(5, rng, seed=50 + seed)
            ds = sample(spec, 3000)
            pag = fci(ds, CFG)
            for _, _, ma, mb in pag.edges():
                assert isinstance(ma, Mark) and isinstance(mb, Mark)

    def test_skeleton_subset_of_pc_skeleton(self):
        rng = np.random.default_rng(2)
        for seed in range(8):
            spec, _ = random_weighted_spec(5, rng, seed=60 + seed)
            ds = sample(spec, 3000)
            pc_skel, _, _ = stable_skeleton(ds.standardized(), CFG)
            pag = fci(ds, CFG)
            assert skeleton_pairs(pag) <= skeleton_pairs(pc_skel)


class TestPossibleDSep:
    def test_collider_path_reachable(self):
        # a *-> c <-* b: b is in pdsep(a) through the collider at c
        g = MixedGraph(["a", "b", "c"])
        g.add_edge(0, 2, CIRCLE, ARROW)
        g.add_edge(1, 2, CIRCLE, ARROW)
        assert possible_d_sep(g, 0) == {1, 2}

    def test_noncollider_path_blocked(self):
        # tails at c block the walk a - c - b unless there is a triangle
        g = MixedGraph(["a", "b", "c"])
        g.add_edge(0, 2, CIRCLE, TAIL)
        g.add_edge(1, 2, CIRCLE, TAIL)
        assert possible_d_sep(g, 0) == {2}

    def test_triangle_extends(self):
        g = MixedGraph(["a", "b", "c"])
        g.add_edge(0, 2, CIRCLE, TAIL)
        g.add_edge(1, 2, CIRCLE, TAIL)
        g.add_edge(0, 1, CIRCLE, CIRCLE)
        assert possible_d_sep(g, 0) == {1, 2}
