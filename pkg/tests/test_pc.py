import numpy as np
import pytest

from conftest import random_weighted_spec
from fairpath.discovery import DiscoveryConfig, pc
from fairpath.discovery.pc import stable_skeleton
from fairpath.errors import DataError
from fairpath.graphs import cpdag_of, relabel_to, skeleton_pairs
from fairpath.scm import ScmEdge, ScmNode, ScmSpec, sample
from fairpath.stats import CONTINUOUS, Dataset

CFG = DiscoveryConfig()


def shuffled(data, rng):
    perm = rng.permutation(data.d)
    return Dataset(
        data.values[:, perm],
        tuple(data.names[k] for k in perm),
        tuple(data.kinds[k] for k in perm),
    ), perm


class TestPc:
    def test_independent_columns_empty_graph(self):
        rng = np.random.default_rng(0)
        ds = Dataset(rng.normal(size=(5000, 4)),
                     ("a", "b", "c", "d"), (CONTINUOUS,) * 4)
        g, _ = pc(ds, CFG)
        assert g.edge_count() == 0

    def test_collider_recovered_exactly(self):
        hits = 0
        for seed in range(20):
            spec = ScmSpec(
                nodes=(ScmNode("x"), ScmNode("y"), ScmNode("z")),
                edges=(ScmEdge("x", "z", 1.0), ScmEdge("y", "z", 1.0)),
                seed=seed,
            )
            ds = sample(spec, 10000)
            g, _ = pc(ds, CFG)
            hits += g == cpdag_of(spec.observed_dag())
        assert hits >= 18

    def test_chain_gives_undirected_skeleton(self):
        hits = 0
        for seed in range(20):
            spec = ScmSpec(
                nodes=(ScmNode("x"), ScmNode("z"), ScmNode("y")),
                edges=(ScmEdge("x", "z", 1.0), ScmEdge("z", "y", 1.0)),
                seed=seed,
            )
            ds = sample(spec, 10000)
            g, _ = pc(ds, CFG)
            want = cpdag_of(spec.observed_dag())  # fully undirected chain
            hits += g == want
        assert hits >= 18

    def test_sepsets_only_for_removed_pairs(self):
        rng = np.random.default_rng(1)
        spec, _ = random_weighted_spec(5, rng, seed=31)
        ds = sample(spec, 4000)
        g, sepsets = pc(ds, CFG)
        for pair in sepsets:
            a, b = sorted(pair)
            assert not g.is_adjacent(a, b)

    def test_skeleton_invariant_to_column_order(self):
        rng = np.random.default_rng(2)
        for seed in range(10):
            spec, _ = random_weighted_spec(5, rng, seed=100 + seed)
            ds = sample(spec, 3000)
            skel, _, _ = stable_skeleton(ds.standardized(), CFG)
            mixed, perm = shuffled(ds, rng)
            skel2, _, _ = stable_skeleton(mixed.standardized(), CFG)
            back = relabel_to(skel2, ds.names)
            assert skeleton_pairs(back) == skeleton_pairs(skel)

    def test_output_is_cpdag_view(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            spec, _ = random_weighted_spec(6, rng, seed=200 + seed)
            ds = sample(spec, 2500)
            g, _ = pc(ds, CFG)
            assert g.is_cpdag_view()

    def test_small_dataset_rejected(self):
        ds = Dataset(np.random.default_rng(4).normal(size=(6, 4)),
                     ("a", "b", "c", "d"), (CONTINUOUS,) * 4)
        with pytest.raises(DataError):
            pc(ds, CFG)

    def test_max_cond_set_limits_levels(self):
        rng = np.random.default_rng(5)
        spec, _ = random_weighted_spec(5, rng, seed=55)
        ds = sample(spec, 2000)
        g, sepsets = pc(ds, DiscoveryConfig(max_cond_set=0))
        assert all(len(s) == 0 for s in sepsets.values())
