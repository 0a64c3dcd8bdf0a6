from itertools import combinations

import numpy as np
import pytest

from conftest import random_dag, random_weighted_spec
from fairpath.discovery import DiscoveryConfig
from fairpath.errors import DataError
from fairpath.graphs import ARROW, CIRCLE, TAIL, Dag, MixedGraph, cpdag_of
from fairpath.metrics import (
    ADJACENCY,
    ORIENTATION,
    bootstrap_compare,
    compare,
)
from fairpath.scm import ScmEdge, ScmNode, ScmSpec, sample
from fairpath.stats import CONTINUOUS, Dataset


def pair_counting_oracle(truth, learned):
    """Blunt loop over all C(d,2) pairs; independent of compare()."""
    d = truth.n
    tp = fp = fn = tn = 0
    for a, b in combinations(range(d), 2):
        t = truth.is_adjacent(a, b)
        l = learned.is_adjacent(a, b)

        if t and l:
            tp += 1
        elif l:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def random_mixed(d, rng):
    g = MixedGraph([f"v{i}" for i in range(d)])
    menu = [(TAIL, ARROW), (TAIL, TAIL), (CIRCLE, CIRCLE), (CIRCLE, ARROW),
            (ARROW, ARROW)]
    for a, b in combinations(range(d), 2):
        if rng.random() < 0.35:
            ma, mb = menu[rng.integers(len(menu))]
            g.add_edge(a, b, ma, mb)
    return g


class TestCompareAdjacency:
    def test_self_comparison_perfect(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            dag = random_dag(int(rng.integers(2, 9)), rng)
            score = compare(dag, cpdag_of(dag))
            assert score.f1 == 1.0 and score.shd == 0
            assert score.fdr == 0.0 and score.tpr == 1.0 and score.fpr == 0.0

    def test_empty_learned(self):
        dag = Dag([f"v{i}" for i in range(10)])
        for i in range(9):
            dag.add_edge(i, i + 1, TAIL, ARROW)
        score = compare(dag, MixedGraph(dag.node_names))
        assert score.tpr == 0.0 and score.fn == 9 and score.shd == 9

    def test_hand_counted_example(self):
        truth = Dag(["A", "B", "C"], [(0, 1, TAIL, ARROW), (1, 2, TAIL, ARROW)])
        learned = Dag(["A", "B", "C"], [(0, 1, TAIL, ARROW), (0, 2, TAIL, ARROW)])
        score = compare(truth, learned)
        assert (score.tp, score.fp, score.fn) == (1, 1, 1)
        assert score.f1 == pytest.approx(0.5)
        assert score.shd == 2

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            d = int(rng.integers(2, 11))
            truth = random_dag(d, rng)
            learned = random_mixed(d, rng)
            score = compare(truth, learned)
            tp, fp, fn, tn = pair_counting_oracle(truth, learned)
            assert (score.tp, score.fp, score.fn, score.tn) == (tp, fp, fn, tn)
            assert score.shd == fp + fn

    def test_variable_order_invariance(self):
        rng = np.random.default_rng(2)
        truth = random_dag(6, rng)
        learned = random_mixed(6, rng)
        perm = rng.permutation(6)
        shuffled = MixedGraph([truth.node_names[k] for k in perm])
        for a, b, ma, mb in learned.edges():
            shuffled.add_edge(
                list(perm).index(a), list(perm).index(b), ma, mb
            )
        a = compare(truth, learned)
        b = compare(truth, shuffled)
        assert a == b

    def test_swap_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g1 = random_dag(7, rng)
            g2 = random_dag(7, rng)
            ab = compare(g1, g2)
            ba = compare(g2, g1)
            assert (ab.fp, ab.fn) == (ba.fn, ba.fp)
            assert ab.shd == ba.shd

    def test_name_mismatch_lists_difference(self):
        truth = Dag(["A", "B"])
        learned = MixedGraph(["A", "C"])
        with pytest.raises(Exception, match="missing"):
            compare(truth, learned)


class TestCompareOrientation:
    def test_exact_dag_match(self):
        rng = np.random.default_rng(4)
        dag = random_dag(6, rng)
        score = compare(dag, dag, mode=ORIENTATION)
        assert score.f1 == 1.0 and score.shd == 0

    def test_reversed_edge_counts_both_ways(self):
        truth = Dag(["A", "B"], [(0, 1, TAIL, ARROW)])
        learned = Dag(["A", "B"], [(1, 0, TAIL, ARROW)])
        score = compare(truth, learned, mode=ORIENTATION)
        assert score.tp == 0 and score.fp == 1 and score.fn == 1
        assert score.shd == 0.5  # adjacency right, orientation wrong

    def test_undirected_learned_edge_is_half_shd(self):
        truth = Dag(["A", "B"], [(0, 1, TAIL, ARROW)])
        learned = MixedGraph(["A", "B"], [(0, 1, TAIL, TAIL)])
        score = compare(truth, learned, mode=ORIENTATION)
        assert score.fn == 1 and score.tp == 0 and score.fp == 0
        assert score.shd == 0.5

    def test_misorientation_cost_configurable(self):
        truth = Dag(["A", "B"], [(0, 1, TAIL, ARROW)])
        learned = Dag(["A", "B"], [(1, 0, TAIL, ARROW)])
        score = compare(truth, learned, mode=ORIENTATION, misorientation_cost=1.0)
        assert score.shd == 1.0

    def test_extra_and_missing_count_fully(self):
        truth = Dag(["A", "B", "C"], [(0, 1, TAIL, ARROW)])
        learned = Dag(["A", "B", "C"], [(1, 2, TAIL, ARROW)])
        score = compare(truth, learned, mode=ORIENTATION)
        assert score.shd == 2.0
        assert score.fp == 1 and score.fn == 1


class TestBootstrapCompare:
    def test_b_must_be_at_least_two(self):
        dag = Dag(["x", "y"], [(0, 1, TAIL, ARROW)])
        ds = Dataset(np.random.default_rng(0).normal(size=(50, 2)),
                     ("x", "y"), (CONTINUOUS,) * 2)
        with pytest.raises(DataError, match="B >= 2"):
            bootstrap_compare(dag, ds, "pc", DiscoveryConfig(), B=1)

    def test_deterministic_relationship_zero_sd(self):
        # y is an exact linear copy of x: every resample recovers the same
        # single-edge skeleton, so all replicates agree and SD = 0
        rng = np.random.default_rng(5)
        x = rng.normal(size=120)
        ds = Dataset(np.column_stack([x, 2.0 * x]), ("x", "y"),
                     (CONTINUOUS,) * 2)
        dag = Dag(["x", "y"], [(0, 1, TAIL, ARROW)])
        summary = bootstrap_compare(dag, ds, "pc", DiscoveryConfig(), B=8,
                                    seed=1)
        assert all(sd == 0.0 for sd in summary.sd.values())
        assert summary.replicates_used == 8

    def test_mean_f1_near_full_sample_oracle(self):
        rng = np.random.default_rng(6)
        spec, dag = random_weighted_spec(5, rng, seed=77)
        ds = sample(spec, 3000)
        cfg = DiscoveryConfig()
        from fairpath.discovery import run

        oracle_f1 = compare(dag, run("pc", ds, cfg)).f1
        summary = bootstrap_compare(dag, ds, "pc", cfg, B=30, seed=2)
        assert oracle_f1 - 0.1 <= summary.mean["f1"] <= 1.0

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(7)
        spec, dag = random_weighted_spec(4, rng, seed=88)
        ds = sample(spec, 800)
        cfg = DiscoveryConfig()
        a = bootstrap_compare(dag, ds, "pc", cfg, B=10, seed=3)
        b = bootstrap_compare(dag, ds, "pc", cfg, B=10, seed=3)
        assert a == b
