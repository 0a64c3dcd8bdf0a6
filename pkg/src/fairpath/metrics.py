"""Structural recovery metrics against a ground-truth DAG, with bootstrap."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, FairpathError
from .graphs import Dag, MixedGraph, relabel_to, skeleton_pairs
from .rng import substream
from .stats import Dataset

ADJACENCY = "adjacency"
ORIENTATION = "orientation"


@dataclass(frozen=True)
class StructScore:
    f1: float
    shd: float
    fdr: float
    tpr: float
    fpr: float
    tp: int
    fp: int
    fn: int
    tn: int
    mode: str

    def as_dict(self) -> dict:
        return {
            "f1": self.f1,
            "shd": self.shd,
            "fdr": self.fdr,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "mode": self.mode,
        }


def _ratio(num, den) -> float:
    return float(num) / float(den) if den else 0.0


def compare(truth: Dag, learned: MixedGraph, mode: str = ADJACENCY,
            misorientation_cost: float = 0.5) -> StructScore:
    """Score ``learned`` against the ground truth.

    Adjacency mode treats any learned edge as a predicted adjacency and is
    well-defined for CPDAG and PAG outputs; SHD = fp + fn over unordered
    pairs. Orientation mode scores directed edges: a reversed edge counts
    as both fp and fn, an adjacency-correct but undirected (or reversed)
    edge adds ``misorientation_cost`` to SHD instead of a full miss+extra.
    """
    learned = relabel_to(learned, truth.node_names)
    d = truth.n
    pairs = d * (d - 1) // 2
    truth_adj = skeleton_pairs(truth)
    learned_adj = skeleton_pairs(learned)

    if mode == ADJACENCY:
        tp = len(truth_adj & learned_adj)
        fp = len(learned_adj - truth_adj)
        fn = len(truth_adj - learned_adj)
        tn = pairs - tp - fp - fn
        shd = float(fp + fn)
    elif mode == ORIENTATION:
        tp = fp = fn = 0
        misoriented = 0
        truth_dir = set(truth.directed_edges())
        learned_dir = set(learned.directed_edges())
        for a, b in truth_adj | learned_adj:
            in_truth = (a, b) in truth_adj
            in_learned = (a, b) in learned_adj
            if in_truth and in_learned:
                t_edge = (a, b) if (a, b) in truth_dir else (b, a)
                if t_edge in learned_dir:
                    tp += 1
                elif (t_edge[1], t_edge[0]) in learned_dir:
                    fp += 1  # reversed: wrong claim plus missed truth
                    fn += 1
                    misoriented += 1
                else:
                    fn += 1  # undirected or circle marks in learned
                    misoriented += 1
            elif in_truth:
                fn += 1
            else:
                if (a, b) in learned_dir or (b, a) in learned_dir:
                    fp += 1
        missing = len(truth_adj - learned_adj)
        extra = len(learned_adj - truth_adj)
        shd = missing + extra + misorientation_cost * misoriented
        tn = pairs - len(truth_adj | learned_adj)
    else:
        raise DataError(f"unknown mode {mode!r}")

    # empty denominators: fdr/fpr default to 0, but f1/tpr must read as
    # perfect when there was nothing to find and nothing was claimed
    # (compare(g, g) is a perfect score for every g, including edgeless ones)
    f1 = 1.0 if (2 * tp + fp + fn) == 0 else _ratio(2 * tp, 2 * tp + fp + fn)
    tpr = 1.0 if (tp + fn) == 0 else _ratio(tp, tp + fn)
    return StructScore(
        f1=f1,
        shd=shd,
        fdr=_ratio(fp, tp + fp),
        tpr=tpr,
        fpr=_ratio(fp, fp + tn),
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        mode=mode,
    )


@dataclass(frozen=True)
class BootstrapSummary:
    mean: dict
    sd: dict
    replicates_used: int
    replicates_failed: int

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "sd": self.sd,
            "replicates_used": self.replicates_used,
            "replicates_failed": self.replicates_failed,
        }


_METRIC_FIELDS = ("f1", "shd", "fdr", "tpr", "fpr")


def bootstrap_compare(truth: Dag, data: Dataset, algo: str, cfg,
                      B: int = 30, seed: int = 0,
                      mode: str = ADJACENCY) -> BootstrapSummary:
    """Mean/SD of each structural metric over B row resamples.

    Discovery is rerun per replicate; a replicate whose discovery fails is
    skipped and counted, and more than 20% skips is an error. Deterministic
    given ``seed``.
    """
    from . import discovery

    if B < 2:
        raise DataError("bootstrap needs B >= 2")
    rows = data.n
    samples = {m: [] for m in _METRIC_FIELDS}
    failed = 0
    for b in range(B):
        rng = substream(seed, "struct-bootstrap", b)
        idx = rng.integers(0, rows, size=rows)
        resampled = Dataset(data.values[idx], data.names, data.kinds)
        try:
            learned = discovery.run(algo, resampled, cfg)
            score = compare(truth, learned, mode=mode)
        except FairpathError:
            failed += 1
            continue
        for m in _METRIC_FIELDS:
            samples[m].append(getattr(score, m))
    if failed > 0.2 * B:
        raise DataError(
            f"{failed}/{B} bootstrap replicates failed for {algo}"
        )
    mean = {m: float(np.mean(samples[m])) for m in _METRIC_FIELDS}
    sd = {m: float(np.std(samples[m], ddof=1)) for m in _METRIC_FIELDS}
    return BootstrapSummary(mean=mean, sd=sd,
                            replicates_used=B - failed, replicates_failed=failed)
