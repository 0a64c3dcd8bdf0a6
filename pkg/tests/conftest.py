import os
from pathlib import Path

import numpy as np
import pytest

from fairpath.graphs import ARROW, TAIL, Dag
from fairpath.scm import ScmEdge, ScmNode, ScmSpec, sample

# -- shared generators --------------------------------------------------------


def random_dag(d, rng, edge_prob=0.4):
    """Random DAG over d nodes: lower-triangular coin flips on a permutation."""
    order = rng.permutation(d)
    dag = Dag([f"v{i}" for i in range(d)])
    for i in range(d):
        for j in range(i + 1, d):
            if rng.random() < edge_prob:
                dag.add_edge(int(order[i]), int(order[j]), TAIL, ARROW)
    return dag


def random_weighted_spec(d, rng, edge_prob=0.5, low=0.8, high=1.5, seed=0):
    """Linear-Gaussian spec over a random DAG with strong weights."""
    dag = random_dag(d, rng, edge_prob)
    nodes = tuple(ScmNode(nm) for nm in dag.node_names)
    edges = []
    for p, c in dag.directed_edges():
        w = rng.uniform(low, high) * (1 if rng.random() < 0.5 else -1)
        edges.append(ScmEdge(dag.node_names[p], dag.node_names[c], float(w)))
    return ScmSpec(nodes=nodes, edges=tuple(edges), seed=seed), dag


def spec_dataset(spec, n):
    return sample(spec, n)


# -- HFCR fixture -------------------------------------------------------------

HFCR_ENV = "FAIRPATH_HFCR_CSV"
HFCR_DEFAULT = Path(__file__).parent / "data" / "heart_failure_clinical_records_dataset.csv"
HFCR_SKIP_REASON = (
    "real heart-failure CSV not available (this sandbox has no network "
    f"egress); place the public file at {HFCR_DEFAULT} or point "
    f"${HFCR_ENV} at it to run this check"
)


def hfcr_csv_path():
    env = os.environ.get(HFCR_ENV)
    if env and Path(env).exists():
        return Path(env)
    if HFCR_DEFAULT.exists():
        return HFCR_DEFAULT
    return None


@pytest.fixture
def hfcr_csv():
    path = hfcr_csv_path()
    if path is None:
        pytest.skip(HFCR_SKIP_REASON)
    return path


# -- acceptance reporting -----------------------------------------------------

ACCEPTANCE_LOG = []


def record_criterion(number, description, outcome):
    ACCEPTANCE_LOG.append((number, description, outcome))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, description, outcome in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(f"[{outcome:4s}] criterion {number:2d}: {description}")
