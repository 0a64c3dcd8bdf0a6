"""Linear-Gaussian SCM simulation, including latent confounders.

Specs are plain data (JSON on disk); generation is deterministic given the
spec seed. Every observed column and every latent draws from its own named
random stream (see :mod:`fairpath.rng`), so editing one node of a spec never
perturbs the draws of the others.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DataError, GraphError
from .graphs import ARROW, TAIL, Dag
from .rng import substream
from .stats import BINARY, CONTINUOUS, Dataset


@dataclass(frozen=True)
class ScmNode:
    name: str
    kind: str = CONTINUOUS
    noise_std: float = 1.0
    intercept: float = 0.0


@dataclass(frozen=True)
class ScmEdge:
    parent: str
    child: str
    weight: float


@dataclass(frozen=True)
class ScmLatent:
    name: str
    loadings: tuple  # of (child, weight)


@dataclass(frozen=True)
class ScmSpec:
    nodes: tuple
    edges: tuple
    latents: tuple = ()
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> "ScmSpec":
        nodes = tuple(
            ScmNode(
                name=nd["name"],
                kind=nd.get("kind", CONTINUOUS),
                noise_std=float(nd.get("noise_std", 1.0)),
                intercept=float(nd.get("intercept", 0.0)),
            )
            for nd in doc["nodes"]
        )
        edges = tuple(
            ScmEdge(e["parent"], e["child"], float(e["weight"]))
            for e in doc.get("edges", ())
        )
        latents = tuple(
            ScmLatent(
                name=la["name"],
                loadings=tuple(
                    (lo["child"], float(lo["weight"])) for lo in la["loadings"]
                ),
            )
            for la in doc.get("latents", ())
        )
        return cls(nodes=nodes, edges=edges, latents=latents,
                   seed=int(doc.get("seed", 0)))

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "name": nd.name,
                    "kind": nd.kind,
                    "noise_std": nd.noise_std,
                    "intercept": nd.intercept,
                }
                for nd in self.nodes
            ],
            "edges": [
                {"parent": e.parent, "child": e.child, "weight": e.weight}
                for e in self.edges
            ],
            "latents": [
                {
                    "name": la.name,
                    "loadings": [
                        {"child": c, "weight": w} for c, w in la.loadings
                    ],
                }
                for la in self.latents
            ],
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, text: str) -> "ScmSpec":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def node_names(self):
        return [nd.name for nd in self.nodes]

    def observed_dag(self) -> Dag:
        """DAG over the observed nodes (edges only; latents excluded)."""
        names = self.node_names()
        idx = {nm: i for i, nm in enumerate(names)}
        dag = Dag(names)
        for e in self.edges:
            dag.add_edge(idx[e.parent], idx[e.child], TAIL, ARROW)
        dag.validate()
        return dag


def validate(spec: ScmSpec):
    """All invariant violations of ``spec``, as human-readable strings."""
    violations = []
    names = [nd.name for nd in spec.nodes]
    seen = set()
    for nm in names:
        if nm in seen:
            violations.append(f"duplicate node name {nm!r}")
        seen.add(nm)
    name_set = set(names)
    latent_names = {la.name for la in spec.latents}
    if latent_names & name_set:
        violations.append("latent names collide with observed node names")
    for nd in spec.nodes:
        if nd.kind not in (CONTINUOUS, BINARY):
            violations.append(f"node {nd.name!r}: unknown kind {nd.kind!r}")
        if nd.noise_std < 0:
            violations.append(f"node {nd.name!r}: negative noise_std")
    for e in spec.edges:
        for end in (e.parent, e.child):
            if end not in name_set:
                violations.append(f"edge {e.parent}->{e.child}: unknown node {end!r}")
    # acyclicity of the observed-edge graph
    known_edges = [
        e for e in spec.edges if e.parent in name_set and e.child in name_set
    ]
    try:
        idx = {nm: i for i, nm in enumerate(names)}
        dag = Dag(names)
        added = set()
        for e in known_edges:
            key = (idx[e.parent], idx[e.child])
            if key in added or (key[1], key[0]) in added:
                violations.append(
                    f"multiple edges between {e.parent!r} and {e.child!r}"
                )
                continue
            added.add(key)
            dag.add_edge(key[0], key[1], TAIL, ARROW)
        dag.validate()
    except GraphError:
        violations.append("observed-edge graph contains a directed cycle")
    for la in spec.latents:
        children = [c for c, _ in la.loadings]
        for c in children:
            if c not in name_set:
                violations.append(f"latent {la.name!r}: unknown child {c!r}")
        if len(set(children)) < 2:
            violations.append(
                f"latent {la.name!r} must load on at least two children"
            )
    return violations


def sample(spec: ScmSpec, n: int) -> Dataset:
    """Draw ``n`` rows from the SCM; latents are used and then discarded.

    Continuous node: intercept + sum(weight * parent) + latent loadings +
    Gaussian(0, noise_std). Binary node: Bernoulli(sigmoid(same linear
    predictor)). Deterministic: (spec, n) fixes every draw.
    """
    problems = validate(spec)
    if problems:
        raise DataError("invalid SCM spec: " + "; ".join(problems))
    if n < 1:
        raise DataError("n must be >= 1")

    names = spec.node_names()
    idx = {nm: j for j, nm in enumerate(names)}
    order = _topological(spec)

    latent_values = {}
    for la in spec.latents:
        latent_values[la.name] = substream(spec.seed, "latent", la.name).standard_normal(n)
    latent_into = {nm: [] for nm in names}
    for la in spec.latents:
        for child, w in la.loadings:
            latent_into[child].append((la.name, w))

    parents_of = {nm: [] for nm in names}
    for e in spec.edges:
        parents_of[e.child].append((e.parent, e.weight))

    values = np.empty((n, len(names)), dtype=np.float64)
    for nm in order:
        node = spec.nodes[idx[nm]]
        lin = np.full(n, node.intercept)
        for parent, w in parents_of[nm]:
            lin += w * values[:, idx[parent]]
        for la_name, w in latent_into[nm]:
            lin += w * latent_values[la_name]
        stream = substream(spec.seed, "node", nm)
        if node.kind == BINARY:
            prob = 1.0 / (1.0 + np.exp(-lin))
            values[:, idx[nm]] = (stream.uniform(size=n) < prob).astype(np.float64)
        else:
            values[:, idx[nm]] = lin + stream.normal(0.0, node.noise_std, size=n)
    kinds = tuple(nd.kind for nd in spec.nodes)
    return Dataset(values, tuple(names), kinds)


def _topological(spec: ScmSpec):
    names = spec.node_names()
    indeg = {nm: 0 for nm in names}
    children = {nm: [] for nm in names}
    for e in spec.edges:
        indeg[e.child] += 1
        children[e.parent].append(e.child)
    ready = sorted(nm for nm in names if indeg[nm] == 0)
    order = []
    while ready:
        nm = ready.pop(0)
        order.append(nm)
        for c in sorted(children[nm]):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
        ready.sort()
    return order


def implied_covariance(spec: ScmSpec) -> np.ndarray:
    """Population covariance of the observed columns implied by the SCM.

    Continuous-only closed form: with weight matrix W (W[i, j] = weight of
    i -> j) and E the noise-plus-latent covariance, the covariance is
    (I - W)^-T E (I - W)^-1. Raises for specs with binary nodes, where no
    linear closed form exists.
    """
    names = spec.node_names()
    if any(nd.kind != CONTINUOUS for nd in spec.nodes):
        raise DataError("closed-form covariance needs all-continuous nodes")
    d = len(names)
    idx = {nm: i for i, nm in enumerate(names)}
    W = np.zeros((d, d))
    for e in spec.edges:
        W[idx[e.parent], idx[e.child]] = e.weight
    E = np.zeros((d, d))
    for j, nd in enumerate(spec.nodes):
        E[j, j] = nd.noise_std**2
    for la in spec.latents:
        load = np.zeros(d)
        for child, w in la.loadings:
            load[idx[child]] += w
        E += np.outer(load, load)
    inv = np.linalg.inv(np.eye(d) - W)
    return inv.T @ E @ inv


def ad_default_spec() -> ScmSpec:
    """The shipped Alzheimer's-style 9-variable spec (see data/ad_spec.json)."""
    text = resources.files("fairpath.data").joinpath("ad_spec.json").read_text()
    return ScmSpec.from_json(text)
