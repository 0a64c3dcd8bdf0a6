"""End-to-end pipeline: discover, score, map, decompose, trade off.

One configuration document drives the whole run; the report carries enough
provenance (seed, config hash, version) to reproduce every number.
"""

import hashlib
import json
import time
from dataclasses import dataclass, field

from . import __version__, discovery
from .cfur import cfur
from .decompose import DecompConfig, decompose
from .discovery import DiscoveryConfig, NotearsConfig
from .errors import DataError, FairpathError, GraphError
from .graphs import Dag, MixedGraph, relabel_to
from .io import load_csv, load_graph
from .metrics import ADJACENCY, BootstrapSummary, bootstrap_compare, compare
from .sfm import derive_sfm_named
from .stats import BINARY, Dataset


@dataclass(frozen=True)
class PipelineConfig:
    data: str
    truth_graph: str
    protected: str
    outcome: str
    x0: float = 0.0
    x1: float = 1.0
    algorithms: tuple = ("pc", "ges", "fci")
    seed: int = 0
    kinds: dict = field(default_factory=dict)
    discovery: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    bootstrap_discovery: int = 30
    bootstrap_fairness: int = 200
    mc_draws: int = 100
    sfm_mode: str = None  # None = per-graph default
    compare_mode: str = ADJACENCY

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        disc = dict(doc.pop("discovery", {}))
        notears = NotearsConfig(
            **{
                {"lambda": "lambda_l1"}.get(k, k): v
                for k, v in dict(disc.pop("notears", {})).items()
            }
        )
        dcfg = DiscoveryConfig(notears=notears, **disc)
        boot = dict(doc.pop("bootstrap", {}))
        known = {
            "data", "truth_graph", "protected", "outcome", "x0", "x1",
            "algorithms", "seed", "kinds", "mc_draws", "sfm_mode",
            "compare_mode",
        }
        unknown = set(doc) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            discovery=dcfg,
            bootstrap_discovery=int(boot.get("discovery", 30)),
            bootstrap_fairness=int(boot.get("fairness", 200)),
            algorithms=tuple(doc.pop("algorithms", ("pc", "ges", "fci"))),
            **doc,
        )

    def canonical_dict(self) -> dict:
        return {
            "data": self.data,
            "truth_graph": self.truth_graph,
            "protected": self.protected,
            "outcome": self.outcome,
            "x0": self.x0,
            "x1": self.x1,
            "algorithms": list(self.algorithms),
            "seed": self.seed,
            "kinds": dict(sorted(self.kinds.items())),
            "discovery": {
                "alpha": self.discovery.alpha,
                "max_cond_set": self.discovery.max_cond_set,
                "standardize": self.discovery.standardize,
                "notears": {
                    "lambda": self.discovery.notears.lambda_l1,
                    "threshold": self.discovery.notears.threshold,
                    "max_dual_iters": self.discovery.notears.max_dual_iters,
                    "tol": self.discovery.notears.tol,
                },
            },
            "bootstrap": {
                "discovery": self.bootstrap_discovery,
                "fairness": self.bootstrap_fairness,
            },
            "mc_draws": self.mc_draws,
            "sfm_mode": self.sfm_mode,
            "compare_mode": self.compare_mode,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def load_truth(path, data: Dataset) -> Dag:
    """Load the expert graph, align to the data columns, require a DAG."""
    raw = load_graph(path)
    aligned = relabel_to(raw, data.names)
    if not aligned.is_dag_view():
        raise GraphError(
            "ground-truth graph must be a DAG (directed edges, acyclic); "
            "resolve any undirected or doubly-directed expert edges first"
        )
    dag = Dag(aligned.node_names)
    for a, b, ma, mb in aligned.edges():
        dag.add_edge(a, b, ma, mb)
    dag.validate()
    return dag


def run_pipeline(config: PipelineConfig, progress=None) -> dict:
    """Run every stage for the ground truth and each algorithm.

    A stage failure aborts that graph's row (the error is recorded in the
    report) and the remaining graphs continue.
    """
    notify = progress or (lambda msg: None)
    data, dropped = load_csv(config.data, config.kinds, return_dropped=True)
    truth = load_truth(config.truth_graph, data)
    if data.kinds[data.index(config.protected)] != BINARY:
        raise DataError(f"protected column {config.protected!r} must be binary")

    dcfg = DecompConfig(
        x0=config.x0,
        x1=config.x1,
        mc_draws=config.mc_draws,
        bootstrap_b=config.bootstrap_fairness,
        seed=config.seed,
    )

    rows = []
    graph_list = [("ground_truth", None)] + [(a, a) for a in config.algorithms]
    for label, algo in graph_list:
        notify(f"{label}: running")
        row = {"graph": label, "error": None, "structure": None,
               "sfm": None, "decomposition": None, "cfur": None}
        try:
            if algo is None:
                graph = truth
                row["structure"] = {
                    "point": compare(truth, truth, mode=config.compare_mode).as_dict(),
                    "bootstrap": None,
                }
            else:
                graph = discovery.run(algo, data, config.discovery)
                boot = bootstrap_compare(
                    truth, data, algo, config.discovery,
                    B=config.bootstrap_discovery, seed=config.seed,
                    mode=config.compare_mode,
                )
                row["structure"] = {
                    "point": compare(truth, graph, mode=config.compare_mode).as_dict(),
                    "bootstrap": boot.as_dict(),
                }
            sfm = derive_sfm_named(
                graph, config.protected, config.outcome, config.sfm_mode
            )
            row["sfm"] = sfm.as_dict()
            row["decomposition"] = decompose(data, sfm, dcfg).as_dict()
            row["cfur"] = cfur(data, sfm, dcfg).as_dict()
        except FairpathError as exc:
            row["error"] = str(exc)
        rows.append(row)

    return {
        "dataset": {
            "n": data.n,
            "d": data.d,
            "dropped_rows": dropped,
            "variables": [
                {"name": nm, "kind": kd} for nm, kd in zip(data.names, data.kinds)
            ],
        },
        "protected": config.protected,
        "outcome": config.outcome,
        "x0": config.x0,
        "x1": config.x1,
        "rows": rows,
        "provenance": {
            "seed": config.seed,
            "config_hash": config.config_hash(),
            "version": __version__,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        },
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# -- plain-text tables --------------------------------------------------------


def _fmt_table(headers, rows) -> str:
    widths = [
        max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
        for i, h in enumerate(headers)
    ]
    def fmt(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def render_tables(report: dict) -> str:
    """Human-readable tables mirroring the paper's result layout."""
    sections = []

    util_rows = []
    for row in report["rows"]:
        if row["error"]:
            util_rows.append([row["graph"], "error: " + row["error"], "", "", "", ""])
            continue
        p = row["structure"]["point"]
        util_rows.append([
            row["graph"],
            f"{p['f1']:.2f}",
            f"{p['shd']:g}",
            f"{p['fdr']:.2f}",
            f"{p['tpr']:.2f}",
            f"{p['fpr']:.2f}",
        ])
    modes = [
        r["structure"]["point"]["mode"]
        for r in report["rows"]
        if r.get("structure")
    ]
    mode_label = modes[0] if modes else "adjacency"
    sections.append(
        f"== Causal discovery utility ({mode_label} mode) ==\n"
        + _fmt_table(["graph", "F1", "SHD", "FDR", "TPR", "FPR"], util_rows)
    )

    units = None
    decomp_rows = []
    for row in report["rows"]:
        if row["error"] or not row["decomposition"]:
            continue
        dec = row["decomposition"]
        units = dec["units"]
        decomp_rows.append([
            row["graph"],
            f"{dec['tv']['estimate']:+.2f}",
            f"{dec['ctf_de']['estimate']:+.2f}",
            f"{dec['ctf_ie']['estimate']:+.2f}",
            f"{dec['ctf_se']['estimate']:+.2f}",
        ])
    if decomp_rows:
        sections.append(
            f"== Total variation and decomposition ({units}) ==\n"
            + _fmt_table(["graph", "TV", "Ctf-DE", "Ctf-IE", "Ctf-SE"], decomp_rows)
        )

    contrib_rows = []
    for row in report["rows"]:
        if row["graph"] != "ground_truth" or row["error"]:
            continue
        for c in row["decomposition"]["contributions"]:
            contrib_rows.append([c["effect"], c["variable"], f"{c['value']:+.2f}"])
    if contrib_rows:
        sections.append(
            f"== Contributions by variable (ground truth graph, {units}) ==\n"
            + _fmt_table(["effect", "variable", "contribution"], contrib_rows)
        )

    cfur_rows = []
    for row in report["rows"]:
        if row["error"] or not row["cfur"]:
            continue
        cells = [row["graph"]]
        for path in ("DE", "IE", "SE"):
            t = row["cfur"][path]
            flag = " (unstable)" if t["unstable"] else ""
            cells.append(
                f"{t['ratio_boot_mean']:+.2f} +/- {t['ratio_boot_sd']:.2f}{flag}"
            )
        cfur_rows.append(cells)
    if cfur_rows:
        sections.append(
            "== CFUR by path (bootstrap mean +/- SD) ==\n"
            + _fmt_table(["graph", "DE", "IE", "SE"], cfur_rows)
        )

    return "\n\n".join(sections) + "\n"
