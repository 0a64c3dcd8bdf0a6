"""Command-line interface.

Subcommands: simulate, discover, evaluate, sfm, fairness, cfur, pipeline.
Exit codes: 0 success, 1 usage error, 2 data or convergence error.
"""

import argparse
import json
import sys
import warnings

from . import discovery
from .cfur import cfur as run_cfur
from .decompose import DecompConfig, contributions, decompose
from .discovery import DiscoveryConfig, NotearsConfig
from .errors import FairpathError
from .io import load_csv, load_graph, save_csv, save_graph
from .metrics import ADJACENCY, ORIENTATION, compare
from .pipeline import PipelineConfig, render_tables, report_json, run_pipeline
from .scm import ScmSpec, ad_default_spec, sample
from .sfm import derive_sfm_named


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="random seed (overrides config/spec seeds)")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable JSON on stdout")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress warnings and progress output")


def _parse_kinds(spec):
    # e.g. "age=continuous,sex=binary"
    if not spec:
        return {}
    out = {}
    for part in spec.split(","):
        name, _, kind = part.partition("=")
        if not kind:
            raise FairpathError(f"bad --kinds entry {part!r}; use name=kind")
        out[name.strip()] = kind.strip()
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="fairpath", description=__doc__)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("simulate", parents=[], help="sample a dataset from an SCM spec")
    p.add_argument("--spec", help="SCM spec JSON (default: the shipped AD spec)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("discover", help="run one discovery algorithm")
    p.add_argument("--algo", required=True, choices=discovery.ALGORITHMS)
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--max-cond-set", type=int, default=None)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--lambda", dest="lambda_l1", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--kinds", default="", help="type overrides, name=kind pairs")
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("evaluate", help="score a learned graph against a truth DAG")
    p.add_argument("--truth", required=True)
    p.add_argument("--learned", required=True)
    p.add_argument("--mode", choices=(ADJACENCY, ORIENTATION), default=ADJACENCY)
    _add_common(p)

    p = sub.add_parser("sfm", help="derive the Standard Fairness Model roles")
    p.add_argument("--graph", required=True)
    p.add_argument("--protected", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--mode", choices=("strict", "possible"), default=None)
    _add_common(p)

    p = sub.add_parser("fairness", help="counterfactual decomposition of TV")
    _add_fairness_args(p)
    p.add_argument("--contributions", choices=("IE", "SE"), default=None,
                   help="print one effect's per-variable contributions only")
    _add_common(p)

    p = sub.add_parser("cfur", help="fairness-utility ratio per blocked path")
    _add_fairness_args(p)
    _add_common(p)

    p = sub.add_parser("pipeline", help="full discover/evaluate/decompose run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--tables", action="store_true",
                   help="print the paper-style tables")
    _add_common(p)
    return parser


def _add_fairness_args(p):
    p.add_argument("--data", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--protected", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--x1", type=float, default=1.0)
    p.add_argument("--mode", choices=("strict", "possible"), default=None)
    p.add_argument("--bootstrap", type=int, default=200)
    p.add_argument("--mc-draws", type=int, default=100)
    p.add_argument("--kinds", default="")


def _discovery_config(args) -> DiscoveryConfig:
    return DiscoveryConfig(
        alpha=args.alpha,
        max_cond_set=args.max_cond_set,
        standardize=not args.no_standardize,
        notears=NotearsConfig(lambda_l1=args.lambda_l1, threshold=args.threshold),
    )


def _decomp_config(args) -> DecompConfig:
    return DecompConfig(
        x0=args.x0,
        x1=args.x1,
        mc_draws=args.mc_draws,
        bootstrap_b=args.bootstrap,
        seed=args.seed if args.seed is not None else 0,
    )


def _load_for_fairness(args):
    data = load_csv(args.data, _parse_kinds(args.kinds))
    graph = load_graph(args.graph)
    from .graphs import relabel_to

    graph = relabel_to(graph, data.names)
    sfm = derive_sfm_named(graph, args.protected, args.outcome, args.mode)
    return data, sfm


def _emit(args, payload: dict, text: str = None):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif text is not None:
        print(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    if args.quiet:
        warnings.simplefilter("ignore")
    try:
        return _dispatch(args)
    except FairpathError as exc:
        print(f"fairpath: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "simulate":
        if args.spec:
            with open(args.spec, "r", encoding="utf-8") as fh:
                spec = ScmSpec.from_json(fh.read())
        else:
            spec = ad_default_spec()
        if args.seed is not None:
            spec = ScmSpec(nodes=spec.nodes, edges=spec.edges,
                           latents=spec.latents, seed=args.seed)
        data = sample(spec, args.n)
        save_csv(data, args.out)
        if not args.quiet:
            print(f"wrote {data.n} rows x {data.d} columns to {args.out}")
        return 0

    if args.command == "discover":
        data = load_csv(args.data, _parse_kinds(args.kinds))
        graph = discovery.run(args.algo, data, _discovery_config(args))
        save_graph(graph, args.out)
        if not args.quiet:
            print(f"{args.algo}: {graph.edge_count()} edges -> {args.out}")
        return 0

    if args.command == "evaluate":
        from .graphs import Dag

        learned = load_graph(args.learned)
        truth_graph = load_graph(args.truth)
        truth = Dag(truth_graph.node_names, truth_graph.edges())
        score = compare(truth, learned, mode=args.mode)
        _emit(args, score.as_dict(),
              text="\n".join(f"{k}: {v}" for k, v in score.as_dict().items()))
        return 0

    if args.command == "sfm":
        graph = load_graph(args.graph)
        sfm = derive_sfm_named(graph, args.protected, args.outcome, args.mode)
        doc = sfm.as_dict()
        _emit(args, doc, text="\n".join(f"{k}: {v}" for k, v in doc.items()))
        return 0

    if args.command == "fairness":
        data, sfm = _load_for_fairness(args)
        cfg = _decomp_config(args)
        if args.contributions:
            contribs = contributions(data, sfm, cfg, args.contributions)
            doc = [
                {"effect": c.effect, "variable": c.variable, "value": c.value}
                for c in contribs
            ]
            _emit(args, {"contributions": doc}, text="\n".join(
                f"{c['effect']} {c['variable']}: {c['value']:+.4f}" for c in doc
            ))
            return 0
        result = decompose(data, sfm, cfg)
        doc = result.as_dict()
        doc["sfm"] = sfm.as_dict()
        lines = [f"units: {result.units}"]
        for name in ("tv", "ctf_de", "ctf_ie", "ctf_se"):
            comp = getattr(result, name)
            lines.append(
                f"{name}: {comp.estimate:+.4f} "
                f"(boot {comp.boot_mean:+.4f} +/- {comp.boot_sd:.4f}, "
                f"ci95 [{comp.ci_low:+.4f}, {comp.ci_high:+.4f}])"
            )
        _emit(args, doc, text="\n".join(lines))
        return 0

    if args.command == "cfur":
        data, sfm = _load_for_fairness(args)
        result = run_cfur(data, sfm, _decomp_config(args))
        doc = result.as_dict()
        lines = []
        for path in ("DE", "IE", "SE"):
            t = result.path(path)
            flag = " unstable" if t.unstable else ""
            lines.append(
                f"{path}: ratio {t.ratio:+.3f}{flag} "
                f"(gain {t.fairness_gain:+.4f}, cost {t.utility_cost:+.6f}, "
                f"boot {t.ratio_boot_mean:+.3f} +/- {t.ratio_boot_sd:.3f})"
            )
        _emit(args, doc, text="\n".join(lines))
        return 0

    if args.command == "pipeline":
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if args.seed is not None:
            doc["seed"] = args.seed
        config = PipelineConfig.from_dict(doc)
        progress = None if args.quiet else (lambda m: print(m, file=sys.stderr))
        report = run_pipeline(config, progress=progress)
        blob = report_json(report)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(blob)
        if args.json:
            sys.stdout.write(blob)
        if args.tables or not (args.json or args.out):
            sys.stdout.write(render_tables(report))
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
