"""Command line interface: ``panther <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
TSV goes to stdout, the resolved configuration and logs to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from .estimators import Panther, PantherPlusPlus
from .evaluation import (
    common_neighbor_score,
    identity_resolution,
    jaccard_search,
    panther_search,
    random_search,
    read_mapping,
    synth_graph,
    write_mapping,
)
from .graph import GraphFormatError, WeightedGraph, load_edge_list, write_edge_list
from .oracle import OracleTooLargeError, exact_path_table
from .sampling import PathIndex, PathIndexFormatError, default_budget
from .vectors import VectorFileError, VectorIndex

log = logging.getLogger("panther")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_graph(path, weighted=False) -> WeightedGraph:
    """Load an edge list, or a binary snapshot if the file starts with its magic."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        fh.seek(0)
        if head == b"PTHG":
            return WeightedGraph.from_bytes(fh.read())
        return load_edge_list(fh, weighted=weighted)


def _add_graph(p, required=True):
    p.add_argument("--graph", required=required, help="edge list or graph snapshot")
    p.add_argument("--weighted", action="store_true", help="edge list has a weight column")


def _add_budget(p):
    g = p.add_argument_group("sampling budget")
    g.add_argument("--epsilon", type=float, default=None,
                   help="error bound (default: sqrt(1/|E|))")
    g.add_argument("--delta", type=float, default=0.1)
    g.add_argument("--T", type=int, default=5, dest="T", help="path length")
    g.add_argument("--c", type=float, default=0.5)
    g.add_argument("--n-paths", type=int, default=None,
                   help="explicit number of paths, overriding the bound")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=None)


def _echo_config(args, **extra):
    items = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    items.update(extra)
    log.info("config: %s", " ".join(f"{k}={v}" for k, v in items.items()))


def _model(cls, args, graph, paths_file=None, **params):
    params = dict(T=args.T, epsilon=args.epsilon, delta=args.delta, c=args.c,
                  n_paths=args.n_paths, random_state=args.seed, n_jobs=args.threads,
                  **params)
    if paths_file and os.path.exists(paths_file):
        paths = PathIndex.load(paths_file)
        log.info("loaded %r from %s", paths, paths_file)
        model = cls(**params)._set_paths(graph, paths)
        return model
    model = cls(**params).fit(graph)
    budget = model.budget_
    if budget is not None:
        log.info("resolved budget: epsilon=%.6g delta=%g c=%g T=%d R=%d",
                 budget.epsilon, budget.delta, budget.c, budget.T, model.n_paths_)
    if paths_file:
        model.paths_.save(paths_file)
        log.info("wrote %r to %s", model.paths_, paths_file)
    return model


def _label_id(graph, label):
    try:
        return graph.vertex_id(label)
    except KeyError:
        raise GraphFormatError(f"query label {label!r} not in graph") from None


# -- subcommands ---------------------------------------------------------------

def cmd_sample(args):
    graph = read_graph(args.graph, args.weighted)
    _echo_config(args, vertices=graph.vertex_count, edges=graph.edge_count)
    if os.path.exists(args.paths_file):
        os.remove(args.paths_file)
    model = _model(Panther, args, graph, args.paths_file)
    idx = model.paths_
    sys.stdout.write(f"R\t{idx.sample_size}\nT\t{idx.path_length}\nseed\t{idx.seed}\n"
                     f"vertices\t{idx.vertex_count}\n")


def cmd_topk(args):
    graph = read_graph(args.graph, args.weighted)
    _echo_config(args, vertices=graph.vertex_count, edges=graph.edge_count)
    q = _label_id(graph, args.query)
    model = _model(Panther, args, graph, args.paths_file)
    result = model.top_k(q, args.k)
    sys.stdout.write(result.to_tsv(args.query, graph.labels))


def _pp_model(args, graph, paths_file, vectors_file):
    model = _model(PantherPlusPlus, args, graph, paths_file, D=args.D)
    if vectors_file:
        if os.path.exists(vectors_file):
            index = VectorIndex.load(vectors_file)
            if index.dimension != args.D or index.labels != graph.labels:
                raise VectorFileError(f"{vectors_file} does not match graph or --D")
            model.set_vectors(index)
        else:
            model.index_.save(vectors_file)
    return model


def cmd_topk_pp(args):
    graph = read_graph(args.graph, args.weighted)
    _echo_config(args, vertices=graph.vertex_count, edges=graph.edge_count)
    q = _label_id(graph, args.query)
    model = _pp_model(args, graph, args.paths_file, args.vectors_file)
    if args.graph_b:
        graph_b = read_graph(args.graph_b, args.weighted)
        other = _pp_model(args, graph_b, None, args.vectors_file_b)
        result = model.cross_top_k(other, q, args.k)
        labels = graph_b.labels
    else:
        result = model.top_k(q, args.k)
        labels = graph.labels
    sys.stdout.write(result.to_tsv(args.query, labels))


def cmd_oracle(args):
    graph = read_graph(args.graph, args.weighted)
    _echo_config(args)
    table = exact_path_table(graph, args.T)
    log.info("enumerated %d paths, total mass %.12f", table.path_count, table.total_mass)
    out = []
    n = graph.vertex_count
    for u in range(n):
        for v in range(u + 1, n):
            out.append(f"{graph.labels[u]}\t{graph.labels[v]}\t{table.matrix[u, v]:.12f}\n")
    sys.stdout.write("".join(out))


def cmd_eval_cn(args):
    graph = read_graph(args.graph, args.weighted)
    _echo_config(args, vertices=graph.vertex_count, edges=graph.edge_count)
    sys.stdout.write("algorithm\tk\tf_alg\tf_random\tscore\trandom_stderr\n")
    for name in args.algorithm:
        if name == "panther":
            search = panther_search(_model(Panther, args, graph))
        elif name == "pantherpp":
            search = panther_search(_model(PantherPlusPlus, args, graph, D=args.D))
        elif name == "jaccard":
            search = jaccard_search(graph)
        else:
            search = random_search(graph.vertex_count, seed=args.seed + 1)
        s = common_neighbor_score(graph, search, k=args.k, trials=args.trials,
                                  seed=args.seed, name=name)
        sys.stdout.write(f"{s.algorithm}\t{s.k}\t{s.f_alg:.6f}\t{s.f_random:.6f}\t"
                         f"{s.score:.6f}\t{s.random_stderr:.6f}\n")


def cmd_eval_resolve(args):
    graph_a = read_graph(args.graph, args.weighted)
    graph_b = read_graph(args.graph_b, args.weighted)
    with open(args.mapping, encoding="utf-8") as fh:
        mapping = read_mapping(fh)
    _echo_config(args)
    est = PantherPlusPlus(D=args.D, T=args.T, epsilon=args.epsilon, delta=args.delta,
                          c=args.c, n_paths=args.n_paths, random_state=args.seed,
                          n_jobs=args.threads)
    try:
        report = identity_resolution(graph_a, graph_b, mapping, args.ks, estimator=est)
    except KeyError as exc:
        raise GraphFormatError(f"mapping refers to unknown vertex: {exc}") from None
    sys.stdout.write("k\thit_rate\n")
    for k, rate in zip(report.ks, report.hit_rates):
        sys.stdout.write(f"{k}\t{rate:.6f}\n")


def _synth_params(args):
    base = args.base if args.kind == "two-copies-perturbed" else args.kind
    params = {"n": args.n}
    if base == "erdos-renyi":
        params["p"] = args.p
    else:
        params["m"] = args.m
    if args.kind == "two-copies-perturbed":
        params.update(rho=args.rho, base=base)
    return params


def cmd_synth(args):
    _echo_config(args)
    result = synth_graph(args.kind, seed=args.seed, **_synth_params(args))
    if args.kind != "two-copies-perturbed":
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                write_edge_list(result, fh, weighted=False)
        else:
            write_edge_list(result, sys.stdout, weighted=False)
        return
    graph_a, graph_b, mapping = result
    if not (args.out and args.out_b and args.mapping_out):
        raise UsageError("two-copies-perturbed needs --out, --out-b and --mapping-out")
    for path, g in ((args.out, graph_a), (args.out_b, graph_b)):
        with open(path, "w", encoding="utf-8") as fh:
            write_edge_list(g, fh, weighted=False)
    with open(args.mapping_out, "w", encoding="utf-8") as fh:
        write_mapping(mapping, fh)


def cmd_snapshot(args):
    graph = read_graph(args.graph, args.weighted)
    graph.save(args.out)
    log.info("wrote %r to %s", graph, args.out)


def cmd_bench(args):
    if args.graph:
        graph = read_graph(args.graph, args.weighted)
    else:
        graph = synth_graph("preferential-attachment", seed=args.seed, n=args.n, m=args.m)
    budget = default_budget(graph.edge_count, delta=args.delta, c=args.c, T=args.T)
    _echo_config(args, vertices=graph.vertex_count, edges=graph.edge_count,
                 default_epsilon=f"{budget.epsilon:.6g}")
    t0 = time.perf_counter()
    model = Panther(T=args.T, epsilon=args.epsilon, delta=args.delta, c=args.c,
                    n_paths=args.n_paths, random_state=args.seed,
                    n_jobs=args.threads).fit(graph)
    t_sample = time.perf_counter() - t0
    rng = np.random.default_rng(args.seed)
    queries = rng.integers(0, graph.vertex_count, size=args.queries).tolist()
    t0 = time.perf_counter()
    for v in queries:
        model.top_k(v, args.k)
    t_query = time.perf_counter() - t0
    sys.stdout.write(
        f"vertices\t{graph.vertex_count}\nedges\t{graph.edge_count}\n"
        f"paths\t{model.n_paths_}\nsample_seconds\t{t_sample:.3f}\n"
        f"paths_per_second\t{model.n_paths_ / t_sample:.1f}\n"
        f"queries_per_second\t{len(queries) / t_query:.1f}\n")


def build_parser():
    parser = _Parser(prog="panther", description="Top-k vertex similarity by random path sampling.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sample", help="sample paths and write the path index")
    _add_graph(p)
    _add_budget(p)
    p.add_argument("--paths-file", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("topk", help="top-k similar vertices by path co-occurrence")
    _add_graph(p)
    _add_budget(p)
    p.add_argument("--query", required=True, help="query vertex label")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--paths-file", default=None, help="reuse or create a path index file")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("topk-pp", help="top-k structurally similar vertices (feature vectors)")
    _add_graph(p)
    _add_budget(p)
    p.add_argument("--graph-b", default=None, help="search this second graph instead")
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--D", type=int, default=50, dest="D")
    p.add_argument("--paths-file", default=None)
    p.add_argument("--vectors-file", default=None, help="reuse or create vectors of --graph")
    p.add_argument("--vectors-file-b", default=None, help="reuse or create vectors of --graph-b")
    p.set_defaults(func=cmd_topk_pp)

    p = sub.add_parser("oracle", help="exact pair similarities by full enumeration")
    _add_graph(p)
    p.add_argument("--T", type=int, default=5, dest="T")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("eval", help="accuracy protocols")
    esub = p.add_subparsers(dest="protocol", metavar="protocol", parser_class=_Parser)
    esub.required = True
    e = esub.add_parser("cn", help="common-neighbor approximation score")
    _add_graph(e)
    _add_budget(e)
    e.add_argument("--k", type=int, default=10)
    e.add_argument("--D", type=int, default=50, dest="D")
    e.add_argument("--trials", type=int, default=100)
    e.add_argument("--algorithm", action="append",
                   choices=["panther", "pantherpp", "jaccard", "random"])
    e.set_defaults(func=cmd_eval_cn)
    e = esub.add_parser("resolve", help="cross-network identity resolution hit rates")
    _add_graph(e)
    _add_budget(e)
    e.add_argument("--graph-b", required=True)
    e.add_argument("--mapping", required=True, help="labelA<TAB>labelB lines")
    e.add_argument("--ks", type=lambda s: [int(x) for x in s.split(",")],
                   default=[1, 5, 10, 20, 50])
    e.add_argument("--D", type=int, default=50, dest="D")
    e.set_defaults(func=cmd_eval_resolve)

    p = sub.add_parser("synth", help="write a synthetic edge list")
    p.add_argument("--kind", required=True,
                   choices=["erdos-renyi", "preferential-attachment", "two-copies-perturbed"])
    p.add_argument("--base", default="preferential-attachment",
                   choices=["erdos-renyi", "preferential-attachment"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.05)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--out-b", default=None)
    p.add_argument("--mapping-out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("snapshot", help="write a binary graph snapshot")
    _add_graph(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("bench", help="measure sampling and query throughput")
    _add_graph(p, required=False)
    _add_budget(p)
    p.add_argument("--n", type=int, default=20000, help="synthetic graph size without --graph")
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--queries", type=int, default=1000)
    p.set_defaults(func=cmd_bench)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="panther: %(message)s", stream=sys.stderr, force=True)
    if getattr(args, "command", None) == "eval" and args.protocol == "cn" and not args.algorithm:
        args.algorithm = ["panther", "pantherpp", "random"]
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"panther: error: {exc}\n")
        return EXIT_USAGE
    except (GraphFormatError, PathIndexFormatError, VectorFileError,
            OracleTooLargeError, OSError, ValueError, IndexError) as exc:
        sys.stderr.write(f"panther: error: {exc}\n")
        return EXIT_DATA
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
