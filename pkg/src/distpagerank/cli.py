"""Command-line interface: ``distpagerank <command> [flags]``.

Every command writes one JSON document (or a CSV table with
``--format csv``) to ``--output`` or standard output. Exit status is 0 on
success, 1 on bad input and 2 when an iteration hit its cap; in that last
case the partial result is still written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from importlib import resources

import numpy as np

from . import aggregation as agg
from . import consensus as cons
from .distributed import SIMULTANEOUS, SINGLE_UNIFORM, gossip_trials, summarize_traces
from .eigenfactor import eigenfactor, read_citation_csvs
from .exceptions import DistPageRankError
from .graph import (BACK_LINKS, UNIFORM_COLUMN, hyperlink_matrix, read_edge_list,
                    read_labels, repair_dangling)
from .metrics import compare
from .pagerank import pagerank_power

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


def fixture_path(name: str) -> str:
    """Filesystem path of a bundled fixture (e.g. ``six_page.txt``)."""
    return str(resources.files("distpagerank").joinpath("data", name))


def _clean(obj):
    """Make ``obj`` JSON-safe: arrays to lists, NaN to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if math.isnan(f) or math.isinf(f) else f
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_rank(path) -> np.ndarray:
    """Rank vector from a JSON file: a list, or an object with a ``rank`` key."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DistPageRankError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    values = doc.get("rank") if isinstance(doc, dict) else doc
    if not isinstance(values, list):
        raise DistPageRankError(f"{path}: no rank vector found")
    return np.asarray(values, dtype=float)


def _load_graph(args):
    g = read_edge_list(args.input, one_based=not args.zero_based)
    if getattr(args, "labels", None):
        g = read_labels(args.labels, g, one_based=not args.zero_based)
    repaired = repair_dangling(g, args.repair)
    return g, repaired


def _reference(A, m, args):
    if getattr(args, "ref_rank", None):
        ref = read_rank(args.ref_rank)
        if ref.shape != (A.n,):
            raise DistPageRankError(f"reference rank has {ref.size} entries, expected {A.n}")
        return ref
    return pagerank_power(A, m, tol=1e-14, max_iter=100000)[0]


def cmd_rank(args):
    g, rg = _load_graph(args)
    A = hyperlink_matrix(rg)
    x, rep = pagerank_power(A, args.m, tol=args.tol, max_iter=args.max_iter)
    doc = {
        "command": "rank", "n": A.n, "links": rg.num_edges, "added_links": rg.num_edges - g.num_edges,
        "m": args.m, "tol": args.tol, "iterations": rep.iterations, "converged": rep.converged,
        "rank": x,
    }
    rows = [(i + 1, v) for i, v in enumerate(x)]
    return doc, (["page", "rank"], rows), rep.converged


def cmd_simulate_gossip(args):
    _, rg = _load_graph(args)
    A = hyperlink_matrix(rg)
    x_star = _reference(A, args.m, args)
    seeds = [args.seed + t for t in range(args.trials)]
    mode = SIMULTANEOUS if args.mode == "simultaneous" else SINGLE_UNIFORM
    traces = gossip_trials(A, args.m, seeds, args.steps, mode, args.p, args.checkpoint_every,
                           x_star, None, args.damping)
    est = summarize_traces(traces)
    doc = {
        "command": "simulate-gossip", "n": A.n, "m": args.m, "mode": args.mode, "p": args.p,
        "damping": traces[0].damping, "seeds": seeds, "steps": est.steps,
        "l1_mean": est.l1_mean, "l1_min": est.l1_minimum, "l1_max": est.l1_maximum,
        "mse_mean": est.mean, "y_first_trial": traces[0].averages, "rank": traces[0].averages[-1],
        "reference": x_star,
    }
    rows = zip(est.steps, est.l1_mean, est.l1_minimum, est.l1_maximum, est.mean)
    return doc, (["step", "l1_mean", "l1_min", "l1_max", "mse_mean"], rows), True


def _grouping(args, g):
    if args.groups:
        return agg.read_grouping(args.groups, g.n, one_based=not args.zero_based)
    if args.group_by_domain:
        return agg.group_by_label_prefix(g)
    raise DistPageRankError("give --groups FILE or --group-by-domain with --labels")


def cmd_aggregate(args):
    g, rg = _load_graph(args)
    A = hyperlink_matrix(rg)
    grouping = _grouping(args, rg)
    initial_r = grouping.r
    if args.delta is not None:
        grouping = agg.regroup(rg, grouping, args.delta)
    system = agg.build_aggregated_system(A, grouping)
    x, rep = agg.approximate_pagerank(system, args.m, tol=args.tol, max_iter=args.max_iter)
    x_star = _reference(A, args.m, args)
    report = compare(x_star, x)
    doc = {
        "command": "aggregate", "n": A.n, "m": args.m, "groups_initial": initial_r,
        "groups": grouping.r, "single_groups": grouping.r1, "delta": args.delta,
        "node_parameters": agg.node_parameters(rg, grouping), "iterations": rep.iterations,
        "converged": rep.converged, "x_tilde1": rep.x1, "x_tilde2": rep.x2, "rank": x,
        "reference": x_star, "operation_counts": agg.operation_counts(A, system),
        **report.to_dict(),
    }
    rows = [(i + 1, grouping.assignment[i] + 1, x[i], x_star[i]) for i in range(A.n)]
    return doc, (["page", "group", "approx", "reference"], rows), rep.converged


def _x0(choice, n, seed):
    if choice == "uniform-random":
        return np.random.Generator(np.random.PCG64(seed)).random(n)
    if choice.startswith("e") and choice[1:].isdigit():
        i = int(choice[1:])
        if not 1 <= i <= n:
            raise DistPageRankError(f"--x0 {choice}: index must lie in 1..{n}")
        x = np.zeros(n)
        x[i - 1] = 1.0
        return x
    x = read_rank(choice)
    if x.shape != (n,):
        raise DistPageRankError(f"--x0 file has {x.size} entries, expected {n}")
    return x


def cmd_consensus(args):
    g = read_edge_list(args.input, one_based=not args.zero_based)
    if args.patterns == "per-page":
        pats = cons.per_page_patterns(g)
    elif args.patterns == "static":
        pats = cons.static_pattern(g)
    else:
        if not args.pattern_file:
            raise DistPageRankError("--patterns file needs --pattern-file")
        pats = cons.read_patterns(args.pattern_file, g.n, one_based=not args.zero_based)
    x0 = _x0(args.x0, g.n, args.seed)
    seeds = [args.seed + t for t in range(args.trials)]
    traces = [cons.consensus_run(pats, x0, s, args.steps) for s in seeds]
    doc = {
        "command": "consensus", "n": g.n, "patterns": pats.d, "seeds": seeds, "steps": args.steps,
        "globally_reachable": cons.globally_reachable(g.n, g.edges),
        "disagreement": traces[0].disagreement,
        "final_disagreement": [t.disagreement[-1] for t in traces],
        "mse": cons.consensus_mse(traces), "final": traces[0].final,
    }
    rows = [(k, d, e) for k, (d, e) in enumerate(zip(traces[0].disagreement, doc["mse"]))]
    return doc, (["step", "disagreement", "mse"], rows), True


def cmd_eigenfactor(args):
    data = read_citation_csvs(args.citations, args.articles)
    res = eigenfactor(data, args.m, tol=args.tol, max_iter=args.max_iter)
    order = res.ranking()
    rows = [
        (data.journals[i], res.influence[i], res.EF[i], res.AI[i], r + 1)
        for r, i in enumerate(order)
    ]
    doc = {
        "command": "eigenfactor", "m": args.m, "iterations": res.report.iterations,
        "converged": res.report.converged,
        "journals": [
            {"journal": j, "influence": x, "EF": ef, "AI": ai, "rank": r}
            for j, x, ef, ai, r in rows
        ],
    }
    return doc, (["journal", "influence", "EF", "AI", "rank"], rows), res.report.converged


def cmd_compare(args):
    a, b = read_rank(args.a), read_rank(args.b)
    report = compare(a, b, args.top_k)
    doc = {"command": "compare", **report.to_dict()}
    return doc, (list(report.to_dict()), [list(report.to_dict().values())]), True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="output file (default: standard output)")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--quiet", action="store_true", help="suppress log messages")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--input", required=True, help="edge list, one 'src dst' per line")
    graph.add_argument("--zero-based", action="store_true", help="indices in files start at 0")
    graph.add_argument("--repair", choices=[BACK_LINKS, UNIFORM_COLUMN], default=BACK_LINKS)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--m", type=float, default=0.15, help="teleportation probability")
    solver.add_argument("--tol", type=float, default=1e-10)
    solver.add_argument("--max-iter", type=int, default=1000)

    parser = argparse.ArgumentParser(prog="distpagerank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", parents=[common, graph, solver], help="PageRank by power method")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("simulate-gossip", parents=[common, graph], help="randomized gossip PageRank")
    p.add_argument("--m", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--trials", type=int, default=1, help="trial t uses seed + t")
    p.add_argument("--mode", choices=["single", "simultaneous"], default="single")
    p.add_argument("--p", type=float, default=None, help="firing probability (simultaneous)")
    p.add_argument("--damping", type=float, default=None, help="override the gossip damping")
    p.add_argument("--checkpoint-every", type=int, default=100)
    p.add_argument("--ref-rank", help="reference rank JSON (default: power method)")
    p.set_defaults(func=cmd_simulate_gossip)

    p = sub.add_parser("aggregate", parents=[common, graph, solver], help="aggregated PageRank")
    p.add_argument("--groups", help="file of 'page group' lines")
    p.add_argument("--labels", help="file of 'page label' lines")
    p.add_argument("--group-by-domain", action="store_true", help="group pages by label host")
    p.add_argument("--delta", type=float, default=None, help="split pages with larger node parameter")
    p.add_argument("--ref-rank", help="reference rank JSON (default: power method)")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("consensus", parents=[common], help="randomized consensus")
    p.add_argument("--input", required=True)
    p.add_argument("--zero-based", action="store_true")
    p.add_argument("--x0", default="e1", help="e<i>, uniform-random, or a JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--patterns", choices=["per-page", "static", "file"], default="per-page")
    p.add_argument("--pattern-file")
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("eigenfactor", parents=[common], help="Eigenfactor and Article Influence")
    p.add_argument("--citations", required=True)
    p.add_argument("--articles", required=True)
    p.add_argument("--m", type=float, default=0.15)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iter", type=int, default=10000)
    p.set_defaults(func=cmd_eigenfactor)

    p = sub.add_parser("compare", parents=[common], help="compare two rank vectors")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_compare)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors count as bad input; exit status 2 means non-convergence
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, stream=stderr,
                        format="%(levelname)s: %(message)s")
    try:
        doc, (header, rows), converged = args.func(args)
    except (DistPageRankError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    text = dumps(doc) if args.format == "json" else _csv_text(header, rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not converged:
        print("warning: iteration cap reached before convergence", file=stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
