"""Command-line front end.

Exit codes: 0 Nash equilibrium (or success), 1 not an equilibrium (or
oracle disagreement), 2 usage or model-scope error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

import numpy as np

from .graph import Graph, GraphError, generate, label_sort_key, random_tree, read_graph, serialize_graph
from .oracle import BudgetExceeded, EnumerationBudget, brute_force_best_response
from .pagerank import GameConfig, NumericalError, potentials_column, stationary_pagerank
from .verifiers import (
    K_MAX,
    MODELS,
    TOL,
    BestResponseResult,
    ScopeError,
    Strategy,
    best_response_add_delete,
    best_response_deletion_general,
    best_response_deletion_tree,
    best_response_dynamics,
    best_response_request_delete_tree,
    normalize_model,
    verify_nash,
)

EXIT_NASH, EXIT_NOT_NASH, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

Q_HELP = ("file with one probability per line, in natural label order "
          "(numeric when all labels are integers, else lexicographic); default uniform")


class UsageError(Exception):
    pass


def natural_order(G: Graph) -> list[int]:
    key = label_sort_key(G.labels)
    return sorted(range(G.n), key=lambda v: key(G.labels[v]))


def load_q(path: str | None, G: Graph) -> np.ndarray:
    if path is None:
        return np.full(G.n, 1.0 / G.n)
    with open(path, encoding="utf-8") as f:
        vals = [float(line) for line in f if line.strip() and not line.lstrip().startswith("#")]
    if len(vals) != G.n:
        raise UsageError(f"q file has {len(vals)} entries; the graph has {G.n} vertices")
    vals = np.array(vals)
    if np.any(vals < 0) or abs(vals.sum() - 1.0) > 1e-9:
        raise UsageError("q entries must be nonnegative and sum to 1 within 1e-9")
    q = np.empty(G.n)
    q[natural_order(G)] = vals
    return q / q.sum()


def make_config(args, G: Graph) -> GameConfig:
    try:
        return GameConfig(args.alpha, load_q(args.q, G))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def strategy_json(G: Graph, s: Strategy | None):
    if s is None:
        return None
    key = label_sort_key(G.labels)

    def names(vs):
        return sorted((G.labels[w] for w in vs), key=key)

    return {
        "kept": names(s.kept),
        "outlinks": names(s.outlinks),
        "added_edge": None if s.added_edge is None else G.labels[s.added_edge],
    }


def strategy_text(G: Graph, s: Strategy | None) -> str:
    if s is None:
        return "-"
    return strategy_text_from_json(strategy_json(G, s))


def vertex_json(G: Graph, r: BestResponseResult) -> dict:
    return {
        "id": G.labels[r.vertex],
        "in_best_response": r.in_best_response,
        "pi": float(r.current_pi),
        "best_pi": float(r.best_pi),
        "improving": strategy_json(G, r.improving),
    }


def report_json(G, model, cfg, results, timing_ms) -> dict:
    by_vertex = {r.vertex: r for r in results}
    order = [v for v in natural_order(G) if v in by_vertex]
    return {
        "model": model,
        "alpha": cfg.alpha,
        "q": [float(cfg.q[v]) for v in natural_order(G)],
        "verdict": all(r.in_best_response for r in results),
        "vertices": [vertex_json(G, by_vertex[v]) for v in order],
        "timing_ms": timing_ms,
    }


def print_report(doc: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
        return
    out.write(f"model: {doc['model']}  alpha: {doc['alpha']}\n")
    out.write(f"{'vertex':>8} {'pi':>10} {'best_pi':>10}  best_response  improving\n")
    for r in doc["vertices"]:
        imp = r["improving"]
        move = "-" if imp is None else strategy_text_from_json(imp)
        flag = "yes" if r["in_best_response"] else "no"
        out.write(f"{r['id']:>8} {r['pi']:10.6f} {r['best_pi']:10.6f}  {flag:<13}  {move}\n")
    if doc["timing_ms"] is not None:
        out.write(f"time: {doc['timing_ms']:.1f} ms\n")
    out.write(f"NASH: {'yes' if doc['verdict'] else 'no'}\n")


def strategy_text_from_json(d: dict) -> str:
    parts = ["keep {" + ",".join(d["kept"]) + "}"]
    if d["outlinks"]:
        parts.append("outlinks {" + ",".join(d["outlinks"]) + "}")
    if d["added_edge"] is not None:
        parts.append(f"add {d['added_edge']}")
    return " ".join(parts)


def vertex_arg(G: Graph, label: str) -> int:
    try:
        return G.index_of(label)
    except GraphError as exc:
        raise UsageError(str(exc)) from exc


def single_best_response(G, v, model, cfg, tol, k_max) -> BestResponseResult:
    if model == "request_delete":
        if not G.is_forest():
            raise ScopeError("request-delete verification is only available for trees and forests")
        return best_response_request_delete_tree(G, v, cfg, tol)
    if model == "deletion":
        if G.is_forest():
            return best_response_deletion_tree(G, v, cfg, tol)
        return best_response_deletion_general(G, v, cfg, tol, k_max)
    return best_response_add_delete(G, v, cfg, tol, k_max)


# subcommands


def cmd_verify(args, out) -> int:
    G = read_graph(args.graph)
    cfg = make_config(args, G)
    model = normalize_model(args.model)
    report = verify_nash(G, model, cfg, args.tolerance, args.k_max)
    timing = round(report.timing_ms, 3) if args.timing else None
    doc = report_json(G, model, cfg, report.results, timing)
    print_report(doc, args.format, out)
    return EXIT_NASH if report.verdict else EXIT_NOT_NASH


def cmd_best_response(args, out) -> int:
    G = read_graph(args.graph)
    cfg = make_config(args, G)
    model = normalize_model(args.model)
    v = vertex_arg(G, args.vertex)
    res = single_best_response(G, v, model, cfg, args.tolerance, args.k_max)
    doc = report_json(G, model, cfg, [res], None)
    print_report(doc, args.format, out)
    return EXIT_NASH if res.in_best_response else EXIT_NOT_NASH


def _vector_output(G, values, name, args, out, extra=None) -> None:
    order = natural_order(G)
    if args.format == "json":
        doc = dict(extra or {})
        doc["alpha"] = args.alpha
        doc[name] = {G.labels[v]: float(values[v]) for v in order}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for v in order:
            out.write(f"{G.labels[v]} {values[v]:.6f}\n")


def cmd_pagerank(args, out) -> int:
    G = read_graph(args.graph)
    cfg = make_config(args, G)
    _vector_output(G, stationary_pagerank(G, cfg), "pagerank", args, out)
    return 0


def cmd_potentials(args, out) -> int:
    G = read_graph(args.graph)
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"alpha must lie strictly in (0, 1), got {args.alpha}")
    v = vertex_arg(G, args.vertex)
    phi = potentials_column(G, v, args.alpha)
    _vector_output(G, phi, "potentials", args, out, {"target": args.vertex})
    return 0


def cmd_dynamics(args, out) -> int:
    G = read_graph(args.graph)
    cfg = make_config(args, G)
    model = normalize_model(args.model)
    trace = best_response_dynamics(G, model, cfg, args.max_steps, args.tolerance, args.k_max)
    if args.format == "json":
        doc = {
            "model": model,
            "alpha": cfg.alpha,
            "steps": [{"graph_hash": s.graph_hash, "mover": G.labels[s.mover], "delta_pi": s.delta_pi,
                       "move": strategy_json(G, s.strategy)} for s in trace.steps],
            "stop_reason": trace.reason,
            "verdict": trace.equilibrium,
            "final_graph": serialize_graph(trace.final),
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for i, s in enumerate(trace.steps, start=1):
            out.write(f"step {i}: {s.graph_hash} mover {G.labels[s.mover]} "
                      f"dpi {s.delta_pi:.6f} {strategy_text(G, s.strategy)}\n")
        out.write(f"stopped: {trace.reason} after {len(trace.steps)} steps\n")
        out.write("final graph:\n" + serialize_graph(trace.final))
        out.write(f"NASH: {'yes' if trace.equilibrium else 'no'}\n")
    return EXIT_NASH if trace.equilibrium else EXIT_NOT_NASH


def _random_instance(model: str, n_max: int, rng: random.Random) -> Graph:
    n = rng.randint(2, n_max)
    if model == "request_delete":
        return random_tree(n, rng)
    while True:
        G = generate("gnp", n, p=rng.uniform(0.3, 0.8), seed=rng.randrange(2 ** 31), connected=True)
        if G.n >= 2:
            return G


def cmd_oracle_check(args, out) -> int:
    model = normalize_model(args.model)
    if args.n_max < 2 or args.n_max > EnumerationBudget().max_n:
        raise UsageError(f"--n-max must lie in 2..{EnumerationBudget().max_n}")
    if args.q is not None:
        raise UsageError("oracle-check draws its own graphs; --q is not accepted")
    rng = random.Random(args.seed)
    mismatches = []
    for trial in range(args.trials):
        G = _random_instance(model, args.n_max, rng)
        cfg = GameConfig.uniform(G.n, args.alpha)
        report = verify_nash(G, model, cfg, args.tolerance, args.k_max)
        pi_G = stationary_pagerank(G, cfg)
        for fast in report.results:
            slow = brute_force_best_response(G, fast.vertex, model, cfg, tol=args.tolerance, pi_G=pi_G)
            if fast.in_best_response != slow.in_best_response or abs(fast.best_pi - slow.best_pi) > 1e-7:
                mismatches.append({"trial": trial, "graph": serialize_graph(G), "vertex": G.labels[fast.vertex],
                                   "fast": [fast.in_best_response, fast.best_pi],
                                   "oracle": [slow.in_best_response, slow.best_pi]})
    if args.format == "json":
        doc = {"model": model, "alpha": args.alpha, "trials": args.trials, "seed": args.seed,
               "disagreements": mismatches}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for m in mismatches:
            out.write(f"trial {m['trial']} vertex {m['vertex']}: fast {m['fast']} oracle {m['oracle']}\n")
        out.write(f"{args.trials} trials, {len(mismatches)} disagreements\n")
    return 0 if not mismatches else 1


def cmd_generate(args, out) -> int:
    G = generate(args.kind, args.n, p=args.p, seed=args.seed, connected=args.connected)
    out.write(serialize_graph(G))
    return 0


# argument parsing


def _common(p, graph=True, model=True):
    if graph:
        p.add_argument("graph", help="edge-list file: one 'u v' per line, '#' comments")
    if model:
        p.add_argument("--model", default="deletion", help=f"one of {', '.join(MODELS)} (hyphens accepted)")
    p.add_argument("--alpha", type=float, default=0.15, help="jump probability, default 0.15")
    p.add_argument("--q", default=None, help=Q_HELP)
    p.add_argument("--tolerance", type=float, default=TOL, help="improvement margin, default 1e-9")
    p.add_argument("--k-max", type=int, default=K_MAX, help="largest supported k(G) for general graphs")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pagerank-games", description="PageRank network-formation games")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check whether a graph is a Nash equilibrium")
    _common(p)
    p.add_argument("--timing", action="store_true", help="include wall time (makes output nondeterministic)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("best-response", help="best response of one vertex")
    _common(p)
    p.add_argument("vertex", help="vertex label")
    p.set_defaults(func=cmd_best_response)

    p = sub.add_parser("pagerank", help="stationary PageRank of every vertex")
    _common(p, model=False)
    p.set_defaults(func=cmd_pagerank)

    p = sub.add_parser("potentials", help="potentials toward one vertex")
    _common(p, model=False)
    p.add_argument("vertex", help="target vertex label")
    p.set_defaults(func=cmd_potentials)

    p = sub.add_parser("dynamics", help="run best-response dynamics")
    _common(p)
    p.add_argument("--max-steps", type=int, default=100)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("oracle-check", help="compare fast verifiers with exhaustive search")
    _common(p, graph=False)
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("generate", help="write a test graph as an edge list")
    p.add_argument("kind", choices=("complete", "path", "cycle", "star", "random_tree", "gnp"))
    p.add_argument("n", type=int, help="vertex count (leaf count for star)")
    p.add_argument("--p", type=float, default=0.5, help="edge probability for gnp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--connected", action="store_true", help="keep only the largest component (gnp)")
    p.set_defaults(func=cmd_generate)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        return args.func(args, out)
    except (UsageError, ValueError, BudgetExceeded, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
