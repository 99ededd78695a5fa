"""``gedkit`` command line: gen, ged, train, eval, query, selftest.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dataset import Dataset, build_dataset
from .ged import ALGORITHMS, CostModel, compute_ged
from .graph import generate_corpus, load_graph, load_graphs
from .metrics import classical_method, evaluate, rank_ids, write_reports
from .model import SimGNN
from .training import predict_pairs, train

log = logging.getLogger("gedkit")

NEURAL_METHODS = {
    ("learnable-gc", True): "simgnn",
    ("simple-mean", False): "simplemean",
    ("degree", False): "attdegree",
    ("global-context", False): "attglobalcontext",
    ("learnable-gc", False): "attlearnablegc",
}
CLASSICAL_METHODS = ("astar", "beam", "hungarian", "vj", "ensemble")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _JsonLines(logging.Formatter):
    def format(self, record):
        return json.dumps({"time": record.created, "level": record.levelname, "logger": record.name,
                           "message": record.getMessage()})


def _setup_logging(verbose: bool, json_path) -> None:
    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    err = logging.StreamHandler(sys.stderr)
    err.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(err)
    if json_path:
        fh = logging.FileHandler(json_path)
        fh.setFormatter(_JsonLines())
        root.addHandler(fh)


def _csv(kind):
    return lambda s: [kind(x) for x in s.split(",") if x.strip()]


def _config_flags(p) -> None:
    """Flags mirroring RunConfig fields; unset flags leave file/default values alone."""
    p.add_argument("--gcn-dims", type=_csv(int))
    p.add_argument("--ntn-k", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--fc-dims", type=_csv(int))
    p.add_argument("--pooling", choices=["simple-mean", "degree", "global-context", "learnable-gc"])
    p.add_argument("--strategy2", dest="strategy2", action="store_true", default=None)
    p.add_argument("--no-strategy2", dest="strategy2", action="store_false")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--val-every", type=int)
    p.add_argument("--size-threshold", type=int)
    p.add_argument("--beam-width", type=int)
    p.add_argument("--budget", type=int)


def _global_flags(p) -> None:
    # SUPPRESS keeps a flag given before the command from being reset by the subparser
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON run config (flags override it)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                   help="worker processes for pair computations (1 = deterministic)")
    p.add_argument("--log-json", metavar="FILE", default=argparse.SUPPRESS, help="also write a JSON-lines run log")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _global_flags(common)

    parser = _Parser(prog="gedkit", description="Graph edit distance and learned graph similarity.")
    parser.add_argument("--version", action="version", version=f"gedkit {__version__}")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="generate a corpus and its ground-truth pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--graphs", help="use graphs from a JSON-lines file instead of generating")
    p.add_argument("--n-graphs", type=int, default=100)
    p.add_argument("--min-nodes", type=int, default=4)
    p.add_argument("--max-nodes", type=int, default=8)
    p.add_argument("--alphabet", type=_csv(str), default=["C", "N", "O"],
                   help="comma-separated node labels; empty for unlabeled graphs")
    p.add_argument("--density", type=float, default=0.2)
    _config_flags(p)

    p = sub.add_parser("ged", parents=[common], help="distance between two graph files")
    p.add_argument("--algo", choices=ALGORITHMS, default="astar")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--path", action="store_true", help="include the edit path")
    _config_flags(p)

    p = sub.add_parser("train", parents=[common], help="train a model on a generated dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _config_flags(p)

    p = sub.add_parser("eval", parents=[common], help="rank test queries with several methods")
    p.add_argument("--data", required=True)
    p.add_argument("--ckpt", action="append", default=[], help="model checkpoint; repeat for several variants")
    p.add_argument("--methods", type=_csv(str), default=["simgnn"])
    p.add_argument("--k", type=_csv(int), default=[10, 20])
    p.add_argument("--out", required=True)
    _config_flags(p)

    p = sub.add_parser("query", parents=[common], help="rank database graphs against one query graph")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--topk", type=int, default=6)

    p = sub.add_parser("selftest", parents=[common], help="gradient and oracle consistency checks")
    p.add_argument("--quick", action="store_true")
    return parser


def _run_config(args) -> RunConfig:
    fields = ("gcn_dims", "ntn_k", "bins", "fc_dims", "pooling", "strategy2", "batch_size", "lr", "iterations",
              "val_every", "size_threshold", "beam_width", "budget", "seed", "jobs")
    return load_config(getattr(args, "config", None), {f: getattr(args, f, None) for f in fields})


def cmd_gen(args, cfg: RunConfig) -> int:
    if args.graphs:
        graphs = load_graphs(args.graphs)
    else:
        if not 1 <= args.min_nodes <= args.max_nodes:
            raise UsageError("need 1 <= --min-nodes <= --max-nodes")
        graphs = generate_corpus(args.n_graphs, args.min_nodes, args.max_nodes, args.alphabet or None, cfg.seed,
                                 density=args.density)
    ds = build_dataset(graphs, cfg.size_threshold, cfg.seed, budget=cfg.budget, width=cfg.beam_width,
                       jobs=cfg.jobs)
    ds.save(args.out)
    print(json.dumps({"out": args.out, "graphs": len(ds.graphs),
                      **{role: len(s) for role, s in ds.samples.items()}, "skipped": len(ds.skipped)}))
    return 0


def cmd_ged(args, cfg: RunConfig) -> int:
    g1, g2 = load_graph(args.g1), load_graph(args.g2)
    r = compute_ged(args.algo, g1, g2, CostModel(), width=cfg.beam_width, budget=cfg.budget)
    print(json.dumps(r.to_json(with_path=args.path)))
    return 0


def cmd_train(args, cfg: RunConfig) -> int:
    ds = Dataset.load(args.data)
    start = time.perf_counter()
    result = train(ds, cfg.model_config(), cfg.train_config())
    result.model.save(args.out, run_config=cfg.to_json(), training_log=result.log,
                      best_iteration=result.best_iteration, best_val_mse=result.best_val_mse)
    print(json.dumps({"out": args.out, "best_iteration": result.best_iteration,
                      "initial_val_mse": result.initial_val_mse, "best_val_mse": result.best_val_mse,
                      "seconds": round(time.perf_counter() - start, 3)}))
    return 0


def cmd_eval(args, cfg: RunConfig) -> int:
    ds = Dataset.load(args.data)
    models = {}
    for path in args.ckpt:
        m = SimGNN.load(path)
        models[NEURAL_METHODS.get((m.config.pooling, m.config.strategy2), Path(path).stem)] = m
    reports = []
    for name in args.methods:
        if name in CLASSICAL_METHODS:
            method = classical_method(name, width=cfg.beam_width, budget=cfg.budget)
            reports.append(evaluate(method, ds, args.k, name=name))
        elif name in models:
            model = models[name]
            reports.append(evaluate(lambda pairs, m=model: predict_pairs(m, pairs), ds, args.k, name=name,
                                    batched=True))
        else:
            known = sorted(set(CLASSICAL_METHODS) | set(models))
            raise UsageError(f"method {name!r} has no checkpoint or algorithm; available: {', '.join(known)}")
        log.info("%s: %s", name, reports[-1].metrics)
    write_reports(reports, args.out)
    print(json.dumps({r.method: r.to_json()["metrics"] for r in reports}))
    return 0


def cmd_query(args, cfg: RunConfig) -> int:
    model = SimGNN.load(args.ckpt)
    ds = Dataset.load(args.data)
    q = load_graph(args.graph)
    database = sorted(ds.split.train + ds.split.val)
    scores = predict_pairs(model, [(q, ds.graphs[d]) for d in database])
    known = {s.j: s.nged for role in ds.samples.values() for s in role if s.i == q.id}
    ranked = rank_ids(database, scores)[: args.topk]
    by_id = dict(zip(database, scores.tolist()))
    for rank, d in enumerate(ranked, 1):
        print(json.dumps({"rank": rank, "id": d, "similarity": by_id[d], "true_nged": known.get(d)}))
    return 0


def cmd_selftest(args, cfg: RunConfig) -> int:
    from .selftest import run_selftest

    results = run_selftest(quick=args.quick, seed=cfg.seed)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail and not r.ok else ""))
    return 0 if all(r.ok for r in results) else 2


COMMANDS = {"gen": cmd_gen, "ged": cmd_ged, "train": cmd_train, "eval": cmd_eval, "query": cmd_query,
            "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("gedkit: error: a command is required", file=sys.stderr)
        return 1
    _setup_logging(getattr(args, "verbose", False), getattr(args, "log_json", None))
    try:
        cfg = _run_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"gedkit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        log.error("config: %s", exc)
        return 2
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        log.error("%s failed: %s", args.command, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
